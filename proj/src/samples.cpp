#include "lvlmc/samples.hpp"

#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lvlmc/errors.hpp"

namespace lvlmc {

void SampleSet::validate() const {
    if (locations.empty()) throw InvariantError("SampleSet: no samples");
    if (values.rows() != count())
        throw DimensionError("SampleSet: value rows do not match location count");
    if (static_cast<int>(variable_names.size()) != attribute_count())
        throw DimensionError("SampleSet: variable name count mismatch");
    for (const auto& loc : locations)
        for (double c : loc)
            if (!std::isfinite(c)) throw InvariantError("SampleSet: non-finite coordinate");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        std::size_t b = cell.find_first_not_of(" \t\r");
        std::size_t e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

SampleSet from_rows(std::vector<Point3> locs, std::vector<double> flat,
                    std::vector<std::string> names) {
    SampleSet set;
    const int n = static_cast<int>(locs.size());
    const int p = static_cast<int>(names.size());
    set.locations = std::move(locs);
    set.variable_names = std::move(names);
    set.values.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            set.values(i, j) = flat[static_cast<std::size_t>(i * p + j)];
    set.validate();
    return set;
}

SampleSet read_csv(std::ifstream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    const auto header = split_csv(line);
    if (header.size() < 4)
        throw ConfigError(path + ":1: expected a CSV header like x,y,z,v1,...");

    std::vector<std::string> names(header.begin() + 3, header.end());
    const int p = static_cast<int>(names.size());

    std::vector<Point3> locs;
    std::vector<double> flat;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) != p + 3)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(p + 3) + " columns, found " +
                              std::to_string(cells.size()));
        Point3 loc;
        for (std::size_t c = 0; c < 3; ++c) loc[c] = std::stod(cells[c]);
        locs.push_back(loc);
        for (int c = 0; c < p; ++c) flat.push_back(std::stod(cells[static_cast<std::size_t>(c) + 3]));
    }
    if (locs.empty()) throw ConfigError(path + ": no data rows");
    return from_rows(std::move(locs), std::move(flat), std::move(names));
}

// GeoEAS: title line, variable count, that many names (first three must be
// the coordinates), then whitespace-separated rows.
SampleSet read_geoeas(std::ifstream& in, const std::string& path) {
    std::string title;
    std::getline(in, title);
    int nvar = 0;
    in >> nvar;
    if (nvar < 4) throw ConfigError(path + ":2: GeoEAS needs x, y, z plus attributes");
    std::string rest;
    std::getline(in, rest);
    std::vector<std::string> names;
    for (int i = 0; i < nvar; ++i) {
        std::string name;
        std::getline(in, name);
        const std::size_t b = name.find_first_not_of(" \t\r");
        const std::size_t e = name.find_last_not_of(" \t\r");
        names.push_back(b == std::string::npos ? "" : name.substr(b, e - b + 1));
    }

    std::vector<Point3> locs;
    std::vector<double> flat;
    const int p = nvar - 3;
    double value = 0.0;
    while (true) {
        Point3 loc;
        if (!(in >> loc[0])) break;
        if (!(in >> loc[1] >> loc[2]))
            throw ConfigError(path + ": truncated coordinate row " +
                              std::to_string(locs.size() + 1));
        locs.push_back(loc);
        for (int c = 0; c < p; ++c) {
            if (!(in >> value))
                throw ConfigError(path + ": truncated data row " + std::to_string(locs.size()));
            flat.push_back(value);
        }
    }
    if (locs.empty()) throw ConfigError(path + ": no data rows");
    return from_rows(std::move(locs), std::move(flat),
                     std::vector<std::string>(names.begin() + 3, names.end()));
}

}  // namespace

SampleSet read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sample file: " + path);

    // A comma in the first line means CSV; GeoEAS puts an integer on line 2.
    std::string first;
    std::getline(in, first);
    in.seekg(0);
    if (first.find(',') != std::string::npos) return read_csv(in, path);
    return read_geoeas(in, path);
}

void write_samples_csv(const std::string& path, const SampleSet& samples) {
    samples.validate();
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write sample file: " + path);
    out << "x,y,z";
    for (const auto& name : samples.variable_names) out << "," << name;
    out << "\n";
    char buf[40];
    for (int i = 0; i < samples.count(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", samples.locations[static_cast<std::size_t>(i)][c]);
            out << (c ? "," : "") << buf;
        }
        for (int j = 0; j < samples.attribute_count(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", samples.values(i, j));
            out << "," << buf;
        }
        out << "\n";
    }
}

}  // namespace lvlmc
