#include "lvlmc/manifest.hpp"

#include <fstream>
#include <sstream>

#include "lvlmc/errors.hpp"

namespace lvlmc {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("digest_file: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return fnv1a(buffer.str());
}

void RunManifest::add_file(const std::string& path) {
    files.push_back({path, digest_file(path)});
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("manifest: cannot write " + path);
    out << "{\n";
    out << "  \"tool_version\": \"" << tool_version << "\",\n";
    out << "  \"config_hash\": \"" << std::hex << config_hash << std::dec << "\",\n";
    out << "  \"master_seed\": " << master_seed << ",\n";
    out << "  \"stage_seconds\": {";
    for (std::size_t i = 0; i < stage_seconds.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", stage_seconds[i].second);
        out << (i ? ", " : "") << "\"" << stage_seconds[i].first << "\": " << buf;
    }
    out << "},\n";
    out << "  \"files\": {";
    for (std::size_t i = 0; i < files.size(); ++i)
        out << (i ? ", " : "") << "\"" << files[i].first << "\": \"" << std::hex
            << files[i].second << std::dec << "\"";
    out << "}\n}\n";
}

}  // namespace lvlmc
