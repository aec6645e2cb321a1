#include "lvlmc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "lvlmc/parallel.hpp"
#include "lvlmc/rng.hpp"

namespace lvlmc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class StageClock {
public:
    explicit StageClock(RunManifest& manifest) : manifest_(manifest) {}

    void finish(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(now - mark_).count();
        manifest_.stage_seconds.push_back({stage, seconds});
        mark_ = now;
    }

private:
    RunManifest& manifest_;
    std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void parse_grid(const json& j, Grid& grid) {
    if (j.contains("origin"))
        for (int c = 0; c < 3; ++c) grid.origin[static_cast<std::size_t>(c)] = j["origin"][static_cast<std::size_t>(c)];
    if (j.contains("spacing"))
        for (int c = 0; c < 3; ++c) grid.spacing[static_cast<std::size_t>(c)] = j["spacing"][static_cast<std::size_t>(c)];
    if (j.contains("counts"))
        for (int c = 0; c < 3; ++c) grid.counts[static_cast<std::size_t>(c)] = j["counts"][static_cast<std::size_t>(c)];
}

VariogramModel parse_model(const json& j) {
    VariogramModel model;
    model.nugget = j.value("nugget", 0.0);
    for (const auto& s : j.at("structures")) {
        Structure structure;
        structure.type = structure_from_string(s.value("type", "exponential"));
        structure.range = s.at("range");
        structure.sill = s.at("sill");
        model.structures.push_back(structure);
    }
    model.validate();
    return model;
}

}  // namespace

void PipelineConfig::validate() const {
    if (samples_path.empty()) throw ConfigError("config: samples path is required");
    if (mode != "lvlmc" && mode != "lmc")
        throw ConfigError("config: mode must be 'lvlmc' or 'lmc', got '" + mode + "'");
    if (neighbors < 2) throw ConfigError("config: neighbors must be at least 2");
    if (n_realizations < 1) throw ConfigError("config: need at least one realization");
    if (n_lines < 100) throw ConfigError("config: turning bands needs at least 100 lines");
    if (threads < 1) throw ConfigError("config: threads must be at least 1");
    if (!(lag_width > 0.0) || n_lags < 3) throw ConfigError("config: bad variogram lags");
    grid.validate();
    solver.validate();
    if (!(search.radius > 0.0) || search.max_samples < 1)
        throw ConfigError("config: bad search parameters");
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError(path + ": " + err.what());
    }

    PipelineConfig cfg;
    try {
        cfg.samples_path = j.value("samples", "");
        cfg.output_dir = j.value("output_dir", "out");
        cfg.mode = j.value("mode", "lvlmc");
        cfg.neighbors = j.value("neighbors", 300);
        cfg.back_transform_neighbors = j.value("back_transform_neighbors", 0);
        if (j.contains("grid")) parse_grid(j["grid"], cfg.grid);
        cfg.alr = j.value("alr", false);
        cfg.closure = j.value("closure", 100.0);
        if (j.contains("variogram")) {
            const auto& v = j["variogram"];
            cfg.lag_width = v.value("lag_width", 5.0);
            cfg.n_lags = v.value("n_lags", 20);
            if (v.contains("model")) cfg.variogram_override = parse_model(v["model"]);
        }
        if (j.contains("search")) {
            cfg.search.radius = j["search"].value("radius", 100.0);
            cfg.search.max_samples = j["search"].value("max_samples", 25);
        }
        cfg.n_realizations = j.value("realizations", 1);
        cfg.n_lines = j.value("turning_bands_lines", 1200);
        cfg.seed = j.value("seed", 0ULL);
        if (j.contains("solver")) {
            const auto& s = j["solver"];
            cfg.solver.epsilon = s.value("epsilon", 1e-6);
            cfg.solver.delta = s.value("delta", 0.1);
            cfg.solver.max_outer_iterations = s.value("max_outer", 200);
            cfg.solver.max_fiber_iterations = s.value("max_fiber", 500);
        }
        cfg.threads = j.value("threads", 1);
        cfg.nodata = j.value("nodata", -999.0);
        cfg.test_points_path = j.value("test_points", "");
        cfg.write_realizations = j.value("write_realizations", true);
    } catch (const json::exception& err) {
        throw ConfigError(path + ": " + err.what());
    }
    cfg.validate();
    return cfg;
}

std::string PipelineConfig::canonical() const {
    json j;
    j["samples"] = samples_path;
    j["output_dir"] = output_dir;
    j["mode"] = mode;
    j["neighbors"] = neighbors;
    j["back_transform_neighbors"] = back_transform_neighbors;
    j["grid"]["origin"] = grid.origin;
    j["grid"]["spacing"] = grid.spacing;
    j["grid"]["counts"] = grid.counts;
    j["alr"] = alr;
    j["closure"] = closure;
    j["variogram"]["lag_width"] = lag_width;
    j["variogram"]["n_lags"] = n_lags;
    if (variogram_override) {
        json m;
        m["nugget"] = variogram_override->nugget;
        for (const auto& s : variogram_override->structures)
            m["structures"].push_back(
                {{"type", to_string(s.type)}, {"range", s.range}, {"sill", s.sill}});
        j["variogram"]["model"] = m;
    }
    j["search"]["radius"] = search.radius;
    j["search"]["max_samples"] = search.max_samples;
    j["realizations"] = n_realizations;
    j["turning_bands_lines"] = n_lines;
    j["seed"] = seed;
    j["solver"]["epsilon"] = solver.epsilon;
    j["solver"]["delta"] = solver.delta;
    j["solver"]["max_outer"] = solver.max_outer_iterations;
    j["solver"]["max_fiber"] = solver.max_fiber_iterations;
    j["nodata"] = nodata;
    j["test_points"] = test_points_path;
    j["write_realizations"] = write_realizations;
    return j.dump();
}

void write_gslib_grid(const std::string& path, const std::string& title,
                      const std::vector<std::string>& names, const Eigen::MatrixXd& values) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write grid file: " + path);
    out << title << "\n" << names.size() << "\n";
    for (const auto& name : names) out << name << "\n";
    char buf[40];
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", values(i, j));
            out << (j ? " " : "") << buf;
        }
        out << "\n";
    }
}

Eigen::MatrixXd read_gslib_grid(const std::string& path, std::vector<std::string>* names) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid file: " + path);
    std::string title;
    std::getline(in, title);
    int nvar = 0;
    in >> nvar;
    if (nvar < 1) throw ConfigError(path + ": bad variable count");
    std::string rest;
    std::getline(in, rest);
    std::vector<std::string> local_names;
    for (int v = 0; v < nvar; ++v) {
        std::string name;
        std::getline(in, name);
        local_names.push_back(name);
    }
    std::vector<double> flat;
    double value = 0.0;
    while (in >> value) flat.push_back(value);
    if (flat.empty() || flat.size() % static_cast<std::size_t>(nvar) != 0)
        throw ConfigError(path + ": data size is not a multiple of the variable count");
    const auto rows = static_cast<Eigen::Index>(flat.size() / static_cast<std::size_t>(nvar));
    Eigen::MatrixXd values(rows, nvar);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < nvar; ++j)
            values(i, j) = flat[static_cast<std::size_t>(i * nvar + j)];
    if (names) *names = local_names;
    return values;
}

namespace {

struct Prepared {
    SampleSet raw_samples;          // as read from disk
    SampleSet samples;              // modeling space (alr applied when enabled)
    std::shared_ptr<SpatialIndex> index;
    std::vector<LocalModel> models;
    Eigen::MatrixXd factors;        // n x p factor data
    VariogramModel factor_model;    // unit total sill
    std::vector<double> factor_variances;
    ExperimentalVariogram pooled_vario;
};

SampleSet to_alr(const SampleSet& raw, double closure) {
    if (raw.attribute_count() < 2)
        throw ConfigError("alr: need at least two parts");
    SampleSet out;
    out.locations = raw.locations;
    const int p = raw.attribute_count() - 1;
    out.values.resize(raw.count(), p);
    for (int j = 0; j < p; ++j)
        out.variable_names.push_back("alr_" + raw.variable_names[static_cast<std::size_t>(j)]);
    for (int i = 0; i < raw.count(); ++i) {
        Composition c;
        c.closure = closure;
        for (int j = 0; j < raw.attribute_count(); ++j) c.parts.push_back(raw.values(i, j));
        const auto x = alr_forward(c);
        for (int j = 0; j < p; ++j) out.values(i, j) = x[static_cast<std::size_t>(j)];
    }
    return out;
}

Prepared prepare(const PipelineConfig& cfg, StageClock& clock) {
    Prepared prep;
    prep.raw_samples = read_samples(cfg.samples_path);
    prep.samples = cfg.alr ? to_alr(prep.raw_samples, cfg.closure) : prep.raw_samples;
    prep.samples.validate();
    clock.finish("read_samples");

    prep.index = std::make_shared<SpatialIndex>(prep.samples.locations);
    LocalInferenceConfig inference;
    inference.k = cfg.mode == "lmc" ? prep.samples.count()
                                    : std::min(cfg.neighbors, prep.samples.count());
    inference.seed = cfg.seed;
    prep.models = infer_all_local_models(prep.samples, *prep.index, inference, cfg.threads);
    clock.finish("local_models");

    const int p = prep.samples.attribute_count();
    prep.factors.resize(prep.samples.count(), p);
    for (int i = 0; i < prep.samples.count(); ++i)
        prep.factors.row(i) = prep.models[static_cast<std::size_t>(i)].factors.transpose();

    // One variogram for all factors: average the per-factor experimental
    // variograms, fit a single exponential, then standardize to unit sill.
    std::vector<double> column(static_cast<std::size_t>(prep.samples.count()));
    ExperimentalVariogram pooled;
    for (int f = 0; f < p; ++f) {
        for (int i = 0; i < prep.samples.count(); ++i)
            column[static_cast<std::size_t>(i)] = prep.factors(i, f);
        double mean = 0.0, m2 = 0.0;
        for (double v : column) {
            mean += v;
            m2 += v * v;
        }
        mean /= static_cast<double>(column.size());
        prep.factor_variances.push_back(m2 / static_cast<double>(column.size()) - mean * mean);

        const auto vario = experimental_variogram(prep.samples.locations, column, column,
                                                  cfg.lag_width, cfg.n_lags);
        if (f == 0) {
            pooled = vario;
        } else {
            for (std::size_t k = 0; k < pooled.gamma.size(); ++k) {
                // pair counts are identical across factors (same locations)
                pooled.gamma[k] += vario.gamma[k];
            }
        }
    }
    for (auto& g : pooled.gamma) g /= static_cast<double>(p);
    prep.pooled_vario = pooled;

    VariogramModel model =
        cfg.variogram_override ? *cfg.variogram_override : fit_exponential(pooled);
    const double sill = model.total_sill();
    model.nugget /= sill;
    for (auto& s : model.structures) s.sill /= sill;
    prep.factor_model = model;
    clock.finish("variogram");
    return prep;
}

void write_inference_outputs(const PipelineConfig& cfg, const Prepared& prep,
                             RunManifest& manifest) {
    fs::create_directories(cfg.output_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(cfg.output_dir) / name).string();
    };

    {
        std::ofstream out(out_path("local_models.csv"));
        write_local_models_csv(out, prep.models);
    }
    manifest.add_file(out_path("local_models.csv"));

    {
        std::ofstream out(out_path("factors.csv"));
        const int p = prep.samples.attribute_count();
        out << "sample,x,y,z";
        for (int f = 0; f < p; ++f) out << ",factor_" << f + 1;
        for (int f = 0; f < p; ++f) out << ",gaussian_" << f + 1;
        out << "\n";
        for (int i = 0; i < prep.samples.count(); ++i) {
            const auto& loc = prep.samples.locations[static_cast<std::size_t>(i)];
            out << i << "," << format_double(loc[0]) << "," << format_double(loc[1]) << ","
                << format_double(loc[2]);
            const auto& model = prep.models[static_cast<std::size_t>(i)];
            for (int f = 0; f < p; ++f) out << "," << format_double(model.factors(f));
            for (int f = 0; f < p; ++f) out << "," << format_double(model.gaussian(f));
            out << "\n";
        }
    }
    manifest.add_file(out_path("factors.csv"));

    {
        // correlation versus position, for scatter and map plots
        std::ofstream out(out_path("corr_scatter.csv"));
        const int p = prep.samples.attribute_count();
        out << "sample,x,y,z";
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) out << ",corr_" << i + 1 << "_" << j + 1;
        out << "\n";
        for (int i = 0; i < prep.samples.count(); ++i) {
            const auto& loc = prep.samples.locations[static_cast<std::size_t>(i)];
            out << i << "," << format_double(loc[0]) << "," << format_double(loc[1]) << ","
                << format_double(loc[2]);
            const auto& c = prep.models[static_cast<std::size_t>(i)].corr.entries();
            for (int a = 0; a < p; ++a)
                for (int b = a + 1; b < p; ++b) out << "," << format_double(c(a, b));
            out << "\n";
        }
    }
    manifest.add_file(out_path("corr_scatter.csv"));

    {
        std::ofstream out(out_path("variogram_factors.csv"));
        write_variogram_csv(out, prep.pooled_vario);
    }
    manifest.add_file(out_path("variogram_factors.csv"));

    {
        std::ofstream out(out_path("variogram_model.txt"));
        out << describe(prep.factor_model);
        out << "factor variances before standardization:";
        for (double v : prep.factor_variances) out << " " << format_double(v);
        out << "\n";
    }
    manifest.add_file(out_path("variogram_model.txt"));
}

}  // namespace

PipelineResult run_inference(const PipelineConfig& cfg) {
    cfg.validate();
    PipelineResult result;
    result.manifest.tool_version = kToolVersion;
    result.manifest.master_seed = cfg.seed;
    result.manifest.config_hash = fnv1a(cfg.canonical());
    StageClock clock(result.manifest);

    Prepared prep = prepare(cfg, clock);
    write_inference_outputs(cfg, prep, result.manifest);
    clock.finish("write_outputs");

    result.models = std::move(prep.models);
    result.factor_model = prep.factor_model;
    result.factor_variances = prep.factor_variances;
    result.manifest.write((fs::path(cfg.output_dir) / "manifest.json").string());
    return result;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    PipelineResult result;
    result.manifest.tool_version = kToolVersion;
    result.manifest.master_seed = cfg.seed;
    result.manifest.config_hash = fnv1a(cfg.canonical());
    StageClock clock(result.manifest);

    Prepared prep = prepare(cfg, clock);
    const int p = prep.samples.attribute_count();
    const int n_out = cfg.alr ? p + 1 : p;
    std::vector<std::string> out_names = cfg.alr ? prep.raw_samples.variable_names
                                                 : prep.samples.variable_names;

    // Target point sets: grid nodes plus optional held-out test points.
    const auto nodes = cfg.grid.nodes();
    const int n_nodes = static_cast<int>(nodes.size());
    std::vector<Point3> test_points;
    if (!cfg.test_points_path.empty()) {
        const SampleSet test_set = read_samples(cfg.test_points_path);
        test_points = test_set.locations;
    }
    const int n_test = static_cast<int>(test_points.size());

    // Correlation field at every target.
    std::vector<Point3> targets(nodes);
    targets.insert(targets.end(), test_points.begin(), test_points.end());
    const CorrelationField full_field =
        interpolate_correlation_field(prep.models, *prep.index, targets,
                                      prep.factor_model, cfg.search, cfg.solver, cfg.threads);
    clock.finish("correlation_field");

    result.field.matrices.assign(full_field.matrices.begin(),
                                 full_field.matrices.begin() + n_nodes);
    result.field.residuals.assign(full_field.residuals.begin(),
                                  full_field.residuals.begin() + n_nodes);
    result.field.flags.assign(full_field.flags.begin(), full_field.flags.begin() + n_nodes);
    result.masked.resize(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i)
        result.masked[static_cast<std::size_t>(i)] =
            full_field.flags[static_cast<std::size_t>(i)] == NodeFlag::unestimated ? 1 : 0;

    // Cholesky factors of the interpolated correlations.
    std::vector<Eigen::MatrixXd> chol(targets.size());
    parallel_for(static_cast<int>(targets.size()), cfg.threads, [&](int t) {
        const auto st = static_cast<std::size_t>(t);
        if (full_field.flags[st] == NodeFlag::unestimated) return;
        chol[st] = cholesky(full_field.matrices[st]);
    });

    // Back-transform tables per target and variable from the nearest samples.
    const int k_bt = cfg.back_transform_neighbors > 0
                         ? std::min(cfg.back_transform_neighbors, prep.samples.count())
                         : std::min(cfg.neighbors, prep.samples.count());
    std::vector<std::vector<AnamorphosisTable>> tables(targets.size());
    parallel_for(static_cast<int>(targets.size()), cfg.threads, [&](int t) {
        const auto st = static_cast<std::size_t>(t);
        if (full_field.flags[st] == NodeFlag::unestimated) return;
        const auto knn = prep.index->knn(targets[st], k_bt);
        std::vector<double> column(knn.neighbors.size());
        tables[st].reserve(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) {
            for (std::size_t i = 0; i < knn.neighbors.size(); ++i)
                column[i] = prep.samples.values(knn.neighbors[i].id, j);
            tables[st].push_back(build_anamorphosis(
                column, cfg.seed + 0x746200ULL + static_cast<std::uint64_t>(j)));
        }
    });
    clock.finish("node_models");

    // Conditioning plans, shared by all factors and realizations.
    const ConditioningPlan plan = build_conditioning_plan(
        prep.factor_model, targets, *prep.index, cfg.search, cfg.threads);
    clock.finish("conditioning_plans");

    // Simulation points: targets followed by the sample locations.
    std::vector<Point3> sim_points(targets);
    sim_points.insert(sim_points.end(), prep.samples.locations.begin(),
                      prep.samples.locations.end());
    const std::size_t data_offset = targets.size();

    fs::create_directories(cfg.output_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(cfg.output_dir) / name).string();
    };

    result.test_points = test_points;
    result.test_realizations.assign(static_cast<std::size_t>(n_out),
                                    Eigen::MatrixXd::Zero(n_test, cfg.n_realizations));
    Eigen::MatrixXd mean_acc = Eigen::MatrixXd::Zero(n_nodes, n_out);

    std::vector<std::string> realization_files;
    Eigen::MatrixXd factor_fields(static_cast<Eigen::Index>(targets.size()), p);
    for (int r = 0; r < cfg.n_realizations; ++r) {
        for (int f = 0; f < p; ++f) {
            const auto field = turning_bands(
                prep.factor_model, sim_points, cfg.n_lines,
                StreamKey{cfg.seed, static_cast<std::uint64_t>(r),
                          static_cast<std::uint64_t>(f)},
                cfg.threads);
            std::vector<double> uncond_targets(field.begin(),
                                               field.begin() + static_cast<long>(data_offset));
            std::vector<double> uncond_at_data(field.begin() + static_cast<long>(data_offset),
                                               field.end());
            std::vector<double> data_values(static_cast<std::size_t>(prep.samples.count()));
            for (int i = 0; i < prep.samples.count(); ++i)
                data_values[static_cast<std::size_t>(i)] = prep.factors(i, f);
            const auto conditioned =
                apply_conditioning(uncond_targets, plan, data_values, uncond_at_data);
            for (std::size_t t = 0; t < targets.size(); ++t)
                factor_fields(static_cast<Eigen::Index>(t), f) = conditioned[t];
        }

        // Recorrelate and back-transform every covered target.
        Eigen::MatrixXd raw_values(static_cast<Eigen::Index>(targets.size()), n_out);
        parallel_for(static_cast<int>(targets.size()), cfg.threads, [&](int t) {
            const auto st = static_cast<std::size_t>(t);
            if (full_field.flags[st] == NodeFlag::unestimated) {
                for (int j = 0; j < n_out; ++j) raw_values(t, j) = cfg.nodata;
                return;
            }
            const Eigen::VectorXd factors_at = factor_fields.row(t).transpose();
            const Eigen::VectorXd gaussian = chol[st] * factors_at;
            if (cfg.alr) {
                std::vector<double> alr_values(static_cast<std::size_t>(p));
                for (int j = 0; j < p; ++j)
                    alr_values[static_cast<std::size_t>(j)] =
                        back_transform(tables[st][static_cast<std::size_t>(j)], gaussian(j));
                const Composition parts = alr_inverse(alr_values, cfg.closure);
                for (int j = 0; j < n_out; ++j)
                    raw_values(t, j) = parts.parts[static_cast<std::size_t>(j)];
            } else {
                for (int j = 0; j < p; ++j)
                    raw_values(t, j) =
                        back_transform(tables[st][static_cast<std::size_t>(j)], gaussian(j));
            }
        });

        mean_acc += raw_values.topRows(n_nodes);
        for (int t = 0; t < n_test; ++t)
            for (int j = 0; j < n_out; ++j)
                result.test_realizations[static_cast<std::size_t>(j)](t, r) =
                    raw_values(n_nodes + t, j);

        if (cfg.write_realizations) {
            char name[64];
            std::snprintf(name, sizeof(name), "realization_%04d.gslib", r + 1);
            std::ostringstream title;
            title << "simulation " << r + 1 << " of " << cfg.n_realizations << " on "
                  << cfg.grid.counts[0] << "x" << cfg.grid.counts[1] << "x"
                  << cfg.grid.counts[2] << " grid, seed " << cfg.seed;
            write_gslib_grid(out_path(name), title.str(), out_names,
                             raw_values.topRows(n_nodes));
            realization_files.push_back(out_path(name));
        }
    }
    clock.finish("simulation");

    // Mean of realizations; masked nodes keep the sentinel.
    result.mean = mean_acc / static_cast<double>(cfg.n_realizations);
    for (int i = 0; i < n_nodes; ++i)
        if (result.masked[static_cast<std::size_t>(i)])
            for (int j = 0; j < n_out; ++j) result.mean(i, j) = cfg.nodata;
    if (n_test > 0) {
        result.test_mean.resize(n_test, n_out);
        for (int j = 0; j < n_out; ++j)
            result.test_mean.col(j) =
                result.test_realizations[static_cast<std::size_t>(j)].rowwise().mean();
    }

    // Outputs.
    write_inference_outputs(cfg, prep, result.manifest);
    for (const auto& file : realization_files) result.manifest.add_file(file);

    write_gslib_grid(out_path("mean.gslib"), "mean of simulations", out_names, result.mean);
    result.manifest.add_file(out_path("mean.gslib"));

    {
        std::ofstream out(out_path("correlation_field.csv"));
        write_correlation_field_csv(out, result.field);
    }
    result.manifest.add_file(out_path("correlation_field.csv"));

    if (n_test > 0) {
        for (int j = 0; j < n_out; ++j) {
            char name[64];
            std::snprintf(name, sizeof(name), "test_realizations_%s.csv",
                          out_names[static_cast<std::size_t>(j)].c_str());
            std::ofstream out(out_path(name));
            out << "x,y,z";
            for (int r = 0; r < cfg.n_realizations; ++r) out << ",r" << r + 1;
            out << "\n";
            for (int t = 0; t < n_test; ++t) {
                const auto& loc = test_points[static_cast<std::size_t>(t)];
                out << format_double(loc[0]) << "," << format_double(loc[1]) << ","
                    << format_double(loc[2]);
                for (int r = 0; r < cfg.n_realizations; ++r)
                    out << ","
                        << format_double(
                               result.test_realizations[static_cast<std::size_t>(j)](t, r));
                out << "\n";
            }
            result.manifest.add_file(out_path(name));
        }
    }

    {
        std::ofstream out(out_path("report.txt"));
        out << "samples: " << prep.samples.count() << "\n";
        out << "mode: " << cfg.mode << "\n";
        out << "grid nodes: " << n_nodes << "\n";
        out << "test points: " << n_test << "\n";
        out << "realizations: " << cfg.n_realizations << "\n";
        out << "masked nodes (no data in reach): " << result.field.count(NodeFlag::unestimated)
            << "\n";
        out << "fallback nodes (mean solver at cap): " << result.field.count(NodeFlag::fallback)
            << "\n";
        out << "factor model:\n" << describe(prep.factor_model);
        out << "factor variances before standardization:";
        for (double v : prep.factor_variances) out << " " << format_double(v);
        out << "\n";
    }
    result.manifest.add_file(out_path("report.txt"));
    clock.finish("write_outputs");

    result.models = std::move(prep.models);
    result.factor_model = prep.factor_model;
    result.factor_variances = prep.factor_variances;
    result.manifest.write(out_path("manifest.json"));
    return result;
}

ValidationSummary run_validation(const std::string& truth_path,
                                 const std::string& simulated_dir,
                                 const std::string& out_dir,
                                 const std::vector<std::string>& variables) {
    const SampleSet truth = read_samples(truth_path);
    ValidationSummary summary;
    summary.variables = variables.empty() ? truth.variable_names : variables;
    summary.manifest.tool_version = kToolVersion;

    fs::create_directories(out_dir);
    const auto path = [&](const std::string& name) {
        return (fs::path(out_dir) / name).string();
    };
    std::ofstream metrics_out(path("metrics.csv"));
    metrics_out << "variable,me,mae,rmse\n";
    std::ofstream accuracy_out(path("accuracy.csv"));
    accuracy_out << "variable,nominal,observed\n";
    std::ofstream report(path("validation_report.txt"));

    for (const auto& var : summary.variables) {
        int col = -1;
        for (int c = 0; c < truth.attribute_count(); ++c)
            if (truth.variable_names[static_cast<std::size_t>(c)] == var) col = c;
        if (col < 0)
            throw ConfigError("validate: variable '" + var + "' not in " + truth_path);

        const std::string real_path =
            (fs::path(simulated_dir) / ("test_realizations_" + var + ".csv")).string();
        std::ifstream in(real_path);
        if (!in)
            throw ConfigError("validate: cannot open " + real_path +
                              " (was the pipeline run with test_points?)");
        std::string line;
        std::getline(in, line);  // header
        std::vector<std::vector<double>> rows;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            rows.push_back(std::move(row));
        }
        if (rows.size() != static_cast<std::size_t>(truth.count()))
            throw ConfigError("validate: row count mismatch between " + real_path + " and " +
                              truth_path);

        const int n_real = static_cast<int>(rows.front().size()) - 3;
        if (n_real < 1) throw ConfigError("validate: no realization columns in " + real_path);
        Eigen::MatrixXd ensemble(truth.count(), n_real);
        std::vector<double> truth_values(static_cast<std::size_t>(truth.count()));
        std::vector<double> predicted(static_cast<std::size_t>(truth.count()));
        for (int i = 0; i < truth.count(); ++i) {
            const auto& row = rows[static_cast<std::size_t>(i)];
            const auto& loc = truth.locations[static_cast<std::size_t>(i)];
            for (std::size_t c = 0; c < 3; ++c)
                if (std::abs(row[c] - loc[c]) > 1e-6)
                    throw ConfigError("validate: location mismatch at row " +
                                      std::to_string(i) +
                                      " (test points and truth must be in the same order)");
            double acc = 0.0;
            for (int r = 0; r < n_real; ++r) {
                ensemble(i, r) = row[static_cast<std::size_t>(r) + 3];
                acc += ensemble(i, r);
            }
            predicted[static_cast<std::size_t>(i)] = acc / n_real;
            truth_values[static_cast<std::size_t>(i)] = truth.values(i, col);
        }

        const ErrorMetrics m = error_metrics(predicted, truth_values);
        summary.metrics.push_back(m);
        metrics_out << var << "," << format_double(m.me) << "," << format_double(m.mae)
                    << "," << format_double(m.rmse) << "\n";
        report << var << ": ME " << format_double(m.me) << "  MAE " << format_double(m.mae)
               << "  RMSE " << format_double(m.rmse) << "\n";

        if (n_real >= 20) {
            const auto pairs = accuracy_plot_data(ensemble, truth_values);
            summary.accuracy.push_back(pairs);
            for (const auto& [nominal, observed] : pairs)
                accuracy_out << var << "," << format_double(nominal) << ","
                             << format_double(observed) << "\n";
        } else {
            summary.accuracy.push_back({});
            report << var << ": fewer than 20 realizations, accuracy plot skipped\n";
        }
    }

    metrics_out.close();
    accuracy_out.close();
    report.close();
    summary.manifest.add_file(path("metrics.csv"));
    summary.manifest.add_file(path("accuracy.csv"));
    summary.manifest.add_file(path("validation_report.txt"));
    summary.manifest.write(path("manifest.json"));
    return summary;
}

}  // namespace lvlmc
