#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "lvlmc/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("LVLMC_LOG");
    if (!env) return LogLevel::info;
    const std::string v(env);
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::fprintf(stderr, "[lvlmc] %s\n", msg.c_str());
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "override the master seed");
    cmd->add_option("--threads", flags.threads, "worker thread count");
    cmd->add_option("--out", flags.out, "override the output directory");
}

lvlmc::PipelineConfig load_pipeline_config(const CommonFlags& flags) {
    auto cfg = lvlmc::PipelineConfig::from_json_file(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.threads) cfg.threads = *flags.threads;
    if (flags.out) cfg.output_dir = *flags.out;
    cfg.validate();
    return cfg;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lvlmc::ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        throw lvlmc::ConfigError(path + ": " + err.what());
    }
}

int cmd_infer(const CommonFlags& flags) {
    const auto cfg = load_pipeline_config(flags);
    log_info("inferring local models from " + cfg.samples_path);
    const auto result = lvlmc::run_inference(cfg);
    log_info("local models: " + std::to_string(result.models.size()) + ", outputs in " +
             cfg.output_dir);
    return 0;
}

int cmd_simulate(const CommonFlags& flags) {
    const auto cfg = load_pipeline_config(flags);
    log_info("running the simulation pipeline from " + cfg.samples_path);
    const auto result = lvlmc::run_pipeline(cfg);
    log_info("realizations: " + std::to_string(cfg.n_realizations) + ", masked nodes: " +
             std::to_string(result.field.count(lvlmc::NodeFlag::unestimated)) +
             ", outputs in " + cfg.output_dir);
    return 0;
}

lvlmc::SyntheticConfig parse_synth_config(const json& j) {
    lvlmc::SyntheticConfig cfg;
    if (j.contains("extent"))
        for (int c = 0; c < 3; ++c) cfg.extent[static_cast<std::size_t>(c)] = j["extent"][static_cast<std::size_t>(c)];
    if (j.contains("spacing"))
        for (int c = 0; c < 3; ++c) cfg.spacing[static_cast<std::size_t>(c)] = j["spacing"][static_cast<std::size_t>(c)];
    cfg.range = j.value("range", 50.0);
    cfg.rho_west = j.value("rho_west", 0.9);
    cfg.rho_east = j.value("rho_east", -0.9);
    cfg.mu1_base = j.value("mu1_base", 0.2);
    cfg.mu1_peak = j.value("mu1_peak", 1.0);
    cfg.mu2_base = j.value("mu2_base", 0.1);
    cfg.mu2_slope = j.value("mu2_slope", 1.0);
    cfg.sigma = j.value("sigma", 0.5);
    cfg.drill_spacing = j.value("drill_spacing", 25.0);
    cfg.dip_max_deg = j.value("dip_max_deg", 30.0);
    cfg.seed = j.value("seed", 0ULL);
    cfg.n_lines = j.value("turning_bands_lines", 1200);
    cfg.threads = j.value("threads", 1);
    cfg.validate();
    return cfg;
}

int cmd_synth(const CommonFlags& flags) {
    const json j = parse_json_file(flags.config_path);
    auto cfg = parse_synth_config(j);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.threads) cfg.threads = *flags.threads;
    std::string out_dir = j.value("output_dir", "synth_out");
    if (flags.out) out_dir = *flags.out;
    fs::create_directories(out_dir);

    log_info("generating the synthetic deposit");
    const auto truth = lvlmc::generate_synthetic(cfg);
    const auto holes = lvlmc::drillhole_sample(truth, cfg);

    lvlmc::RunManifest manifest;
    manifest.tool_version = lvlmc::kToolVersion;
    manifest.master_seed = cfg.seed;
    {
        std::ifstream in(flags.config_path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        manifest.config_hash = lvlmc::fnv1a(buf.str());
    }

    const auto path = [&](const std::string& name) {
        return (fs::path(out_dir) / name).string();
    };

    const int n = truth.grid.size();
    Eigen::MatrixXd columns(n, 7);
    columns.col(0) = truth.factors.col(0);
    columns.col(1) = truth.factors.col(1);
    columns.col(2) = truth.gaussian.col(0);
    columns.col(3) = truth.gaussian.col(1);
    columns.col(4) = truth.raw.col(0);
    columns.col(5) = truth.raw.col(1);
    for (int i = 0; i < n; ++i) columns(i, 6) = truth.rho[static_cast<std::size_t>(i)];
    std::ostringstream title;
    title << "synthetic truth on " << truth.grid.counts[0] << "x" << truth.grid.counts[1]
          << "x" << truth.grid.counts[2] << " grid, seed " << cfg.seed;
    lvlmc::write_gslib_grid(path("truth.gslib"), title.str(),
                            {"factor_1", "factor_2", "gaussian_1", "gaussian_2", "z1", "z2",
                             "rho_1_2"},
                            columns);
    manifest.add_file(path("truth.gslib"));

    lvlmc::write_samples_csv(path("samples.csv"), holes.samples);
    manifest.add_file(path("samples.csv"));

    {
        std::ofstream out(path("sample_nodes.csv"));
        out << "sample,node,imposed_rho\n";
        for (std::size_t s = 0; s < holes.node_of.size(); ++s)
            out << s << "," << holes.node_of[s] << ","
                << format_double(truth.rho[static_cast<std::size_t>(holes.node_of[s])]) << "\n";
    }
    manifest.add_file(path("sample_nodes.csv"));

    manifest.write(path("manifest.json"));
    log_info("synthetic samples: " + std::to_string(holes.samples.count()) + ", outputs in " +
             out_dir);
    return 0;
}

int cmd_validate(const CommonFlags& flags) {
    const json j = parse_json_file(flags.config_path);
    const std::string truth_path = j.at("truth");
    const std::string simulated_dir = j.at("simulated_dir");
    std::string out_dir = j.value("output_dir", "validate_out");
    if (flags.out) out_dir = *flags.out;

    std::vector<std::string> variables;
    if (j.contains("variables"))
        for (const auto& v : j["variables"]) variables.push_back(v);

    lvlmc::run_validation(truth_path, simulated_dir, out_dir, variables);
    log_info("validation written to " + out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"locally varying coregionalization simulation toolkit"};
    app.require_subcommand(1);

    CommonFlags infer_flags, simulate_flags, synth_flags, validate_flags;
    add_common(app.add_subcommand("infer", "local Gaussianization and correlation inference"),
               infer_flags);
    add_common(app.add_subcommand("simulate", "full conditional simulation pipeline"),
               simulate_flags);
    add_common(app.add_subcommand("synth", "generate the synthetic deposit and drillholes"),
               synth_flags);
    add_common(app.add_subcommand("validate", "error metrics and accuracy plot data"),
               validate_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("infer")) return cmd_infer(infer_flags);
        if (app.got_subcommand("simulate")) return cmd_simulate(simulate_flags);
        if (app.got_subcommand("synth")) return cmd_synth(synth_flags);
        if (app.got_subcommand("validate")) return cmd_validate(validate_flags);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 1;
}
