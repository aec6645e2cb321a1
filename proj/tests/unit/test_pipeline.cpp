#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lvlmc/pipeline.hpp"
#include "lvlmc/rng.hpp"

using namespace lvlmc;
namespace fs = std::filesystem;

namespace {

// correlated bivariate lognormal samples scattered over a 100 x 100 x 10 box
std::string make_samples(const fs::path& dir) {
    Rng rng(9200);
    const auto path = dir / "samples.csv";
    std::ofstream out(path);
    out << "x,y,z,v1,v2\n";
    for (int i = 0; i < 400; ++i) {
        const double y1 = rng.normal();
        const double y2 = 0.6 * y1 + 0.8 * rng.normal();
        out << rng.uniform(0.0, 100.0) << "," << rng.uniform(0.0, 100.0) << ","
            << rng.uniform(0.0, 10.0) << "," << std::exp(y1) << "," << std::exp(0.5 * y2)
            << "\n";
    }
    return path.string();
}

PipelineConfig small_config(const fs::path& dir) {
    PipelineConfig cfg;
    cfg.samples_path = make_samples(dir);
    cfg.output_dir = (dir / "out").string();
    cfg.neighbors = 120;
    cfg.grid.origin = {0.0, 0.0, 0.0};
    cfg.grid.spacing = {25.0, 25.0, 5.0};
    // the top two z-slabs sit 190+ meters above the data: masked
    cfg.grid.counts = {5, 5, 42};
    cfg.lag_width = 8.0;
    cfg.n_lags = 10;
    cfg.search.radius = 50.0;
    cfg.search.max_samples = 12;
    cfg.n_realizations = 1;
    cfg.n_lines = 300;
    cfg.seed = 12;
    cfg.threads = 2;
    return cfg;
}

}  // namespace

TEST_CASE("pipeline end to end: outputs, masking, manifest digests") {
    const auto dir = fs::temp_directory_path() / "lvlmc_pipeline_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto cfg = small_config(dir);
    const auto result = run_pipeline(cfg);

    // exactly one realization file for one realization
    CHECK(fs::exists(fs::path(cfg.output_dir) / "realization_0001.gslib"));
    CHECK_FALSE(fs::exists(fs::path(cfg.output_dir) / "realization_0002.gslib"));

    // nodes far from any data carry the sentinel in every variable
    REQUIRE(result.mean.rows() == cfg.grid.size());
    int masked = 0;
    for (int i = 0; i < cfg.grid.size(); ++i) {
        if (!result.masked[static_cast<std::size_t>(i)]) continue;
        ++masked;
        CHECK(result.mean(i, 0) == cfg.nodata);
        CHECK(result.mean(i, 1) == cfg.nodata);
    }
    CHECK(masked > 0);
    CHECK(masked < cfg.grid.size());

    // realization file agrees with the mean for a single realization
    const auto real = read_gslib_grid(
        (fs::path(cfg.output_dir) / "realization_0001.gslib").string(), nullptr);
    CHECK((real - result.mean).norm() == 0.0);

    // manifest digests verify against the emitted files
    REQUIRE_FALSE(result.manifest.files.empty());
    for (const auto& [path, digest] : result.manifest.files)
        CHECK(digest_file(path) == digest);

    // estimated nodes carry a valid correlation everywhere
    for (int i = 0; i < cfg.grid.size(); ++i) {
        if (result.masked[static_cast<std::size_t>(i)]) continue;
        const auto& c = result.field.matrices[static_cast<std::size_t>(i)].entries();
        CHECK(c(0, 0) == 1.0);
        CHECK(std::abs(c(0, 1)) < 1.0);
    }
}

TEST_CASE("pipeline determinism across thread counts in process") {
    const auto dir = fs::temp_directory_path() / "lvlmc_pipeline_threads";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto cfg = small_config(dir);
    cfg.grid.counts = {5, 5, 2};
    cfg.n_realizations = 2;

    cfg.output_dir = (dir / "a").string();
    cfg.threads = 1;
    const auto a = run_pipeline(cfg);
    cfg.output_dir = (dir / "b").string();
    cfg.threads = 4;
    const auto b = run_pipeline(cfg);
    CHECK((a.mean - b.mean).norm() == 0.0);
}

TEST_CASE("alr pipeline emits closed compositions") {
    const auto dir = fs::temp_directory_path() / "lvlmc_pipeline_alr";
    fs::remove_all(dir);
    fs::create_directories(dir);

    // compositional samples: three parts closing to 100
    Rng rng(9300);
    const auto samples_path = dir / "parts.csv";
    {
        std::ofstream out(samples_path);
        out.precision(17);
        out << "x,y,z,a,b,rest\n";
        for (int i = 0; i < 300; ++i) {
            double a = std::exp(rng.normal());
            double b = std::exp(0.5 * rng.normal() + 0.5);
            double rest = 4.0 + std::exp(rng.normal());
            const double total = a + b + rest;
            a *= 100.0 / total;
            b *= 100.0 / total;
            rest = 100.0 - a - b;
            out << rng.uniform(0.0, 80.0) << "," << rng.uniform(0.0, 80.0) << ","
                << rng.uniform(0.0, 8.0) << "," << a << "," << b << "," << rest << "\n";
        }
    }

    PipelineConfig cfg;
    cfg.samples_path = samples_path.string();
    cfg.output_dir = (dir / "out").string();
    cfg.neighbors = 100;
    cfg.grid.spacing = {20.0, 20.0, 4.0};
    cfg.grid.counts = {5, 5, 3};
    cfg.alr = true;
    cfg.closure = 100.0;
    cfg.lag_width = 8.0;
    cfg.n_lags = 9;
    cfg.search.radius = 50.0;
    cfg.search.max_samples = 10;
    cfg.n_realizations = 2;
    cfg.n_lines = 300;
    cfg.seed = 44;
    cfg.threads = 2;
    const auto result = run_pipeline(cfg);

    REQUIRE(result.mean.cols() == 3);  // two parts plus rest, back in raw space
    const auto real = read_gslib_grid(
        (fs::path(cfg.output_dir) / "realization_0001.gslib").string(), nullptr);
    for (int i = 0; i < real.rows(); ++i) {
        if (real(i, 0) == cfg.nodata) continue;
        CHECK(real.row(i).sum() == doctest::Approx(100.0).epsilon(1e-9));
        for (int j = 0; j < 3; ++j) CHECK(real(i, j) > 0.0);
    }
}

TEST_CASE("validation with predicted equal to truth reports zero error") {
    const auto dir = fs::temp_directory_path() / "lvlmc_validate_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "sim");

    Rng rng(9400);
    SampleSet truth;
    truth.variable_names = {"v"};
    truth.values.resize(30, 1);
    for (int i = 0; i < 30; ++i) {
        truth.locations.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0), 0.0});
        truth.values(i, 0) = rng.normal();
    }
    write_samples_csv((dir / "truth.csv").string(), truth);

    // realization table whose every column equals the true value
    {
        std::ofstream out(dir / "sim" / "test_realizations_v.csv");
        out.precision(17);
        out << "x,y,z";
        for (int r = 0; r < 25; ++r) out << ",r" << r + 1;
        out << "\n";
        for (int i = 0; i < 30; ++i) {
            const auto& loc = truth.locations[static_cast<std::size_t>(i)];
            out << loc[0] << "," << loc[1] << "," << loc[2];
            for (int r = 0; r < 25; ++r) out << "," << truth.values(i, 0);
            out << "\n";
        }
    }

    const auto summary = run_validation((dir / "truth.csv").string(), (dir / "sim").string(),
                                        (dir / "out").string());
    REQUIRE(summary.metrics.size() == 1);
    CHECK(std::abs(summary.metrics[0].me) < 1e-14);
    CHECK(summary.metrics[0].mae < 1e-14);
    CHECK(summary.metrics[0].rmse < 1e-14);
    // truth sits exactly on the degenerate intervals
    for (const auto& [nominal, observed] : summary.accuracy[0]) {
        (void)nominal;
        CHECK(observed == 1.0);
    }
    CHECK(fs::exists(dir / "out" / "metrics.csv"));

    // unknown variable is rejected
    CHECK_THROWS_AS(run_validation((dir / "truth.csv").string(), (dir / "sim").string(),
                                   (dir / "out2").string(), {"w"}),
                    ConfigError);
}

TEST_CASE("config json parsing and validation errors") {
    const auto dir = fs::temp_directory_path() / "lvlmc_pipeline_cfg";
    fs::create_directories(dir);
    const auto path = dir / "bad.json";
    {
        std::ofstream out(path);
        out << "{\"samples\": \"x.csv\", \"grid\": {\"counts\": [0, 1, 1]}}";
    }
    CHECK_THROWS_AS(PipelineConfig::from_json_file(path.string()), InvariantError);

    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(PipelineConfig::from_json_file(path.string()), ConfigError);

    PipelineConfig cfg;
    cfg.samples_path = "missing_samples_file.csv";
    CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("missing_samples_file.csv"),
                         ConfigError);
}
