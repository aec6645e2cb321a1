#pragma once

#include <optional>
#include <string>

#include "lvlmc/grid.hpp"
#include "lvlmc/manifest.hpp"
#include "lvlmc/simulate.hpp"
#include "lvlmc/synthetic.hpp"
#include "lvlmc/transform.hpp"

namespace lvlmc {

inline constexpr const char* kToolVersion = "0.1.0";

/// Full run description; loadable from a JSON file. All randomness flows
/// from `seed`.
struct PipelineConfig {
    std::string samples_path;
    std::string output_dir = "out";
    std::string mode = "lvlmc";             // "lvlmc" or "lmc" (one global neighborhood)
    int neighbors = 300;
    int back_transform_neighbors = 0;       // 0: same as neighbors
    Grid grid;
    bool alr = false;
    double closure = 100.0;
    double lag_width = 5.0;
    int n_lags = 20;
    std::optional<VariogramModel> variogram_override;
    SearchParams search;
    int n_realizations = 1;
    int n_lines = 1200;
    std::uint64_t seed = 0;
    SolverConfig solver{1e-6, 0.1, 200, 500};
    int threads = 1;
    double nodata = -999.0;
    std::string test_points_path;           // optional held-out locations CSV
    bool write_realizations = true;

    void validate() const;
    static PipelineConfig from_json_file(const std::string& path);
    /// Canonical serialized form used for the manifest's config hash.
    std::string canonical() const;
};

/// In-memory products of a run; files land in cfg.output_dir as a side
/// effect.
struct PipelineResult {
    std::vector<LocalModel> models;
    VariogramModel factor_model;             // unit total sill
    std::vector<double> factor_variances;    // pre-standardization, per factor
    CorrelationField field;                  // at grid nodes
    std::vector<std::uint8_t> masked;        // per node: no data within reach
    Eigen::MatrixXd mean;                    // nodes x output vars, raw units

    std::vector<Point3> test_points;
    std::vector<Eigen::MatrixXd> test_realizations;  // per output var: points x reals
    Eigen::MatrixXd test_mean;                       // points x output vars

    RunManifest manifest;
};

/// Steps one through ten: optional log ratios, local models, the single
/// factor variogram, turning-bands simulation conditioned on the factors,
/// Fréchet interpolation of the correlation field, recorrelation, local
/// back-transformation, optional inverse log ratios, file emission.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// The inference stages only (steps one through six); writes the local
/// model table, factor values and correlation scatter data.
PipelineResult run_inference(const PipelineConfig& cfg);

/// GSLIB grid file: title, variable count and names, node rows x-fastest.
void write_gslib_grid(const std::string& path, const std::string& title,
                      const std::vector<std::string>& names, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_gslib_grid(const std::string& path, std::vector<std::string>* names);

struct ValidationSummary {
    std::vector<std::string> variables;
    std::vector<ErrorMetrics> metrics;                         // per variable, on the e-type
    std::vector<std::vector<std::pair<double, double>>> accuracy;  // per variable
    RunManifest manifest;
};

/// Compares per-variable realization tables (test_realizations_<var>.csv in
/// simulated_dir, as the pipeline emits for its test points) against true
/// values; writes metrics.csv, accuracy.csv and a text report to out_dir.
/// Rows must be in the truth file's order; locations are cross-checked.
ValidationSummary run_validation(const std::string& truth_path,
                                 const std::string& simulated_dir,
                                 const std::string& out_dir,
                                 const std::vector<std::string>& variables = {});

}  // namespace lvlmc
