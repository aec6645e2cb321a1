#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "lvlmc/grid.hpp"
#include "lvlmc/samples.hpp"

namespace lvlmc {

/// Two-variable synthetic deposit: independent unit exponential factors,
/// a step-zero correlation varying linearly with the east coordinate, and a
/// lognormal raw transform z = exp(mu(u) + sigma y).
struct SyntheticConfig {
    Point3 extent{400.0, 400.0, 40.0};
    Point3 spacing{10.0, 10.0, 5.0};
    double range = 50.0;
    double rho_west = 0.9;
    double rho_east = -0.9;
    // mu_1 peaks mid-domain in the east coordinate; mu_2 grows linearly east
    double mu1_base = 0.2;
    double mu1_peak = 1.0;
    double mu2_base = 0.1;
    double mu2_slope = 1.0;
    double sigma = 0.5;
    double drill_spacing = 25.0;
    double dip_max_deg = 30.0;
    std::uint64_t seed = 0;
    int n_lines = 1200;
    int threads = 1;

    void validate() const;
    Grid grid() const;
    double imposed_rho(double east) const;
    double mu(int variable, double east) const;
};

struct SyntheticTruth {
    Grid grid;
    Eigen::MatrixXd factors;    // nodes x 2, the independent fields
    Eigen::MatrixXd gaussian;   // nodes x 2, correlated via the local Cholesky
    Eigen::MatrixXd raw;        // nodes x 2
    std::vector<double> rho;    // imposed step-zero correlation per node
};

SyntheticTruth generate_synthetic(const SyntheticConfig& cfg);

struct DrillholeSamples {
    SampleSet samples;              // raw values at sampled nodes
    std::vector<int> node_of;       // grid node each sample sits on
};

/// Pseudo drillholes: collars on a jittered square grid, uniform azimuth,
/// dip within the configured cone of vertical; traces sample the nearest
/// grid nodes top-down, first visit wins.
DrillholeSamples drillhole_sample(const SyntheticTruth& truth, const SyntheticConfig& cfg);

struct ErrorMetrics {
    double me = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

ErrorMetrics error_metrics(const std::vector<double>& predicted,
                           const std::vector<double>& truth);

/// Accuracy plot: for each nominal probability, the fraction of rows whose
/// truth falls inside the symmetric interval of the row's realization
/// quantiles. `realizations` is rows x realizations (at least 20 columns).
std::vector<std::pair<double, double>> accuracy_plot_data(
    const Eigen::MatrixXd& realizations, const std::vector<double>& truth,
    const std::vector<double>& nominal = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});

}  // namespace lvlmc
