#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lvlmc/manifold.hpp"
#include "lvlmc/neighborhood.hpp"
#include "lvlmc/samples.hpp"

namespace lvlmc {

/// Everything inferred at one sample location: its neighborhood, the local
/// correlation, its Cholesky factor, and the sample's gaussian and factor
/// vectors.
struct LocalModel {
    int sample = -1;
    std::vector<int> neighbors;
    CorrMatrix corr;
    Eigen::MatrixXd chol;        // lower triangular, positive diagonal
    Eigen::VectorXd gaussian;    // y_alpha
    Eigen::VectorXd factors;     // L^{-1} y_alpha

    explicit LocalModel(CorrMatrix c) : corr(std::move(c)) {}
};

/// Lower-triangular Cholesky factor with a strictly positive diagonal.
/// A numerically non-PD input is shrunk 1e-8 toward the identity and
/// retried once before giving up.
Eigen::MatrixXd cholesky(const CorrMatrix& c);

/// Forward substitution L y~ = y.
Eigen::VectorXd decorrelate(const Eigen::VectorXd& y, const Eigen::MatrixXd& chol);

struct LocalInferenceConfig {
    int k = 300;                  // neighborhood cardinality
    std::uint64_t seed = 0;       // despiking seed
    double eigenvalue_floor = 1e-6;
};

/// Local correlation inference at sample `alpha`: gather the k nearest
/// samples, gaussianize every variable with tables built from that
/// neighborhood alone, take the Pearson correlation of the scores, project
/// to an exact correlation matrix (shrinking toward the identity if an
/// eigenvalue sits under the floor), then factor and decorrelate the center
/// sample.
LocalModel infer_local_correlation(const SampleSet& samples, const SpatialIndex& index,
                                   int alpha, const LocalInferenceConfig& cfg);

/// All samples, optionally in parallel. Results are ordered by sample id and
/// identical for any thread count.
std::vector<LocalModel> infer_all_local_models(const SampleSet& samples,
                                               const SpatialIndex& index,
                                               const LocalInferenceConfig& cfg,
                                               int threads = 1);

/// Table dump: sample id, flattened upper triangle of the correlation, the
/// factor vector.
void write_local_models_csv(std::ostream& out, const std::vector<LocalModel>& models);

}  // namespace lvlmc
