#pragma once

#include <cstdint>
#include <vector>

#include "lvlmc/grid.hpp"
#include "lvlmc/kriging.hpp"
#include "lvlmc/local_model.hpp"
#include "lvlmc/manifold.hpp"
#include "lvlmc/variogram.hpp"

namespace lvlmc {

/// Identifies one independent random stream. Every draw is a pure function
/// of (seed, realization, factor), so any work scheduling produces the same
/// fields.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t realization = 0;
    std::uint64_t factor = 0;
};

/// Unconditional zero-mean unit-variance Gaussian field with the model
/// covariance, evaluated at arbitrary points by the turning bands method
/// (spectral one-dimensional processes on a rotated Fibonacci line fan).
/// Supports a single exponential structure plus nugget.
std::vector<double> turning_bands(const VariogramModel& model,
                                  const std::vector<Point3>& points, int n_lines,
                                  const StreamKey& key, int threads = 1);

/// Grid convenience wrapper.
std::vector<double> turning_bands(const VariogramModel& model, const Grid& grid,
                                  int n_lines, std::uint64_t seed, int threads = 1);

/// Per-target conditioning plan: neighbor sample ids and ordinary kriging
/// weights, reusable across realizations and factors. Targets with no data
/// within reach keep an empty plan.
struct ConditioningPlan {
    std::vector<std::vector<int>> neighbor_ids;
    std::vector<Eigen::VectorXd> weights;

    bool covered(std::size_t target) const { return !neighbor_ids[target].empty(); }
};

ConditioningPlan build_conditioning_plan(const VariogramModel& model,
                                         const std::vector<Point3>& targets,
                                         const SpatialIndex& data_index,
                                         const SearchParams& search, int threads = 1);

/// Residual conditioning: conditioned = unconditional + sum of weights times
/// (data - unconditional at data). Exact at covered data locations.
std::vector<double> apply_conditioning(const std::vector<double>& unconditional,
                                       const ConditioningPlan& plan,
                                       const std::vector<double>& data_values,
                                       const std::vector<double>& unconditional_at_data);

/// One-shot variant matching the stage contract.
std::vector<double> condition(const std::vector<double>& unconditional,
                              const std::vector<Point3>& targets,
                              const SpatialIndex& data_index,
                              const std::vector<double>& data_values,
                              const std::vector<double>& unconditional_at_data,
                              const VariogramModel& model, const SearchParams& search,
                              int threads = 1);

enum class NodeFlag : std::uint8_t {
    ok = 0,
    unestimated = 1,   // no samples within the search radius
    fallback = 2,      // solver hit the iteration cap; last iterate kept
};

struct CorrelationField {
    std::vector<CorrMatrix> matrices;
    std::vector<double> residuals;
    std::vector<NodeFlag> flags;

    std::size_t size() const { return matrices.size(); }
    int count(NodeFlag flag) const;
};

/// Correlation matrices interpolated onto `points` by the weighted Fréchet
/// mean with ordinary kriging weights, warm-started from the nearest
/// sample's local correlation. `sample_index` holds the sample locations the
/// models were inferred at, in model order.
CorrelationField interpolate_correlation_field(const std::vector<LocalModel>& models,
                                               const SpatialIndex& sample_index,
                                               const std::vector<Point3>& points,
                                               const VariogramModel& model,
                                               const SearchParams& search,
                                               const SolverConfig& solver,
                                               int threads = 1);

void write_correlation_field_csv(std::ostream& out, const CorrelationField& field);

}  // namespace lvlmc
