#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lvlmc/neighborhood.hpp"
#include "lvlmc/variogram.hpp"

namespace lvlmc {

struct KrigingResult {
    Eigen::VectorXd weights;     // one per neighbor, sums to 1
    double lagrange = 0.0;
    double variance = 0.0;       // kriging variance, clamped at -1e-10
};

/// Ordinary kriging weights for the target from the neighbor locations,
/// using the covariance form of the (k+1)x(k+1) system. Duplicate neighbor
/// locations (within 1e-9 m) are collapsed onto their first occurrence and
/// get zero weight.
KrigingResult ordinary_kriging_weights(const VariogramModel& model,
                                       const std::vector<Point3>& neighbors,
                                       const Point3& target);

/// Search policy for conditioning and correlation interpolation.
struct SearchParams {
    double radius = 100.0;
    int max_samples = 25;
};

}  // namespace lvlmc
