#include "lvlmc/kriging.hpp"

#include <cmath>

#include "lvlmc/errors.hpp"

namespace lvlmc {

namespace {

KrigingResult solve_system(const VariogramModel& model, const std::vector<Point3>& pts,
                           const Point3& target) {
    const int k = static_cast<int>(pts.size());
    Eigen::MatrixXd a(k + 1, k + 1);
    Eigen::VectorXd rhs(k + 1);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j)
            a(i, j) = covariance_eval(
                model, std::sqrt(squared_distance(pts[static_cast<std::size_t>(i)],
                                                  pts[static_cast<std::size_t>(j)])));
        a(i, k) = 1.0;
        a(k, i) = 1.0;
        rhs(i) = covariance_eval(
            model, std::sqrt(squared_distance(pts[static_cast<std::size_t>(i)], target)));
    }
    a(k, k) = 0.0;
    rhs(k) = 1.0;

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
        throw Error("ordinary_kriging_weights: singular system after deduplication");
    const Eigen::VectorXd solution = lu.solve(rhs);

    KrigingResult result;
    result.weights = solution.head(k);
    result.lagrange = solution(k);
    double variance = covariance_eval(model, 0.0) - result.weights.dot(rhs.head(k)) -
                      result.lagrange;
    if (variance < -1e-10)
        throw Error("ordinary_kriging_weights: negative kriging variance " +
                    std::to_string(variance));
    result.variance = std::max(0.0, variance);
    return result;
}

}  // namespace

KrigingResult ordinary_kriging_weights(const VariogramModel& model,
                                       const std::vector<Point3>& neighbors,
                                       const Point3& target) {
    model.validate();
    const int k = static_cast<int>(neighbors.size());
    if (k < 1) throw InvariantError("ordinary_kriging_weights: no neighbors");

    // Collapse duplicates (within 1e-9 m) onto their first occurrence.
    std::vector<Point3> unique;
    std::vector<int> unique_of(static_cast<std::size_t>(k));  // input index -> unique index
    for (int i = 0; i < k; ++i) {
        int found = -1;
        for (std::size_t u = 0; u < unique.size(); ++u) {
            if (squared_distance(unique[u], neighbors[static_cast<std::size_t>(i)]) < 1e-18) {
                found = static_cast<int>(u);
                break;
            }
        }
        if (found < 0) {
            found = static_cast<int>(unique.size());
            unique.push_back(neighbors[static_cast<std::size_t>(i)]);
        }
        unique_of[static_cast<std::size_t>(i)] = found;
    }

    const KrigingResult reduced = solve_system(model, unique, target);

    if (static_cast<int>(unique.size()) == k) return reduced;

    KrigingResult expanded;
    expanded.lagrange = reduced.lagrange;
    expanded.variance = reduced.variance;
    expanded.weights = Eigen::VectorXd::Zero(k);
    std::vector<bool> assigned(unique.size(), false);
    for (int i = 0; i < k; ++i) {
        const auto u = static_cast<std::size_t>(unique_of[static_cast<std::size_t>(i)]);
        if (!assigned[u]) {
            expanded.weights(i) = reduced.weights(static_cast<Eigen::Index>(u));
            assigned[u] = true;
        }
    }
    return expanded;
}

}  // namespace lvlmc
