#include <doctest.h>

#include <cmath>
#include <vector>

#include "lvlmc/kriging.hpp"
#include "lvlmc/rng.hpp"

using namespace lvlmc;

namespace {

/// Independent reference: hand-rolled Gaussian elimination with partial
/// pivoting on the same ordinary kriging system.
std::vector<double> dense_solve_ok(const VariogramModel& model,
                                   const std::vector<Point3>& pts, const Point3& target) {
    const int k = static_cast<int>(pts.size());
    const int n = k + 1;
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j)
            a[i][j] = covariance_eval(model, std::sqrt(squared_distance(pts[i], pts[j])));
        a[i][k] = 1.0;
        a[k][i] = 1.0;
        a[i][n] = covariance_eval(model, std::sqrt(squared_distance(pts[i], target)));
    }
    a[k][n] = 1.0;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        std::swap(a[col], a[pivot]);
        for (int row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            for (int c = col; c <= n; ++c) a[row][c] -= f * a[col][c];
        }
    }
    std::vector<double> x(n);
    for (int row = n - 1; row >= 0; --row) {
        double v = a[row][n];
        for (int c = row + 1; c < n; ++c) v -= a[row][c] * x[c];
        x[row] = v / a[row][row];
    }
    return x;
}

}  // namespace

TEST_CASE("single neighbor gets weight one") {
    const auto model = VariogramModel::single_exponential(30.0);
    const auto res = ordinary_kriging_weights(model, {{10.0, 0.0, 0.0}}, {3.0, 4.0, 0.0});
    CHECK(res.weights(0) == doctest::Approx(1.0));
    CHECK(res.variance >= 0.0);
}

TEST_CASE("symmetric neighbors share the weight equally") {
    const auto model = VariogramModel::single_exponential(30.0);
    const auto res = ordinary_kriging_weights(
        model, {{-5.0, 0.0, 0.0}, {5.0, 0.0, 0.0}}, {0.0, 0.0, 0.0});
    CHECK(res.weights(0) == doctest::Approx(0.5));
    CHECK(res.weights(1) == doctest::Approx(0.5));
    CHECK(res.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("target at a neighbor location interpolates exactly") {
    const auto model = VariogramModel::single_exponential(25.0);
    const std::vector<Point3> pts = {{0, 0, 0}, {10, 0, 0}, {0, 10, 0}, {7, 7, 2}};
    const auto res = ordinary_kriging_weights(model, pts, {10.0, 0.0, 0.0});
    CHECK(res.weights(1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(res.weights(0)) < 1e-8);
    CHECK(std::abs(res.weights(2)) < 1e-8);
    CHECK(std::abs(res.weights(3)) < 1e-8);
    CHECK(res.variance == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("weights match the dense elimination oracle on random configurations") {
    Rng rng(5000);
    const auto model = VariogramModel::single_exponential(40.0, 1.0, 0.1);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<Point3> pts;
        for (int i = 0; i < 8; ++i)
            pts.push_back({rng.uniform(0.0, 60.0), rng.uniform(0.0, 60.0),
                           rng.uniform(0.0, 10.0)});
        const Point3 target = {rng.uniform(0.0, 60.0), rng.uniform(0.0, 60.0),
                               rng.uniform(0.0, 10.0)};
        const auto res = ordinary_kriging_weights(model, pts, target);
        const auto oracle = dense_solve_ok(model, pts, target);
        for (int i = 0; i < 8; ++i) CHECK(std::abs(res.weights(i) - oracle[static_cast<std::size_t>(i)]) < 1e-10);
        CHECK(std::abs(res.lagrange - oracle[8]) < 1e-10);
        CHECK(res.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(res.variance >= 0.0);
    }
}

TEST_CASE("weights are permutation equivariant in neighbor order") {
    Rng rng(5001);
    const auto model = VariogramModel::single_exponential(40.0);
    std::vector<Point3> pts;
    for (int i = 0; i < 6; ++i)
        pts.push_back({rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0), 0.0});
    const Point3 target = {25.0, 25.0, 0.0};
    const auto base = ordinary_kriging_weights(model, pts, target);

    std::vector<Point3> reversed(pts.rbegin(), pts.rend());
    const auto flipped = ordinary_kriging_weights(model, reversed, target);
    for (int i = 0; i < 6; ++i)
        CHECK(base.weights(i) == doctest::Approx(flipped.weights(5 - i)).epsilon(1e-10));
}

TEST_CASE("duplicate neighbors collapse onto the first occurrence") {
    const auto model = VariogramModel::single_exponential(30.0);
    const std::vector<Point3> pts = {{-5, 0, 0}, {5, 0, 0}, {5, 0, 0}, {5, 0, 0}};
    const auto res = ordinary_kriging_weights(model, pts, {0.0, 0.0, 0.0});
    CHECK(res.weights(0) == doctest::Approx(0.5));
    CHECK(res.weights(1) == doctest::Approx(0.5));
    CHECK(res.weights(2) == doctest::Approx(0.0));
    CHECK(res.weights(3) == doctest::Approx(0.0));
    CHECK(res.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("negative weights appear in screened configurations") {
    // collinear points behind a near one get screened under a smooth structure
    VariogramModel model;
    model.structures.push_back({StructureType::gaussian, 20.0, 1.0});
    const std::vector<Point3> pts = {{3, 0, 0}, {6, 0, 0}, {30, 0, 0}};
    const auto res = ordinary_kriging_weights(model, pts, {0.0, 0.0, 0.0});
    CHECK(res.weights.minCoeff() < 0.0);
    CHECK(res.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("empty neighbor list is rejected") {
    const auto model = VariogramModel::single_exponential(30.0);
    CHECK_THROWS_AS(ordinary_kriging_weights(model, {}, {0, 0, 0}), InvariantError);
}
