#include <doctest.h>

#include <cmath>
#include <vector>

#include "lvlmc/rng.hpp"
#include "lvlmc/variogram.hpp"

using namespace lvlmc;

namespace {

std::vector<Point3> grid_points(int nx, int ny, double spacing) {
    std::vector<Point3> pts;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            pts.push_back({i * spacing, j * spacing, 0.0});
    return pts;
}

}  // namespace

TEST_CASE("covariance_eval follows the practical-range convention") {
    const auto model = VariogramModel::single_exponential(50.0, 2.0, 0.0);
    CHECK(covariance_eval(model, 0.0) == doctest::Approx(2.0));
    CHECK(covariance_eval(model, 50.0) == doctest::Approx(0.05 * 2.0).epsilon(5e-3));
    CHECK(covariance_eval(model, 500.0) < 1e-6 * 2.0);
    CHECK_THROWS_AS(covariance_eval(model, -1.0), InvariantError);

    // gamma + covariance identity at any lag
    for (double h : {0.0, 3.0, 17.0, 42.0, 120.0})
        CHECK(covariance_eval(model, 0.0) - covariance_eval(model, h) ==
              doctest::Approx(model.gamma(h)));

    // monotone non-increasing for all supported types
    for (auto type : {StructureType::exponential, StructureType::spherical,
                      StructureType::gaussian}) {
        VariogramModel m;
        m.structures.push_back({type, 30.0, 1.0});
        double prev = covariance_eval(m, 0.0);
        for (double h = 1.0; h < 100.0; h += 1.0) {
            const double c = covariance_eval(m, h);
            CHECK(c <= prev + 1e-12);
            prev = c;
        }
    }
}

TEST_CASE("experimental variogram of constant values is zero") {
    const auto pts = grid_points(15, 15, 1.0);
    std::vector<double> values(pts.size(), 3.25);
    const auto vario = experimental_variogram(pts, values, values, 1.0, 10);
    for (std::size_t k = 0; k < vario.gamma.size(); ++k)
        if (vario.pairs[k] > 0) CHECK(vario.gamma[k] == doctest::Approx(0.0));
}

TEST_CASE("experimental variogram matches a brute-force double loop") {
    Rng rng(4000);
    std::vector<Point3> pts;
    std::vector<double> vi, vj;
    for (int i = 0; i < 120; ++i) {
        pts.push_back({rng.uniform(0.0, 40.0), rng.uniform(0.0, 40.0), rng.uniform(0.0, 5.0)});
        vi.push_back(rng.normal());
        vj.push_back(rng.normal());
    }
    const double width = 4.0;
    const int n_lags = 8;
    const auto vario = experimental_variogram(pts, vi, vj, width, n_lags);

    std::vector<double> sum(n_lags, 0.0);
    std::vector<long> cnt(n_lags, 0);
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double h = std::sqrt(squared_distance(pts[a], pts[b]));
            if (h >= width * n_lags) continue;
            const int bin = static_cast<int>(h / width);
            sum[bin] += (vi[a] - vi[b]) * (vj[a] - vj[b]);
            ++cnt[bin];
        }
    for (int k = 0; k < n_lags; ++k) {
        CHECK(vario.pairs[k] == cnt[k]);
        if (cnt[k] > 0)
            CHECK(vario.gamma[k] == doctest::Approx(sum[k] / (2.0 * cnt[k])));
    }

    // symmetry of the estimator
    const auto swapped = experimental_variogram(pts, vj, vi, width, n_lags);
    for (int k = 0; k < n_lags; ++k) CHECK(swapped.gamma[k] == doctest::Approx(vario.gamma[k]));
}

TEST_CASE("iid values give a pure-nugget direct variogram near 1") {
    Rng rng(4001);
    std::vector<Point3> pts;
    std::vector<double> values;
    for (int i = 0; i < 2000; ++i) {
        pts.push_back({rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0), 0.0});
        values.push_back(rng.normal());
    }
    const auto vario = experimental_variogram(pts, values, values, 5.0, 12);
    for (std::size_t k = 1; k < vario.gamma.size(); ++k) {
        REQUIRE(vario.pairs[k] > 0);
        CHECK(std::abs(vario.gamma[k] - 1.0) < 0.1);
    }
}

TEST_CASE("fit recovers noiseless exponential parameters within 2%") {
    const auto truth = VariogramModel::single_exponential(50.0, 1.0, 0.0);
    ExperimentalVariogram vario;
    for (int k = 0; k < 20; ++k) {
        const double h = 4.0 + 7.0 * k;
        vario.lag_centers.push_back(h);
        vario.gamma.push_back(truth.gamma(h));
        vario.pairs.push_back(1000 - 10 * k);
    }
    const auto fit = fit_exponential(vario);
    REQUIRE(fit.structures.size() == 1);
    CHECK(fit.structures[0].range == doctest::Approx(50.0).epsilon(0.02));
    CHECK(fit.structures[0].sill == doctest::Approx(1.0).epsilon(0.02));
    CHECK(fit.nugget == doctest::Approx(0.0).epsilon(0.02));

    // residual of the fit no worse than the truth's residual on the samples
    double fit_res = 0.0, truth_res = 0.0;
    for (std::size_t k = 0; k < vario.gamma.size(); ++k) {
        const double w = static_cast<double>(vario.pairs[k]) /
                         (vario.lag_centers[k] * vario.lag_centers[k]);
        fit_res += w * std::pow(vario.gamma[k] - fit.gamma(vario.lag_centers[k]), 2);
        truth_res += w * std::pow(vario.gamma[k] - truth.gamma(vario.lag_centers[k]), 2);
    }
    CHECK(fit_res <= truth_res + 1e-12);
}

TEST_CASE("pure nugget data collapses the range to the lower bound") {
    ExperimentalVariogram vario;
    for (int k = 0; k < 10; ++k) {
        vario.lag_centers.push_back(2.0 + 4.0 * k);
        vario.gamma.push_back(0.8);
        vario.pairs.push_back(500);
    }
    const auto fit = fit_exponential(vario);
    CHECK(fit.nugget == doctest::Approx(0.8).epsilon(0.01));
    CHECK(fit.structures[0].sill == doctest::Approx(0.0).epsilon(0.01));
    CHECK(fit.structures[0].range <= 0.2 * vario.lag_centers.front() + 1e-9);
}

TEST_CASE("fit weights are invariant under uniform pair-count rescaling") {
    Rng rng(4002);
    ExperimentalVariogram vario;
    const auto truth = VariogramModel::single_exponential(30.0, 1.2, 0.15);
    for (int k = 0; k < 15; ++k) {
        const double h = 3.0 + 5.0 * k;
        vario.lag_centers.push_back(h);
        vario.gamma.push_back(truth.gamma(h) * (1.0 + 0.05 * rng.normal()));
        vario.pairs.push_back(100 + 20 * k);
    }
    ExperimentalVariogram scaled = vario;
    for (auto& pairs : scaled.pairs) pairs *= 7;

    const auto fit_a = fit_exponential(vario);
    const auto fit_b = fit_exponential(scaled);
    CHECK(fit_a.structures[0].range == doctest::Approx(fit_b.structures[0].range));
    CHECK(fit_a.structures[0].sill == doctest::Approx(fit_b.structures[0].sill));
    CHECK(fit_a.nugget == doctest::Approx(fit_b.nugget));
}

TEST_CASE("fit refuses fewer than three informative lags") {
    ExperimentalVariogram vario;
    vario.lag_centers = {1.0, 2.0};
    vario.gamma = {0.5, 0.6};
    vario.pairs = {10, 10};
    CHECK_THROWS_AS(fit_exponential(vario), DegenerateDataError);
}
