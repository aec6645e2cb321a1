#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lvlmc/rng.hpp"
#include "lvlmc/simulate.hpp"
#include "lvlmc/synthetic.hpp"
#include "oracles.hpp"

using namespace lvlmc;

namespace {

std::vector<Point3> transect(int n, double spacing) {
    std::vector<Point3> pts;
    for (int i = 0; i < n; ++i) pts.push_back({i * spacing, 0.0, 0.0});
    return pts;
}

}  // namespace

TEST_CASE("turning bands is deterministic and thread-count invariant") {
    const auto model = VariogramModel::single_exponential(50.0);
    Grid grid;
    grid.spacing = {5.0, 5.0, 5.0};
    grid.counts = {8, 8, 4};
    const auto a = turning_bands(model, grid, 300, 42);
    const auto b = turning_bands(model, grid, 300, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    const auto threaded = turning_bands(model, grid.nodes(), 300, StreamKey{42, 0, 0}, 4);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == threaded[i]);

    const auto other_seed = turning_bands(model, grid, 300, 43);
    CHECK(std::abs(other_seed[0] - a[0]) > 1e-12);
}

TEST_CASE("turning bands rejects unsupported inputs") {
    VariogramModel spherical;
    spherical.structures.push_back({StructureType::spherical, 30.0, 1.0});
    Grid grid;
    grid.counts = {4, 4, 1};
    CHECK_THROWS_AS(turning_bands(spherical, grid, 300, 1), InvariantError);

    const auto scaled = VariogramModel::single_exponential(30.0, 2.0, 0.0);
    CHECK_THROWS_AS(turning_bands(scaled, grid, 300, 1), InvariantError);

    const auto ok = VariogramModel::single_exponential(30.0);
    CHECK_THROWS_AS(turning_bands(ok, grid, 50, 1), InvariantError);
}

TEST_CASE("turning bands transect has standard normal pointwise statistics") {
    const auto model = VariogramModel::single_exponential(50.0);
    const auto pts = transect(64, 4.0);
    const int n_real = 100;

    Eigen::MatrixXd values(64, n_real);
    for (int r = 0; r < n_real; ++r) {
        const auto field =
            turning_bands(model, pts, 400, StreamKey{071, static_cast<std::uint64_t>(r), 0});
        for (int i = 0; i < 64; ++i) values(i, r) = field[static_cast<std::size_t>(i)];
    }

    int mean_ok = 0, var_ok = 0;
    for (int i = 0; i < 64; ++i) {
        const double mean = values.row(i).mean();
        const double var = values.row(i).squaredNorm() / n_real - mean * mean;
        mean_ok += std::abs(mean) < 0.3 ? 1 : 0;
        var_ok += (var > 0.7 && var < 1.3) ? 1 : 0;
    }
    CHECK(mean_ok >= 61);  // 95% of 64 nodes
    CHECK(var_ok >= 61);
}

TEST_CASE("realization-averaged variogram matches the model") {
    // a 3-d block keeps the estimator noise at the percent level; a short
    // transect would be dominated by too few independent correlation volumes
    const auto model = VariogramModel::single_exponential(30.0);
    Grid grid;
    grid.spacing = {10.0, 10.0, 10.0};
    grid.counts = {14, 14, 7};
    const auto pts = grid.nodes();
    const int n_real = 100;
    const double lag_width = 5.0;
    const int n_lags = 8;

    std::vector<double> avg(static_cast<std::size_t>(n_lags), 0.0);
    std::vector<double> lag_at(static_cast<std::size_t>(n_lags), 0.0);
    std::vector<long> pairs(static_cast<std::size_t>(n_lags), 0);
    for (int r = 0; r < n_real; ++r) {
        const auto field =
            turning_bands(model, pts, 600, StreamKey{1234, static_cast<std::uint64_t>(r), 0}, 2);
        const auto vario = experimental_variogram(pts, field, field, lag_width, n_lags);
        for (int k = 0; k < n_lags; ++k) {
            avg[static_cast<std::size_t>(k)] += vario.gamma[static_cast<std::size_t>(k)] / n_real;
            lag_at[static_cast<std::size_t>(k)] = vario.lag_centers[static_cast<std::size_t>(k)];
            pairs[static_cast<std::size_t>(k)] = vario.pairs[static_cast<std::size_t>(k)];
        }
    }
    int checked = 0;
    for (int k = 0; k < n_lags; ++k) {
        if (pairs[static_cast<std::size_t>(k)] == 0) continue;
        if (lag_at[static_cast<std::size_t>(k)] > 30.0) break;  // within the practical range
        CHECK(std::abs(avg[static_cast<std::size_t>(k)] -
                       model.gamma(lag_at[static_cast<std::size_t>(k)])) < 0.05);
        ++checked;
    }
    CHECK(checked >= 3);
}

TEST_CASE("nugget component adds uncorrelated unit-filling variance") {
    VariogramModel model;
    model.nugget = 0.4;
    model.structures.push_back({StructureType::exponential, 40.0, 0.6});
    const auto pts = transect(200, 10.0);
    double var = 0.0;
    const int n_real = 60;
    for (int r = 0; r < n_real; ++r) {
        const auto field =
            turning_bands(model, pts, 300, StreamKey{9, static_cast<std::uint64_t>(r), 0});
        for (double v : field) var += v * v;
    }
    var /= static_cast<double>(n_real * pts.size());
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("conditioning is exact at data and inert out of reach") {
    const auto model = VariogramModel::single_exponential(30.0);
    Rng rng(7100);

    std::vector<Point3> data_pts;
    std::vector<double> data_values;
    for (int i = 0; i < 30; ++i) {
        data_pts.push_back({rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0), 0.0});
        data_values.push_back(rng.normal());
    }
    SpatialIndex data_index(data_pts);

    // targets: the data locations themselves plus one far-away point
    std::vector<Point3> targets = data_pts;
    targets.push_back({5000.0, 5000.0, 0.0});

    std::vector<double> uncond(targets.size());
    for (auto& v : uncond) v = rng.normal();
    std::vector<double> uncond_at_data(uncond.begin(), uncond.begin() + 30);

    SearchParams search;
    search.radius = 50.0;
    search.max_samples = 12;
    const auto conditioned = condition(uncond, targets, data_index, data_values,
                                       uncond_at_data, model, search);

    for (int i = 0; i < 30; ++i)
        CHECK(conditioned[static_cast<std::size_t>(i)] ==
              doctest::Approx(data_values[static_cast<std::size_t>(i)]).epsilon(1e-8));
    CHECK(conditioned.back() == uncond.back());
}

TEST_CASE("conditioning preserves the model variogram away from data") {
    const auto model = VariogramModel::single_exponential(40.0);
    Rng rng(7150);

    // data cluster in the west corner; evaluation grid several ranges east
    std::vector<Point3> data_pts;
    std::vector<double> data_values;
    for (int i = 0; i < 40; ++i)
        data_pts.push_back({rng.uniform(0.0, 40.0), rng.uniform(0.0, 40.0), 0.0});
    SpatialIndex data_index(data_pts);

    Grid grid;
    grid.origin = {150.0, 0.0, 0.0};
    grid.spacing = {10.0, 10.0, 1.0};
    grid.counts = {12, 12, 1};
    const auto nodes = grid.nodes();

    std::vector<Point3> sim_points(nodes);
    sim_points.insert(sim_points.end(), data_pts.begin(), data_pts.end());

    SearchParams search;
    search.radius = 400.0;  // data stay in reach, several ranges away
    search.max_samples = 25;
    const auto plan = build_conditioning_plan(model, nodes, data_index, search);

    const int n_real = 50;
    const double lag_width = 10.0;
    const int n_lags = 4;
    std::vector<double> avg(static_cast<std::size_t>(n_lags), 0.0);
    std::vector<double> lag_at(static_cast<std::size_t>(n_lags), 0.0);
    std::vector<long> pairs(static_cast<std::size_t>(n_lags), 0);
    data_values.assign(data_pts.size(), 0.0);
    for (int r = 0; r < n_real; ++r) {
        // each realization conditions on its own synthetic data draw
        const auto field = turning_bands(model, sim_points, 600,
                                         StreamKey{808, static_cast<std::uint64_t>(r), 0});
        std::vector<double> uncond(field.begin(), field.begin() + static_cast<long>(nodes.size()));
        std::vector<double> uncond_at_data(field.begin() + static_cast<long>(nodes.size()),
                                           field.end());
        for (std::size_t i = 0; i < data_values.size(); ++i)
            data_values[i] = 0.8 * uncond_at_data[i] + 0.2 * rng.normal();
        const auto conditioned = apply_conditioning(uncond, plan, data_values, uncond_at_data);
        const auto vario = experimental_variogram(nodes, conditioned, conditioned,
                                                  lag_width, n_lags);
        for (int k = 0; k < n_lags; ++k) {
            const auto sk = static_cast<std::size_t>(k);
            avg[sk] += vario.gamma[sk] / n_real;
            lag_at[sk] = vario.lag_centers[sk];
            pairs[sk] = vario.pairs[sk];
        }
    }
    for (int k = 0; k < n_lags; ++k) {
        const auto sk = static_cast<std::size_t>(k);
        if (pairs[sk] == 0) continue;
        CHECK(std::abs(avg[sk] - model.gamma(lag_at[sk])) < 0.1);  // 10% of unit sill
    }
}

TEST_CASE("interpolated correlation maps vary smoothly between adjacent nodes") {
    SyntheticConfig synth;
    synth.extent = {300.0, 300.0, 30.0};
    synth.spacing = {10.0, 10.0, 5.0};
    synth.range = 50.0;
    synth.rho_west = 0.9;
    synth.rho_east = -0.9;
    synth.drill_spacing = 30.0;
    synth.n_lines = 500;
    synth.seed = 21;
    synth.threads = 2;
    const auto truth = generate_synthetic(synth);
    const auto holes = drillhole_sample(truth, synth);

    SpatialIndex index(holes.samples.locations);
    LocalInferenceConfig inference;
    inference.k = 200;
    const auto models = infer_all_local_models(holes.samples, index, inference, 2);

    // one z-slab of nodes across the domain
    Grid slab;
    slab.origin = {0.0, 0.0, 15.0};
    slab.spacing = {10.0, 10.0, 1.0};
    slab.counts = {31, 31, 1};
    const auto model = VariogramModel::single_exponential(50.0);
    SearchParams search;
    search.radius = 100.0;
    search.max_samples = 25;
    const auto field = interpolate_correlation_field(models, index,
                                                     slab.nodes(), model, search, {}, 2);

    double worst_jump = 0.0;
    for (int j = 0; j < 31; ++j) {
        for (int i = 0; i + 1 < 31; ++i) {
            const auto a = static_cast<std::size_t>(slab.index(i, j, 0));
            const auto b = static_cast<std::size_t>(slab.index(i + 1, j, 0));
            if (field.flags[a] == NodeFlag::unestimated ||
                field.flags[b] == NodeFlag::unestimated)
                continue;
            worst_jump = std::max(worst_jump,
                                  std::abs(field.matrices[a].entries()(0, 1) -
                                           field.matrices[b].entries()(0, 1)));
        }
    }
    CHECK(worst_jump > 0.0);
    CHECK(worst_jump <= 0.2);
}

TEST_CASE("correlation field trivial cases") {
    Rng rng(7200);
    const auto model = VariogramModel::single_exponential(40.0);
    SolverConfig solver;
    solver.epsilon = 1e-9;

    // two samples with opposite correlation, node equidistant
    SampleSet set;
    set.variable_names = {"a", "b"};
    set.locations = {{0.0, 0.0, 0.0}, {10.0, 0.0, 0.0}};
    set.values.resize(2, 2);
    set.values << 1.0, 2.0, 3.0, 4.0;
    SpatialIndex index(set.locations);

    std::vector<LocalModel> models;
    for (double rho : {0.5, -0.5}) {
        LocalModel m{CorrMatrix::from_rho(rho)};
        m.sample = static_cast<int>(models.size());
        m.chol = Eigen::MatrixXd::Identity(2, 2);
        m.gaussian = Eigen::VectorXd::Zero(2);
        m.factors = Eigen::VectorXd::Zero(2);
        models.push_back(std::move(m));
    }

    SearchParams search;
    search.radius = 100.0;
    search.max_samples = 10;

    // node on sample 0 with radius covering only it
    SearchParams tight;
    tight.radius = 1.0;
    tight.max_samples = 10;
    const auto at_sample = interpolate_correlation_field(
        models, index, {{0.0, 0.0, 0.0}}, model, tight, solver);
    CHECK(at_sample.flags[0] == NodeFlag::ok);
    CHECK(at_sample.matrices[0].entries()(0, 1) == doctest::Approx(0.5));

    // equidistant node: the mean of +rho and -rho is the identity
    const auto mid = interpolate_correlation_field(
        models, index, {{5.0, 0.0, 0.0}}, model, search, solver);
    CHECK(mid.flags[0] == NodeFlag::ok);
    CHECK(std::abs(mid.matrices[0].entries()(0, 1)) < 1e-3);

    // cross-check against the brute-force rho-grid oracle
    const double oracle_rho = oracle::corr_frechet_rho_grid(
        {oracle::corr2(0.5), oracle::corr2(-0.5)}, {0.5, 0.5});
    CHECK(std::abs(mid.matrices[0].entries()(0, 1) - oracle_rho) < 2e-3);

    // out-of-reach node is flagged unestimated
    const auto far = interpolate_correlation_field(
        models, index, {{1000.0, 0.0, 0.0}}, model, search, solver);
    CHECK(far.flags[0] == NodeFlag::unestimated);
    CHECK(far.count(NodeFlag::unestimated) == 1);

    // identical local models give a constant field
    std::vector<LocalModel> same;
    for (int i = 0; i < 2; ++i) {
        LocalModel m{CorrMatrix::from_rho(0.3)};
        m.sample = i;
        same.push_back(std::move(m));
    }
    const auto constant = interpolate_correlation_field(
        same, index, {{2.0, 0.0, 0.0}, {8.0, 0.0, 0.0}}, model, search, solver);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(constant.matrices[i].entries()(0, 1) == doctest::Approx(0.3).epsilon(1e-6));

    std::ostringstream csv;
    write_correlation_field_csv(csv, constant);
    CHECK(csv.str().find("corr_1_2") != std::string::npos);
}

TEST_CASE("correlation field is thread-count invariant") {
    Rng rng(7300);
    const auto model = VariogramModel::single_exponential(40.0);
    SampleSet set;
    set.variable_names = {"a", "b"};
    std::vector<LocalModel> models;
    for (int i = 0; i < 40; ++i) {
        set.locations.push_back({rng.uniform(0.0, 80.0), rng.uniform(0.0, 80.0), 0.0});
        LocalModel m{CorrMatrix::from_rho(rng.uniform(-0.8, 0.8))};
        m.sample = i;
        models.push_back(std::move(m));
    }
    set.values = Eigen::MatrixXd::Zero(40, 2);
    SpatialIndex index(set.locations);

    std::vector<Point3> nodes;
    for (int i = 0; i < 25; ++i)
        nodes.push_back({rng.uniform(0.0, 80.0), rng.uniform(0.0, 80.0), 0.0});

    SearchParams search;
    search.radius = 60.0;
    search.max_samples = 12;
    const auto serial =
        interpolate_correlation_field(models, index, nodes, model, search, {}, 1);
    const auto parallel =
        interpolate_correlation_field(models, index, nodes, model, search, {}, 4);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        CHECK((serial.matrices[i].entries() - parallel.matrices[i].entries()).norm() == 0.0);
        CHECK(serial.flags[i] == parallel.flags[i]);
    }
}
