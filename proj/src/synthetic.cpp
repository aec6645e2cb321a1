#include "lvlmc/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "lvlmc/rng.hpp"
#include "lvlmc/simulate.hpp"

namespace lvlmc {

void SyntheticConfig::validate() const {
    if (std::abs(rho_west) >= 1.0 || std::abs(rho_east) >= 1.0)
        throw InvariantError("SyntheticConfig: edge correlations must be inside (-1, 1)");
    if (!(sigma > 0.0)) throw InvariantError("SyntheticConfig: sigma must be positive");
    if (!(range > 0.0)) throw InvariantError("SyntheticConfig: range must be positive");
    for (double e : extent)
        if (!(e > 0.0)) throw InvariantError("SyntheticConfig: extents must be positive");
    for (double s : spacing)
        if (!(s > 0.0)) throw InvariantError("SyntheticConfig: spacing must be positive");
    if (!(drill_spacing > 0.0) || drill_spacing > std::min(extent[0], extent[1]))
        throw InvariantError("SyntheticConfig: drillhole spacing must fit inside the domain");
}

Grid SyntheticConfig::grid() const {
    Grid g;
    g.origin = {0.0, 0.0, 0.0};
    g.spacing = spacing;
    for (int c = 0; c < 3; ++c)
        g.counts[static_cast<std::size_t>(c)] =
            static_cast<int>(std::floor(extent[static_cast<std::size_t>(c)] /
                                        spacing[static_cast<std::size_t>(c)])) +
            1;
    return g;
}

double SyntheticConfig::imposed_rho(double east) const {
    const double t = std::clamp(east / extent[0], 0.0, 1.0);
    return rho_west + (rho_east - rho_west) * t;
}

double SyntheticConfig::mu(int variable, double east) const {
    const double t = std::clamp(east / extent[0], 0.0, 1.0);
    if (variable == 0) {
        const double centered = 2.0 * t - 1.0;  // -1 at west, +1 at east
        return mu1_base + mu1_peak * (1.0 - centered * centered);
    }
    return mu2_base + mu2_slope * t;
}

SyntheticTruth generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    SyntheticTruth truth;
    truth.grid = cfg.grid();
    const auto points = truth.grid.nodes();
    const int n = truth.grid.size();

    const auto model = VariogramModel::single_exponential(cfg.range, 1.0, 0.0);
    truth.factors.resize(n, 2);
    for (int f = 0; f < 2; ++f) {
        const auto field = turning_bands(model, points, cfg.n_lines,
                                         StreamKey{cfg.seed, 0, static_cast<std::uint64_t>(f)},
                                         cfg.threads);
        for (int i = 0; i < n; ++i) truth.factors(i, f) = field[static_cast<std::size_t>(i)];
    }

    truth.gaussian.resize(n, 2);
    truth.raw.resize(n, 2);
    truth.rho.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double east = points[static_cast<std::size_t>(i)][0];
        const double rho = cfg.imposed_rho(east);
        truth.rho[static_cast<std::size_t>(i)] = rho;
        // local Cholesky of [[1, rho], [rho, 1]]
        truth.gaussian(i, 0) = truth.factors(i, 0);
        truth.gaussian(i, 1) =
            rho * truth.factors(i, 0) + std::sqrt(1.0 - rho * rho) * truth.factors(i, 1);
        for (int v = 0; v < 2; ++v)
            truth.raw(i, v) = std::exp(cfg.mu(v, east) + cfg.sigma * truth.gaussian(i, v));
    }
    return truth;
}

DrillholeSamples drillhole_sample(const SyntheticTruth& truth, const SyntheticConfig& cfg) {
    cfg.validate();
    const Grid& grid = truth.grid;
    Rng rng(cfg.seed ^ 0x6472696cULL);

    std::vector<int> order;             // node ids in first-visit order
    std::vector<char> seen(static_cast<std::size_t>(grid.size()), 0);

    const double step = grid.spacing[2];
    const double top = grid.origin[2] + (grid.counts[2] - 1) * grid.spacing[2];
    const double dip_max = cfg.dip_max_deg * M_PI / 180.0;

    for (double cx = 0.0; cx <= cfg.extent[0] + 1e-9; cx += cfg.drill_spacing) {
        for (double cy = 0.0; cy <= cfg.extent[1] + 1e-9; cy += cfg.drill_spacing) {
            const double x0 = cx + rng.uniform(-0.25, 0.25) * cfg.drill_spacing;
            const double y0 = cy + rng.uniform(-0.25, 0.25) * cfg.drill_spacing;
            const double azimuth = rng.uniform(0.0, 2.0 * M_PI);
            const double deviation = rng.uniform(0.0, dip_max);
            const Point3 dir = {std::sin(deviation) * std::cos(azimuth),
                                std::sin(deviation) * std::sin(azimuth),
                                -std::cos(deviation)};
            // march from the collar at the top down through the domain
            const double trace_length = (top - grid.origin[2]) / std::cos(deviation);
            const int n_steps = static_cast<int>(std::floor(trace_length / step)) + 1;
            for (int s = 0; s <= n_steps; ++s) {
                const double d = s * step;
                const Point3 pos = {x0 + dir[0] * d, y0 + dir[1] * d, top + dir[2] * d};
                int idx[3];
                bool inside = true;
                for (int c = 0; c < 3 && inside; ++c) {
                    const auto sc = static_cast<std::size_t>(c);
                    const double rel = (pos[sc] - grid.origin[sc]) / grid.spacing[sc];
                    idx[c] = static_cast<int>(std::lround(rel));
                    inside = idx[c] >= 0 && idx[c] < grid.counts[sc];
                }
                if (!inside) continue;
                const int node = grid.index(idx[0], idx[1], idx[2]);
                if (!seen[static_cast<std::size_t>(node)]) {
                    seen[static_cast<std::size_t>(node)] = 1;
                    order.push_back(node);
                }
            }
        }
    }

    if (order.empty())
        throw DegenerateDataError("drillhole_sample: no nodes sampled, spacing too large");

    DrillholeSamples out;
    out.node_of = order;
    out.samples.variable_names = {"z1", "z2"};
    out.samples.values.resize(static_cast<int>(order.size()), 2);
    for (std::size_t s = 0; s < order.size(); ++s) {
        out.samples.locations.push_back(grid.node(order[s]));
        out.samples.values(static_cast<int>(s), 0) = truth.raw(order[s], 0);
        out.samples.values(static_cast<int>(s), 1) = truth.raw(order[s], 1);
    }
    out.samples.validate();
    return out;
}

ErrorMetrics error_metrics(const std::vector<double>& predicted,
                           const std::vector<double>& truth) {
    if (predicted.empty() || predicted.size() != truth.size())
        throw InvariantError("error_metrics: need equal-length non-empty arrays");
    ErrorMetrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double e = predicted[i] - truth[i];
        m.me += e;
        m.mae += std::abs(e);
        m.rmse += e * e;
    }
    const double n = static_cast<double>(predicted.size());
    m.me /= n;
    m.mae /= n;
    m.rmse = std::sqrt(m.rmse / n);
    return m;
}

namespace {

double sorted_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<std::pair<double, double>> accuracy_plot_data(
    const Eigen::MatrixXd& realizations, const std::vector<double>& truth,
    const std::vector<double>& nominal) {
    const auto rows = static_cast<std::size_t>(realizations.rows());
    if (rows == 0 || rows != truth.size())
        throw InvariantError("accuracy_plot_data: realization rows must match truth length");
    if (realizations.cols() < 20)
        throw InvariantError("accuracy_plot_data: need at least 20 realizations per node");

    std::vector<std::pair<double, double>> out;
    std::vector<double> row(static_cast<std::size_t>(realizations.cols()));
    std::vector<std::vector<double>> sorted_rows(rows, row);
    for (std::size_t i = 0; i < rows; ++i) {
        for (Eigen::Index r = 0; r < realizations.cols(); ++r)
            sorted_rows[i][static_cast<std::size_t>(r)] =
                realizations(static_cast<Eigen::Index>(i), r);
        std::sort(sorted_rows[i].begin(), sorted_rows[i].end());
    }

    for (double p : nominal) {
        if (!(p > 0.0) || !(p < 1.0))
            throw InvariantError("accuracy_plot_data: nominal probabilities must be in (0,1)");
        int inside = 0;
        for (std::size_t i = 0; i < rows; ++i) {
            const double lo = sorted_quantile(sorted_rows[i], (1.0 - p) / 2.0);
            const double hi = sorted_quantile(sorted_rows[i], (1.0 + p) / 2.0);
            if (truth[i] >= lo && truth[i] <= hi) ++inside;
        }
        out.push_back({p, static_cast<double>(inside) / static_cast<double>(rows)});
    }
    return out;
}

}  // namespace lvlmc
