#include "lvlmc/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace lvlmc {

StructureType structure_from_string(const std::string& name) {
    if (name == "exponential") return StructureType::exponential;
    if (name == "spherical") return StructureType::spherical;
    if (name == "gaussian") return StructureType::gaussian;
    throw ConfigError("unknown variogram structure type: " + name);
}

std::string to_string(StructureType type) {
    switch (type) {
        case StructureType::exponential: return "exponential";
        case StructureType::spherical: return "spherical";
        case StructureType::gaussian: return "gaussian";
    }
    return "?";
}

namespace {

/// Unit-sill structure value at lag h under the practical-range convention.
double structure_gamma(StructureType type, double range, double h) {
    if (h <= 0.0) return 0.0;
    switch (type) {
        case StructureType::exponential:
            return 1.0 - std::exp(-3.0 * h / range);
        case StructureType::spherical: {
            if (h >= range) return 1.0;
            const double r = h / range;
            return 1.5 * r - 0.5 * r * r * r;
        }
        case StructureType::gaussian:
            return 1.0 - std::exp(-3.0 * (h / range) * (h / range));
    }
    return 0.0;
}

}  // namespace

double VariogramModel::total_sill() const {
    double sill = nugget;
    for (const auto& s : structures) sill += s.sill;
    return sill;
}

double VariogramModel::gamma(double h) const {
    if (h <= 0.0) return 0.0;
    double g = nugget;
    for (const auto& s : structures) g += s.sill * structure_gamma(s.type, s.range, h);
    return g;
}

void VariogramModel::validate() const {
    if (nugget < 0.0) throw InvariantError("VariogramModel: negative nugget");
    for (const auto& s : structures) {
        if (!(s.range > 0.0)) throw InvariantError("VariogramModel: nonpositive range");
        if (s.sill < 0.0) throw InvariantError("VariogramModel: negative sill");
    }
    if (!(total_sill() > 0.0)) throw InvariantError("VariogramModel: zero total sill");
}

VariogramModel VariogramModel::single_exponential(double range, double sill, double nugget) {
    VariogramModel model;
    model.nugget = nugget;
    model.structures.push_back({StructureType::exponential, range, sill});
    model.validate();
    return model;
}

double covariance_eval(const VariogramModel& model, double h) {
    if (h < 0.0) throw InvariantError("covariance_eval: negative lag");
    return model.total_sill() - model.gamma(h);
}

ExperimentalVariogram experimental_variogram(const std::vector<Point3>& locations,
                                             const std::vector<double>& values_i,
                                             const std::vector<double>& values_j,
                                             double lag_width, int n_lags) {
    const std::size_t n = locations.size();
    if (values_i.size() != n || values_j.size() != n)
        throw DimensionError("experimental_variogram: arrays must match locations");
    if (!(lag_width > 0.0) || n_lags < 1)
        throw InvariantError("experimental_variogram: need positive lag width and count");

    std::vector<double> sum(static_cast<std::size_t>(n_lags), 0.0);
    std::vector<double> dist(static_cast<std::size_t>(n_lags), 0.0);
    std::vector<long> count(static_cast<std::size_t>(n_lags), 0);
    const double max_h = lag_width * n_lags;

    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double h = std::sqrt(squared_distance(locations[a], locations[b]));
            if (h >= max_h) continue;
            const auto bin = static_cast<std::size_t>(h / lag_width);
            sum[bin] += (values_i[a] - values_i[b]) * (values_j[a] - values_j[b]);
            dist[bin] += h;
            ++count[bin];
        }
    }

    ExperimentalVariogram out;
    for (int k = 0; k < n_lags; ++k) {
        const auto bin = static_cast<std::size_t>(k);
        if (count[bin] == 0) {
            // empty lag: keep the bin with a zero pair count, flagged not fatal
            out.lag_centers.push_back((k + 0.5) * lag_width);
            out.gamma.push_back(0.0);
            out.pairs.push_back(0);
        } else {
            out.lag_centers.push_back(dist[bin] / static_cast<double>(count[bin]));
            out.gamma.push_back(sum[bin] / (2.0 * static_cast<double>(count[bin])));
            out.pairs.push_back(count[bin]);
        }
    }
    return out;
}

namespace {

struct WlsFit {
    double nugget = 0.0;
    double sill = 0.0;
    double residual = 0.0;
};

/// For a fixed range, the model is linear in (nugget, sill): weighted 2x2
/// normal equations with nonnegativity clamps.
WlsFit wls_for_range(const ExperimentalVariogram& v, double range) {
    double sww = 0.0, swf = 0.0, swff = 0.0, swg = 0.0, swfg = 0.0;
    for (std::size_t k = 0; k < v.gamma.size(); ++k) {
        if (v.pairs[k] == 0) continue;
        const double h = v.lag_centers[k];
        const double w = static_cast<double>(v.pairs[k]) / std::max(1e-12, h * h);
        const double f = structure_gamma(StructureType::exponential, range, h);
        sww += w;
        swf += w * f;
        swff += w * f * f;
        swg += w * v.gamma[k];
        swfg += w * f * v.gamma[k];
    }
    WlsFit fit;
    const double det = sww * swff - swf * swf;
    if (std::abs(det) > 1e-9 * sww * std::max(swff, 1e-30)) {
        fit.nugget = (swg * swff - swfg * swf) / det;
        fit.sill = (sww * swfg - swf * swg) / det;
    } else {
        // structure indistinguishable from a constant: all nugget
        fit.nugget = sww > 0.0 ? swg / sww : 0.0;
        fit.sill = 0.0;
    }
    if (fit.nugget < 0.0) {
        fit.nugget = 0.0;
        fit.sill = swff > 0.0 ? swfg / swff : 0.0;
    }
    if (fit.sill < 0.0) {
        fit.sill = 0.0;
        fit.nugget = sww > 0.0 ? swg / sww : 0.0;
        if (fit.nugget < 0.0) fit.nugget = 0.0;
    }
    for (std::size_t k = 0; k < v.gamma.size(); ++k) {
        if (v.pairs[k] == 0) continue;
        const double h = v.lag_centers[k];
        const double w = static_cast<double>(v.pairs[k]) / std::max(1e-12, h * h);
        const double f = structure_gamma(StructureType::exponential, range, h);
        const double r = v.gamma[k] - fit.nugget - fit.sill * f;
        fit.residual += w * r * r;
    }
    return fit;
}

}  // namespace

VariogramModel fit_exponential(const ExperimentalVariogram& exp_vario) {
    int non_empty = 0;
    double max_lag = 0.0, min_lag = 0.0;
    for (std::size_t k = 0; k < exp_vario.gamma.size(); ++k) {
        if (exp_vario.pairs[k] == 0) continue;
        if (non_empty == 0) min_lag = exp_vario.lag_centers[k];
        max_lag = exp_vario.lag_centers[k];
        ++non_empty;
    }
    if (non_empty < 3)
        throw DegenerateDataError("fit_exponential: need at least three non-empty lags");

    const double range_lo = std::max(1e-6, 0.1 * min_lag);
    const double range_hi = 10.0 * max_lag;

    // Near-ties resolve to the smaller range (pure-nugget data collapses to
    // the lower bound); the floor keeps rounding noise from breaking ties.
    double scale = 0.0;
    for (std::size_t k = 0; k < exp_vario.gamma.size(); ++k) {
        if (exp_vario.pairs[k] == 0) continue;
        const double h = exp_vario.lag_centers[k];
        scale += static_cast<double>(exp_vario.pairs[k]) / std::max(1e-12, h * h) *
                 exp_vario.gamma[k] * exp_vario.gamma[k];
    }
    const double floor = 1e-12 * scale;

    double best_range = range_lo;
    WlsFit best = wls_for_range(exp_vario, range_lo);
    const int grid = 160;
    for (int i = 1; i <= grid; ++i) {
        const double range =
            range_lo * std::pow(range_hi / range_lo, static_cast<double>(i) / grid);
        const WlsFit fit = wls_for_range(exp_vario, range);
        if (fit.residual < best.residual - floor) {
            best = fit;
            best_range = range;
        }
    }
    // Golden-section refinement around the grid winner.
    double a = best_range / std::pow(range_hi / range_lo, 1.0 / grid);
    double b = best_range * std::pow(range_hi / range_lo, 1.0 / grid);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
        const double x1 = b - gr * (b - a);
        const double x2 = a + gr * (b - a);
        if (wls_for_range(exp_vario, x1).residual < wls_for_range(exp_vario, x2).residual)
            b = x2;
        else
            a = x1;
    }
    const double refined = 0.5 * (a + b);
    const WlsFit refined_fit = wls_for_range(exp_vario, refined);
    if (refined_fit.residual < best.residual - floor) {
        best = refined_fit;
        best_range = refined;
    }

    if (!std::isfinite(best.residual))
        throw OptimizationError("fit_exponential: non-finite residual");

    VariogramModel model;
    model.nugget = best.nugget;
    model.structures.push_back({StructureType::exponential, best_range, best.sill});
    if (!(model.total_sill() > 0.0))
        throw OptimizationError("fit_exponential: degenerate zero-sill fit");
    return model;
}

void write_variogram_csv(std::ostream& out, const ExperimentalVariogram& vario) {
    out << "lag,gamma,pairs\n";
    char buf[80];
    for (std::size_t k = 0; k < vario.gamma.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%ld\n", vario.lag_centers[k],
                      vario.gamma[k], vario.pairs[k]);
        out << buf;
    }
}

std::string describe(const VariogramModel& model) {
    std::ostringstream out;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "nugget %.6g\n", model.nugget);
    out << buf;
    for (const auto& s : model.structures) {
        std::snprintf(buf, sizeof(buf), "structure %s range %.6g sill %.6g\n",
                      to_string(s.type).c_str(), s.range, s.sill);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "total sill %.6g\n", model.total_sill());
    out << buf;
    return out.str();
}

}  // namespace lvlmc
