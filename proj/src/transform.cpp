#include "lvlmc/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lvlmc/rng.hpp"

namespace lvlmc {

AnamorphosisTable::AnamorphosisTable(std::vector<double> raw, std::vector<double> gaussian,
                                     TailParams tails)
    : raw_(std::move(raw)), gaussian_(std::move(gaussian)), tails_(tails) {
    if (raw_.size() != gaussian_.size() || raw_.size() < 2)
        throw InvariantError("AnamorphosisTable: need two same-length quantile lists");
    for (std::size_t i = 1; i < raw_.size(); ++i)
        if (!(raw_[i] > raw_[i - 1]) || !(gaussian_[i] > gaussian_[i - 1]))
            throw InvariantError("AnamorphosisTable: quantiles must be strictly increasing");
    if (!(tails_.exponent > 0.0))
        throw InvariantError("AnamorphosisTable: tail exponent must be positive");
}

AnamorphosisTable build_anamorphosis(const std::vector<double>& values, std::uint64_t seed) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    TailParams tails;
    tails.lower_bound = lo - 0.5 * range;
    tails.upper_bound = hi + 1.0 * range;
    return build_anamorphosis(values, seed, tails);
}

AnamorphosisTable build_anamorphosis(const std::vector<double>& values, std::uint64_t seed,
                                     const TailParams& tails) {
    const std::size_t n = values.size();
    if (n < 2) throw DegenerateDataError("build_anamorphosis: need at least two values");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v)) throw InvariantError("build_anamorphosis: non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo)
        throw DegenerateDataError("build_anamorphosis: all values identical, distribution degenerate");

    // Seeded despiking: a jitter far below data resolution breaks ties while
    // keeping the transform reproducible.
    std::vector<double> despiked(values);
    Rng rng(seed, 0x616e616dULL);
    const double noise = 1e-9 * (hi - lo);
    for (double& v : despiked) v += noise * rng.uniform(-1.0, 1.0);
    std::sort(despiked.begin(), despiked.end());

    std::vector<double> gaussian(n);
    for (std::size_t r = 0; r < n; ++r)
        gaussian[r] = normal_quantile((static_cast<double>(r) + 0.5) / static_cast<double>(n));

    // Despiking noise could in principle still collide; nudge apart.
    for (std::size_t i = 1; i < n; ++i)
        if (despiked[i] <= despiked[i - 1])
            despiked[i] = std::nextafter(despiked[i - 1], std::numeric_limits<double>::max());

    return AnamorphosisTable(std::move(despiked), std::move(gaussian), tails);
}

namespace {

/// Piecewise-linear interpolation of ys over xs at x, for x inside the range.
double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = std::min<std::size_t>(xs.size() - 1,
                                                 static_cast<std::size_t>(it - xs.begin()));
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    if (hi == lo) return ys[lo];
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

double gaussianize(const AnamorphosisTable& table, double z) {
    if (std::isnan(z)) throw InvariantError("gaussianize: NaN input");
    if (z <= table.raw().front()) return table.gaussian().front();
    if (z >= table.raw().back()) return table.gaussian().back();
    return interp(table.raw(), table.gaussian(), z);
}

double back_transform(const AnamorphosisTable& table, double y) {
    if (std::isnan(y)) throw InvariantError("back_transform: NaN input");
    const auto& ys = table.gaussian();
    const auto& zs = table.raw();
    if (y >= ys.front() && y <= ys.back()) return interp(ys, zs, y);

    if (y < ys.front()) {
        // Linear in probability down to the lower bound.
        const double p_lo = normal_cdf(ys.front());
        const double frac = p_lo > 0.0 ? normal_cdf(y) / p_lo : 0.0;
        return table.tails().lower_bound + (zs.front() - table.tails().lower_bound) * frac;
    }
    // Power-law approach to the upper bound in probability space.
    const double p_hi = normal_cdf(ys.back());
    const double tail = 1.0 - p_hi;
    const double frac = tail > 0.0 ? std::min(1.0, (normal_cdf(y) - p_hi) / tail) : 1.0;
    const double w = std::pow(frac, 1.0 / table.tails().exponent);
    return zs.back() + (table.tails().upper_bound - zs.back()) * w;
}

void AnamorphosisTable::write(std::ostream& out) const {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# tails %.17g %.17g %.17g\n", tails_.lower_bound,
                  tails_.upper_bound, tails_.exponent);
    out << buf;
    for (std::size_t i = 0; i < raw_.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", raw_[i], gaussian_[i]);
        out << buf;
    }
}

AnamorphosisTable AnamorphosisTable::read(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("anamorphosis table: empty stream");
    TailParams tails;
    if (std::sscanf(line.c_str(), "# tails %lg %lg %lg", &tails.lower_bound,
                    &tails.upper_bound, &tails.exponent) != 3)
        throw ConfigError("anamorphosis table: bad header line");
    std::vector<double> raw, gaussian;
    double z = 0.0, y = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (std::sscanf(line.c_str(), "%lg %lg", &z, &y) != 2)
            throw ConfigError("anamorphosis table: bad data line: " + line);
        raw.push_back(z);
        gaussian.push_back(y);
    }
    return AnamorphosisTable(std::move(raw), std::move(gaussian), tails);
}

double bivariate_normal_cdf(double a, double b, double rho) {
    if (rho <= -1.0 + 1e-12) return std::max(0.0, normal_cdf(a) + normal_cdf(b) - 1.0);
    if (rho >= 1.0 - 1e-12) return normal_cdf(std::min(a, b));
    // Integrate phi(x) Phi((b - rho x)/sqrt(1 - rho^2)) for x < a with
    // composite 5-point Gauss-Legendre panels on [-8.5, min(a, 8.5)].
    const double lo = -8.5;
    if (a <= lo) return 0.0;
    const double s = std::sqrt(1.0 - rho * rho);
    static const double nodes[] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831, 0.9061798459386640};
    static const double weights[] = {0.2369268850561891, 0.4786286704993665,
                                     0.5688888888888889, 0.4786286704993665,
                                     0.2369268850561891};
    const double hi = std::min(a, 8.5);
    const int panels = 200;
    const double h = (hi - lo) / panels;
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double mid = lo + (k + 0.5) * h;
        for (int q = 0; q < 5; ++q) {
            const double x = mid + 0.5 * h * nodes[q];
            const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
            acc += 0.5 * h * weights[q] * phi * normal_cdf((b - rho * x) / s);
        }
    }
    return std::min(1.0, std::max(0.0, acc));
}

namespace {

/// Radical-inverse Halton point in base `base`.
double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

}  // namespace

double nataf_cdf(const AnamorphosisTable& table, double z) {
    return normal_cdf(gaussianize(table, z));
}

double nataf_cdf(const CorrMatrix& c, const std::vector<AnamorphosisTable>& tables,
                 const std::vector<double>& z) {
    const int p = c.dim();
    if (static_cast<int>(tables.size()) != p || static_cast<int>(z.size()) != p)
        throw DimensionError("nataf_cdf: correlation, tables and z must share dimension");

    std::vector<double> y(p);
    for (int i = 0; i < p; ++i) y[i] = gaussianize(tables[i], z[i]);

    // independence factorizes exactly
    if (c.entries().isIdentity(0.0)) {
        double prod = 1.0;
        for (int i = 0; i < p; ++i) prod *= normal_cdf(y[i]);
        return prod;
    }

    if (p == 2) return bivariate_normal_cdf(y[0], y[1], c.entries()(0, 1));

    // Quasi-Monte-Carlo for p > 2: Cholesky-colored Halton normals.
    const Eigen::MatrixXd l = c.entries().llt().matrixL();
    static const std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    if (p > 10) throw DimensionError("nataf_cdf: QMC diagnostic supports p <= 10");
    const std::uint64_t n = 100000;
    std::uint64_t inside = 0;
    Eigen::VectorXd g(p);
    for (std::uint64_t k = 1; k <= n; ++k) {
        for (int i = 0; i < p; ++i)
            g(i) = normal_quantile(std::min(1.0 - 1e-12,
                                            std::max(1e-12, halton(k, primes[i]))));
        const Eigen::VectorXd x = l * g;
        bool ok = true;
        for (int i = 0; i < p && ok; ++i) ok = x(i) <= y[i];
        inside += ok ? 1 : 0;
    }
    return static_cast<double>(inside) / static_cast<double>(n);
}

void Composition::validate() const {
    if (parts.size() < 2) throw InvariantError("Composition: need at least two parts");
    double sum = 0.0;
    for (double part : parts) {
        if (!(part > 0.0)) throw InvariantError("Composition: all parts must be positive");
        sum += part;
    }
    if (std::abs(sum - closure) > 1e-9 * std::max(1.0, closure))
        throw InvariantError("Composition: parts sum to " + std::to_string(sum) +
                             ", closure is " + std::to_string(closure));
}

std::vector<double> alr_forward(const Composition& c) {
    c.validate();
    const double rest = c.parts.back();
    std::vector<double> x(c.parts.size() - 1);
    for (std::size_t i = 0; i + 1 < c.parts.size(); ++i) x[i] = std::log(c.parts[i] / rest);
    return x;
}

Composition alr_inverse(const std::vector<double>& x, double closure) {
    if (x.empty()) throw InvariantError("alr_inverse: empty input");
    std::vector<double> expd(x.size() + 1);
    double sum = 1.0;  // the rest part contributes e^0
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw InvariantError("alr_inverse: non-finite input");
        expd[i] = std::exp(x[i]);
        sum += expd[i];
        if (!std::isfinite(sum))
            throw Error("alr_inverse: overflow, log-ratio too extreme to invert");
    }
    expd.back() = 1.0;
    Composition c;
    c.closure = closure;
    c.parts.resize(expd.size());
    for (std::size_t i = 0; i < expd.size(); ++i) c.parts[i] = closure * expd[i] / sum;
    return c;
}

}  // namespace lvlmc
