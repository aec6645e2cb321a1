#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lvlmc/errors.hpp"
#include "lvlmc/matrices.hpp"

namespace lvlmc {

/// Tail behaviour outside the table: linear approach to lower_bound below,
/// power-law approach to upper_bound above (exponent 1.5 by default).
struct TailParams {
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    double exponent = 1.5;
};

/// Matched-quantile normal score table: sorted raw values paired with the
/// standard normal scores G^{-1}((rank - 0.5)/n). Immutable once built.
class AnamorphosisTable {
public:
    AnamorphosisTable(std::vector<double> raw, std::vector<double> gaussian, TailParams tails);

    std::size_t size() const { return raw_.size(); }
    const std::vector<double>& raw() const { return raw_; }
    const std::vector<double>& gaussian() const { return gaussian_; }
    const TailParams& tails() const { return tails_; }

    void write(std::ostream& out) const;
    static AnamorphosisTable read(std::istream& in);

private:
    std::vector<double> raw_;
    std::vector<double> gaussian_;
    TailParams tails_;
};

/// Builds the normal-score table for the given values. Ties are broken by
/// seeded despiking noise of magnitude 1e-9 x data range so the transform
/// is reproducible. Throws DegenerateDataError when all values coincide.
AnamorphosisTable build_anamorphosis(const std::vector<double>& values, std::uint64_t seed);

/// Tail bounds default to the data range padded by half the range below and
/// one range above; callers with real bounds should override.
AnamorphosisTable build_anamorphosis(const std::vector<double>& values, std::uint64_t seed,
                                     const TailParams& tails);

/// Raw value -> gaussian score, piecewise linear inside the table, clamped
/// to the extreme scores outside.
double gaussianize(const AnamorphosisTable& table, double z);

/// Gaussian score -> raw value, piecewise linear inside the table, tail
/// models outside.
double back_transform(const AnamorphosisTable& table, double y);

/// Coupled multivariate CDF: the Gaussian copula value
/// G_0^C(phi_1^{-1}(z_1), ..., phi_p^{-1}(z_p)). Numerically integrated for
/// p = 2, quasi-Monte-Carlo (1e5 points) for p > 2. A diagnostic, not on the
/// simulation path.
double nataf_cdf(const CorrMatrix& c, const std::vector<AnamorphosisTable>& tables,
                 const std::vector<double>& z);

/// Univariate case: the marginal CDF G(phi^{-1}(z)).
double nataf_cdf(const AnamorphosisTable& table, double z);

/// Bivariate standard normal CDF with correlation rho, by quadrature.
double bivariate_normal_cdf(double a, double b, double rho);

/// A composition: p+1 positive parts summing to the closure constant.
struct Composition {
    std::vector<double> parts;
    double closure = 100.0;

    void validate() const;
};

/// Additive log ratios against the last (rest) part.
std::vector<double> alr_forward(const Composition& c);

/// Inverse alr: parts proportional to (e^{x_1}, ..., e^{x_p}, 1).
Composition alr_inverse(const std::vector<double>& x, double closure);

}  // namespace lvlmc
