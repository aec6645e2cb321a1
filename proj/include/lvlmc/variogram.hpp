#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lvlmc/errors.hpp"
#include "lvlmc/neighborhood.hpp"

namespace lvlmc {

enum class StructureType { exponential, spherical, gaussian };

StructureType structure_from_string(const std::string& name);
std::string to_string(StructureType type);

/// One nested structure: practical range (95% of the sill is reached at
/// h = range) and its sill contribution.
struct Structure {
    StructureType type = StructureType::exponential;
    double range = 1.0;   // meters, practical range
    double sill = 1.0;
};

struct VariogramModel {
    double nugget = 0.0;
    std::vector<Structure> structures;

    double total_sill() const;
    /// Model semi-variance at lag h.
    double gamma(double h) const;
    void validate() const;

    static VariogramModel single_exponential(double range, double sill = 1.0,
                                             double nugget = 0.0);
};

/// Covariance counterpart C(h) = total sill - gamma(h).
double covariance_eval(const VariogramModel& model, double h);

/// Omnidirectional experimental (cross-)semi-variogram between two value
/// arrays over shared locations.
struct ExperimentalVariogram {
    std::vector<double> lag_centers;     // mean pair separation per bin
    std::vector<double> gamma;           // estimates; meaningful when pairs > 0
    std::vector<long> pairs;
    int var_i = 0;
    int var_j = 0;
};

ExperimentalVariogram experimental_variogram(const std::vector<Point3>& locations,
                                             const std::vector<double>& values_i,
                                             const std::vector<double>& values_j,
                                             double lag_width, int n_lags);

/// Weighted least squares fit of nugget + single exponential structure,
/// weights pairs / lag^2; the range is profiled over a log grid and refined
/// by golden section.
VariogramModel fit_exponential(const ExperimentalVariogram& exp_vario);

/// CSV rows (lag, gamma, pairs) plus a model descriptor block.
void write_variogram_csv(std::ostream& out, const ExperimentalVariogram& vario);
std::string describe(const VariogramModel& model);

}  // namespace lvlmc
