#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace lvlmc {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A matrix or vector failed a structural invariant (symmetry, positive
/// definiteness, unit diagonal, dimension mismatch, ...).
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& msg) : Error(msg) {}
};

class DimensionError : public InvariantError {
public:
    explicit DimensionError(const std::string& msg) : InvariantError(msg) {}
};

class NotSpdError : public InvariantError {
public:
    explicit NotSpdError(const std::string& msg) : InvariantError(msg) {}
};

/// An iterative solver exhausted its iteration budget. Carries the last
/// iterate and the residual it reached so callers can inspect or retune.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, Eigen::MatrixXd last_iterate, double residual)
        : Error(msg + " (residual " + format_residual(residual) + ")"),
          last_iterate_(std::move(last_iterate)),
          residual_(residual) {}

    const Eigen::MatrixXd& last_iterate() const { return last_iterate_; }
    double residual() const { return residual_; }

private:
    static std::string format_residual(double r) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3e", r);
        return buf;
    }

    Eigen::MatrixXd last_iterate_;
    double residual_;
};

/// A line-searched descent kept increasing the objective.
class OptimizationError : public Error {
public:
    explicit OptimizationError(const std::string& msg) : Error(msg) {}
};

/// Input data cannot support the requested statistic (all values tied,
/// a variable constant within a neighborhood, empty sample set, ...).
class DegenerateDataError : public Error {
public:
    explicit DegenerateDataError(const std::string& msg) : Error(msg) {}
};

/// Configuration or input file problems, with position info when available.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace lvlmc
