#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

#include "lvlmc/errors.hpp"

namespace lvlmc {

/// Relative symmetry tolerance shared by the matrix types below.
constexpr double kSymmetryTol = 1e-12;

/// Off-diagonal correlations with |rho| >= 1 - kBoundaryShrink are shrunk
/// toward the identity so the matrix logarithm stays well defined.
constexpr double kBoundaryShrink = 1e-6;

namespace detail {
void check_symmetric(const Eigen::MatrixXd& m, const char* what);
void check_spd(const Eigen::MatrixXd& m, const char* what);
}  // namespace detail

/// A p x p real symmetric matrix; the tangent-space element of the SPD
/// manifold. Symmetrized on construction once the input passes the
/// relative-tolerance symmetry check.
class SymMatrix {
public:
    explicit SymMatrix(Eigen::MatrixXd entries);

    /// Zero tangent vector.
    static SymMatrix zero(int dim) { return SymMatrix(Eigen::MatrixXd::Zero(dim, dim)); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& entries() const { return m_; }
    double norm() const { return m_.norm(); }

private:
    Eigen::MatrixXd m_;
};

/// A symmetric positive definite matrix. Construction verifies symmetry and
/// that the smallest eigenvalue clears p * 1e-14 * largest.
class SpdMatrix {
public:
    explicit SpdMatrix(Eigen::MatrixXd entries);

    static SpdMatrix identity(int dim) {
        return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& entries() const { return m_; }

private:
    Eigen::MatrixXd m_;
};

/// A correlation matrix: SPD with an exactly unit diagonal and off-diagonal
/// entries in (-1, 1). Near-boundary correlations are shrunk toward the
/// identity at construction.
class CorrMatrix {
public:
    explicit CorrMatrix(Eigen::MatrixXd entries);

    static CorrMatrix identity(int dim) {
        return CorrMatrix(Eigen::MatrixXd::Identity(dim, dim));
    }

    /// 2 x 2 correlation matrix with the given off-diagonal coefficient.
    static CorrMatrix from_rho(double rho);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& entries() const { return m_; }
    SpdMatrix as_spd() const { return SpdMatrix(m_); }

private:
    Eigen::MatrixXd m_;
};

/// Diagonal matrix with strictly positive entries; the fiber group element.
class PositiveDiagonal {
public:
    explicit PositiveDiagonal(Eigen::VectorXd entries);

    static PositiveDiagonal identity(int dim) {
        return PositiveDiagonal(Eigen::VectorXd::Ones(dim));
    }

    int dim() const { return static_cast<int>(d_.size()); }
    const Eigen::VectorXd& entries() const { return d_; }
    Eigen::MatrixXd matrix() const { return d_.asDiagonal(); }

    /// D * M * D without forming the diagonal matrix.
    Eigen::MatrixXd conjugate(const Eigen::MatrixXd& m) const {
        return d_.asDiagonal() * m * d_.asDiagonal();
    }

private:
    Eigen::VectorXd d_;
};

/// Plain-text matrix exchange format: first line the dimension p, then p
/// rows of p whitespace-separated decimals at 17 significant digits.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in);
std::string matrix_to_string(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_string(const std::string& text);

}  // namespace lvlmc
