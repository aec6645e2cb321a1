#include "lvlmc/matrices.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace lvlmc {

namespace detail {

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol * std::max(scale, 1.0))
        throw InvariantError(std::string(what) + ": matrix is not symmetric (max asymmetry " +
                             std::to_string(asym) + ")");
}

void check_spd(const Eigen::MatrixXd& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    const double p = static_cast<double>(m.rows());
    if (!(lo > p * 1e-14 * hi) || hi <= 0.0)
        throw NotSpdError(std::string(what) + ": smallest eigenvalue " + std::to_string(lo) +
                          " too close to zero (largest " + std::to_string(hi) + ")");
}

}  // namespace detail

SymMatrix::SymMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    detail::check_symmetric(m_, "SymMatrix");
    m_ = ((m_ + m_.transpose()) / 2.0).eval();
}

SpdMatrix::SpdMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    detail::check_symmetric(m_, "SpdMatrix");
    m_ = ((m_ + m_.transpose()) / 2.0).eval();
    detail::check_spd(m_, "SpdMatrix");
}

CorrMatrix::CorrMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    detail::check_symmetric(m_, "CorrMatrix");
    if (m_.rows() < 2) throw DimensionError("CorrMatrix: dimension must be at least 2");
    m_ = ((m_ + m_.transpose()) / 2.0).eval();
    const int p = static_cast<int>(m_.rows());
    for (int i = 0; i < p; ++i) {
        if (std::abs(m_(i, i) - 1.0) > 1e-8)
            throw InvariantError("CorrMatrix: diagonal entry " + std::to_string(i) +
                                 " is " + std::to_string(m_(i, i)) + ", expected 1");
        m_(i, i) = 1.0;
    }
    // Shrink toward the identity while any coefficient sits on the boundary.
    for (int pass = 0; pass < 4; ++pass) {
        double max_off = 0.0;
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) max_off = std::max(max_off, std::abs(m_(i, j)));
        if (max_off < 1.0 - kBoundaryShrink) break;
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                if (i != j) m_(i, j) *= 1.0 - kBoundaryShrink;
    }
    detail::check_spd(m_, "CorrMatrix");
}

CorrMatrix CorrMatrix::from_rho(double rho) {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, rho, rho, 1.0;
    return CorrMatrix(std::move(m));
}

PositiveDiagonal::PositiveDiagonal(Eigen::VectorXd entries) : d_(std::move(entries)) {
    if (d_.size() < 1) throw DimensionError("PositiveDiagonal: empty");
    for (Eigen::Index i = 0; i < d_.size(); ++i)
        if (!(d_(i) > 0.0))
            throw InvariantError("PositiveDiagonal: entry " + std::to_string(i) +
                                 " is not positive");
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    out << m.rows() << "\n";
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << (j ? " " : "") << buf;
        }
        out << "\n";
    }
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    int p = 0;
    if (!(in >> p) || p < 1) throw ConfigError("matrix text: bad dimension line");
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (!(in >> m(i, j)))
                throw ConfigError("matrix text: truncated at row " + std::to_string(i));
    return m;
}

std::string matrix_to_string(const Eigen::MatrixXd& m) {
    std::ostringstream out;
    write_matrix(out, m);
    return out.str();
}

Eigen::MatrixXd matrix_from_string(const std::string& text) {
    std::istringstream in(text);
    return read_matrix(in);
}

}  // namespace lvlmc
