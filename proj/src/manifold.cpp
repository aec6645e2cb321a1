#include "lvlmc/manifold.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lvlmc {

namespace {

struct SpectralRoots {
    Eigen::MatrixXd sqrt;
    Eigen::MatrixXd inv_sqrt;
};

SpectralRoots spectral_roots(const Eigen::MatrixXd& spd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spd);
    const Eigen::VectorXd root = es.eigenvalues().cwiseSqrt();
    const Eigen::MatrixXd& q = es.eigenvectors();
    return {q * root.asDiagonal() * q.transpose(),
            q * root.cwiseInverse().asDiagonal() * q.transpose()};
}

Eigen::MatrixXd sym_exp_raw(const Eigen::MatrixXd& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
    return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_log_raw(const Eigen::MatrixXd& spd, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spd);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw NotSpdError(std::string(what) + ": nonpositive eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()));
    return es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

/// Sum of log^2 of the eigenvalues of B^{-1} A, both SPD.
double log_sq_spectrum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b,
                                                                 Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double lambda = es.eigenvalues()(i);
        if (lambda <= 0.0)
            throw NotSpdError("distance: generalized eigenvalue " + std::to_string(lambda));
        const double l = std::log(lambda);
        acc += l * l;
    }
    return acc;
}

void check_same_dim(int a, int b, const char* what) {
    if (a != b)
        throw DimensionError(std::string(what) + ": dimensions " + std::to_string(a) +
                             " and " + std::to_string(b) + " differ");
}

void check_weights(std::size_t n_matrices, const std::vector<double>& weights,
                   const char* what) {
    if (n_matrices == 0) throw InvariantError(std::string(what) + ": empty input");
    if (weights.size() != n_matrices)
        throw InvariantError(std::string(what) + ": " + std::to_string(weights.size()) +
                             " weights for " + std::to_string(n_matrices) + " matrices");
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (std::abs(sum - 1.0) > 1e-10)
        throw InvariantError(std::string(what) + ": weights sum to " + std::to_string(sum) +
                             ", expected 1");
}

/// Fiber-descent objective g(D) = d^2(c_ref, D c_i D), sharing the spectrum
/// of the gradient computation: eig(c_ref^{-1} D c_i D) = eig of the pencil
/// c_i v = lambda (D^{-1} c_ref D^{-1}) v.
double fiber_objective(const Eigen::MatrixXd& c_i, const Eigen::MatrixXd& c_ref,
                       const Eigen::VectorXd& d) {
    const Eigen::VectorXd inv_d = d.cwiseInverse();
    const Eigen::MatrixXd b = inv_d.asDiagonal() * c_ref * inv_d.asDiagonal();
    return log_sq_spectrum(c_i, b);
}

}  // namespace

void SolverConfig::validate() const {
    if (!(epsilon > 0.0)) throw InvariantError("SolverConfig: epsilon must be positive");
    if (!(delta > 0.0)) throw InvariantError("SolverConfig: delta must be positive");
    if (max_outer_iterations < 1 || max_fiber_iterations < 1)
        throw InvariantError("SolverConfig: iteration caps must be at least 1");
}

SpdMatrix sym_exp(const SymMatrix& x) { return SpdMatrix(sym_exp_raw(x.entries())); }

SymMatrix sym_log(const SpdMatrix& v) {
    return SymMatrix(sym_log_raw(v.entries(), "sym_log"));
}

SpdMatrix spd_exp_map(const SpdMatrix& p, const SymMatrix& x) {
    check_same_dim(p.dim(), x.dim(), "spd_exp_map");
    const SpectralRoots r = spectral_roots(p.entries());
    const Eigen::MatrixXd inner = sym_exp_raw(r.inv_sqrt * x.entries() * r.inv_sqrt);
    return SpdMatrix(r.sqrt * inner * r.sqrt);
}

SymMatrix spd_log_map(const SpdMatrix& p, const SpdMatrix& v) {
    check_same_dim(p.dim(), v.dim(), "spd_log_map");
    const SpectralRoots r = spectral_roots(p.entries());
    Eigen::MatrixXd inner = r.inv_sqrt * v.entries() * r.inv_sqrt;
    inner = ((inner + inner.transpose()) / 2.0).eval();
    return SymMatrix(r.sqrt * sym_log_raw(inner, "spd_log_map") * r.sqrt);
}

double spd_distance(const SpdMatrix& v, const SpdMatrix& w) {
    check_same_dim(v.dim(), w.dim(), "spd_distance");
    return std::sqrt(log_sq_spectrum(w.entries(), v.entries()));
}

SpdMatrix spd_geodesic(const SpdMatrix& v, const SymMatrix& x, double t) {
    check_same_dim(v.dim(), x.dim(), "spd_geodesic");
    const SpectralRoots r = spectral_roots(v.entries());
    const Eigen::MatrixXd inner = sym_exp_raw(t * (r.inv_sqrt * x.entries() * r.inv_sqrt));
    return SpdMatrix(r.sqrt * inner * r.sqrt);
}

SpdMatrix spd_frechet_mean(const std::vector<SpdMatrix>& matrices,
                           const std::vector<double>& weights, const SolverConfig& cfg) {
    cfg.validate();
    check_weights(matrices.size(), weights, "spd_frechet_mean");
    const int p = matrices.front().dim();
    for (const auto& m : matrices) check_same_dim(p, m.dim(), "spd_frechet_mean");

    SpdMatrix sigma = SpdMatrix::identity(p);
    double residual = 0.0;
    for (int iter = 0; iter < cfg.max_outer_iterations; ++iter) {
        Eigen::MatrixXd tangent = Eigen::MatrixXd::Zero(p, p);
        for (std::size_t i = 0; i < matrices.size(); ++i)
            tangent += weights[i] * spd_log_map(sigma, matrices[i]).entries();
        residual = tangent.norm();
        sigma = spd_exp_map(sigma, SymMatrix(tangent));
        if (residual < cfg.epsilon) return sigma;
    }
    throw ConvergenceError("spd_frechet_mean: no convergence after " +
                               std::to_string(cfg.max_outer_iterations) + " iterations",
                           sigma.entries(), residual);
}

std::vector<double> uniform_weights(std::size_t n) {
    if (n == 0) throw InvariantError("uniform_weights: empty input");
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

CorrMatrix corr_project(const SpdMatrix& sigma) {
    const Eigen::MatrixXd& s = sigma.entries();
    Eigen::VectorXd scale(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        if (!(s(i, i) > 0.0))
            throw NotSpdError("corr_project: nonpositive diagonal entry");
        scale(i) = 1.0 / std::sqrt(s(i, i));
    }
    Eigen::MatrixXd c = scale.asDiagonal() * s * scale.asDiagonal();
    for (Eigen::Index i = 0; i < c.rows(); ++i) c(i, i) = 1.0;
    return CorrMatrix(std::move(c));
}

PositiveDiagonal fiber_optimize(const CorrMatrix& c_ref, const CorrMatrix& c_i,
                                const SolverConfig& cfg) {
    cfg.validate();
    check_same_dim(c_ref.dim(), c_i.dim(), "fiber_optimize");
    const int p = c_ref.dim();
    const Eigen::MatrixXd& ref = c_ref.entries();
    const Eigen::MatrixXd& obs = c_i.entries();
    const Eigen::MatrixXd ref_inv = ref.llt().solve(Eigen::MatrixXd::Identity(p, p));

    Eigen::VectorXd d = Eigen::VectorXd::Ones(p);
    double objective = fiber_objective(obs, ref, d);
    Eigen::VectorXd prev_log_d;
    Eigen::VectorXd prev_exponent;

    for (int iter = 0; iter < cfg.max_fiber_iterations; ++iter) {
        // Gradient of g at D: K = Log(c_i D ref^{-1} D), descent exponent 2 K_jj.
        // The non-symmetric Log is evaluated through the Cholesky congruence
        // c_i S = L^{-T} (L^T c_i L) L^T with S = D ref^{-1} D = L L^T.
        const Eigen::MatrixXd s = d.asDiagonal() * ref_inv * d.asDiagonal();
        const Eigen::LLT<Eigen::MatrixXd> llt(s);
        const Eigen::MatrixXd l = llt.matrixL();
        const Eigen::MatrixXd m = l.transpose() * obs * l;
        const Eigen::MatrixXd log_m = sym_log_raw(((m + m.transpose()) / 2.0).eval(),
                                                  "fiber_optimize");
        const Eigen::MatrixXd k =
            l.transpose().triangularView<Eigen::Upper>().solve(log_m) * l.transpose();

        Eigen::VectorXd exponent(p);           // per unit step size
        double grad_norm_sq = 0.0;
        for (int j = 0; j < p; ++j) {
            exponent(j) = 2.0 * k(j, j);
            const double delta_jj = 2.0 * d(j) * k(j, j);
            grad_norm_sq += delta_jj * delta_jj;
        }
        if (!std::isfinite(grad_norm_sq))
            throw OptimizationError("fiber_optimize: gradient not finite");
        if (std::sqrt(grad_norm_sq) < cfg.epsilon) break;

        // Barzilai-Borwein step length when curvature information exists,
        // otherwise the configured delta; halving keeps the objective monotone.
        double step = cfg.delta;
        const Eigen::VectorXd log_d = d.array().log();
        if (prev_log_d.size() == p) {
            const Eigen::VectorXd dx = log_d - prev_log_d;
            const Eigen::VectorXd dg = exponent - prev_exponent;
            const double denom = dg.squaredNorm();
            if (denom > 0.0) {
                const double bb = std::abs(dx.dot(dg)) / denom;
                if (std::isfinite(bb) && bb > 0.0) step = bb;
            }
        }
        prev_log_d = log_d;
        prev_exponent = exponent;

        bool accepted = false;
        double best_trial = std::numeric_limits<double>::infinity();
        for (int halving = 0; halving <= 30; ++halving) {
            const Eigen::VectorXd trial = d.array() * (-step * exponent.array()).exp();
            if (!trial.allFinite() || trial.minCoeff() <= 1e-150) {
                step /= 2.0;
                continue;
            }
            const double trial_objective = fiber_objective(obs, ref, trial);
            if (trial_objective <= objective) {
                d = trial;
                objective = trial_objective;
                accepted = true;
                break;
            }
            best_trial = std::min(best_trial, trial_objective);
            step /= 2.0;
        }
        if (!accepted) {
            // Flat within double precision: the floor has been reached.
            if (best_trial <= objective * (1.0 + 1e-12) + 1e-15) break;
            throw OptimizationError(
                "fiber_optimize: objective kept increasing through 30 step halvings");
        }
    }
    return PositiveDiagonal(d);
}

double corr_distance(const CorrMatrix& c1, const CorrMatrix& c2, const SolverConfig& cfg) {
    const PositiveDiagonal d_star = fiber_optimize(c1, c2, cfg);
    return spd_distance(c1.as_spd(), SpdMatrix(d_star.conjugate(c2.entries())));
}

CorrMatrix corr_frechet_mean(const std::vector<CorrMatrix>& matrices,
                             const std::vector<double>& weights, const SolverConfig& cfg,
                             const std::optional<CorrMatrix>& init, double* residual_out) {
    cfg.validate();
    check_weights(matrices.size(), weights, "corr_frechet_mean");
    const int p = matrices.front().dim();
    for (const auto& m : matrices) check_same_dim(p, m.dim(), "corr_frechet_mean");
    if (init) check_same_dim(p, init->dim(), "corr_frechet_mean");

    CorrMatrix c = init ? *init : CorrMatrix::identity(p);
    double residual = 0.0;
    for (int iter = 0; iter < cfg.max_outer_iterations; ++iter) {
        const SpdMatrix base = c.as_spd();
        Eigen::MatrixXd tangent = Eigen::MatrixXd::Zero(p, p);
        for (std::size_t i = 0; i < matrices.size(); ++i) {
            const PositiveDiagonal d_star = fiber_optimize(c, matrices[i], cfg);
            const SpdMatrix rep(d_star.conjugate(matrices[i].entries()));
            tangent += weights[i] * spd_log_map(base, rep).entries();
        }
        residual = tangent.norm();
        c = corr_project(spd_exp_map(base, SymMatrix(tangent)));
        if (residual < cfg.epsilon) {
            if (residual_out) *residual_out = residual;
            return c;
        }
    }
    throw ConvergenceError("corr_frechet_mean: no convergence after " +
                               std::to_string(cfg.max_outer_iterations) + " iterations",
                           c.entries(), residual);
}

}  // namespace lvlmc
