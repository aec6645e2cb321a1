#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "lvlmc/matrices.hpp"

namespace lvlmc {

/// Knobs for the iterative manifold solvers. epsilon is the tangent-residual
/// (and fiber gradient-norm) stopping threshold, delta the fiber descent
/// step size.
struct SolverConfig {
    double epsilon = 1e-8;
    double delta = 0.1;
    int max_outer_iterations = 200;
    int max_fiber_iterations = 500;

    void validate() const;
};

/// Matrix exponential of a symmetric matrix via spectral decomposition.
SpdMatrix sym_exp(const SymMatrix& x);

/// Principal matrix logarithm of an SPD matrix via spectral decomposition.
SymMatrix sym_log(const SpdMatrix& v);

/// Riemannian exponential map at P: P^{1/2} Exp(P^{-1/2} X P^{-1/2}) P^{1/2}.
SpdMatrix spd_exp_map(const SpdMatrix& p, const SymMatrix& x);

/// Riemannian logarithmic map at P: P^{1/2} Log(P^{-1/2} V P^{-1/2}) P^{1/2}.
SymMatrix spd_log_map(const SpdMatrix& p, const SpdMatrix& v);

/// Affine-invariant geodesic distance ||Log(V^{-1/2} W V^{-1/2})||_F.
double spd_distance(const SpdMatrix& v, const SpdMatrix& w);

/// Geodesic through V with initial direction X, evaluated at parameter t.
SpdMatrix spd_geodesic(const SpdMatrix& v, const SymMatrix& x, double t);

/// Weighted Fréchet mean on the SPD manifold by tangent-space fixed-point
/// iteration started at the identity. Weights must sum to 1 (1e-10).
/// Throws ConvergenceError carrying the last iterate on failure.
SpdMatrix spd_frechet_mean(const std::vector<SpdMatrix>& matrices,
                           const std::vector<double>& weights,
                           const SolverConfig& cfg = {});

/// Equal weights 1/n.
std::vector<double> uniform_weights(std::size_t n);

/// Quotient projection Sym+(p) -> Corr(p): D Sigma D with D = (I o Sigma)^{-1/2}.
CorrMatrix corr_project(const SpdMatrix& sigma);

/// Minimizes g(D) = d^2(c_ref, D c_i D) over positive diagonals by gradient
/// descent in the scaling group, with step-halving on objective increase.
/// Returns the optimal fiber representative scaling.
PositiveDiagonal fiber_optimize(const CorrMatrix& c_ref, const CorrMatrix& c_i,
                                const SolverConfig& cfg = {});

/// Quotient distance on Corr(p): the SPD distance to the optimal fiber
/// representative of c2 with respect to c1.
double corr_distance(const CorrMatrix& c1, const CorrMatrix& c2,
                     const SolverConfig& cfg = {});

/// Weighted Fréchet mean on Corr(p). Each outer iteration (1) fiber-optimizes
/// every observation against the current iterate, (2) takes the weighted
/// tangent-space mean in Sym+ and maps it back, (3) re-projects onto Corr(p).
/// Closed under any weights summing to 1, negative weights included.
/// init, when given, replaces the identity starting point (warm start);
/// residual_out, when given, receives the final tangent residual.
CorrMatrix corr_frechet_mean(const std::vector<CorrMatrix>& matrices,
                             const std::vector<double>& weights,
                             const SolverConfig& cfg = {},
                             const std::optional<CorrMatrix>& init = std::nullopt,
                             double* residual_out = nullptr);

}  // namespace lvlmc
