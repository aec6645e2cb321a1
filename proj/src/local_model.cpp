#include "lvlmc/local_model.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "lvlmc/parallel.hpp"
#include "lvlmc/transform.hpp"

namespace lvlmc {

namespace {

/// Plain lower Cholesky with pivot control; returns false on a pivot <= 0.
bool try_cholesky(const Eigen::MatrixXd& a, Eigen::MatrixXd& l) {
    const int n = static_cast<int>(a.rows());
    l = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0)) return false;
        l(j, j) = std::sqrt(diag);
        for (int i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    return true;
}

}  // namespace

Eigen::MatrixXd cholesky(const CorrMatrix& c) {
    Eigen::MatrixXd l;
    if (try_cholesky(c.entries(), l)) return l;
    // One shrink toward the identity, then give up.
    const int p = c.dim();
    const Eigen::MatrixXd shrunk = (1.0 - 1e-8) * c.entries() +
                                   1e-8 * Eigen::MatrixXd::Identity(p, p);
    if (try_cholesky(shrunk, l)) return l;
    throw NotSpdError("cholesky: matrix not positive definite even after shrinking");
}

Eigen::VectorXd decorrelate(const Eigen::VectorXd& y, const Eigen::MatrixXd& chol) {
    const int p = static_cast<int>(chol.rows());
    if (y.size() != p) throw DimensionError("decorrelate: vector/factor size mismatch");
    Eigen::VectorXd out(p);
    for (int i = 0; i < p; ++i) {
        double v = y(i);
        for (int k = 0; k < i; ++k) v -= chol(i, k) * out(k);
        if (chol(i, i) == 0.0) throw NotSpdError("decorrelate: zero diagonal pivot");
        out(i) = v / chol(i, i);
    }
    return out;
}

LocalModel infer_local_correlation(const SampleSet& samples, const SpatialIndex& index,
                                   int alpha, const LocalInferenceConfig& cfg) {
    samples.validate();
    const int p = samples.attribute_count();
    if (p < 2) throw InvariantError("infer_local_correlation: need at least two variables");
    if (alpha < 0 || alpha >= samples.count())
        throw InvariantError("infer_local_correlation: sample id out of range");

    const auto knn = index.knn(samples.locations[static_cast<std::size_t>(alpha)],
                               std::min(cfg.k, samples.count()));
    const int n = static_cast<int>(knn.neighbors.size());

    // Local gaussian transformation, one table per variable, neighborhood only.
    Eigen::MatrixXd scores(n, p);
    Eigen::VectorXd center_scores(p);
    std::vector<double> column(static_cast<std::size_t>(n));
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < n; ++i)
            column[static_cast<std::size_t>(i)] = samples.values(knn.neighbors[static_cast<std::size_t>(i)].id, j);
        double lo = column[0], hi = column[0];
        for (double v : column) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo))
            throw DegenerateDataError("infer_local_correlation: variable '" +
                                      samples.variable_names[static_cast<std::size_t>(j)] +
                                      "' is constant within the neighborhood of sample " +
                                      std::to_string(alpha));
        const auto table = build_anamorphosis(
            column, cfg.seed + 0x9e37ULL * static_cast<std::uint64_t>(j));
        for (int i = 0; i < n; ++i) scores(i, j) = gaussianize(table, column[static_cast<std::size_t>(i)]);
        center_scores(j) = gaussianize(table, samples.values(alpha, j));
    }

    // Pearson correlation of the gaussianized neighborhood.
    const Eigen::RowVectorXd mean = scores.colwise().mean();
    const Eigen::MatrixXd centered = scores.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    Eigen::VectorXd scale(p);
    for (int j = 0; j < p; ++j) {
        if (!(cov(j, j) > 0.0))
            throw DegenerateDataError("infer_local_correlation: variable '" +
                                      samples.variable_names[static_cast<std::size_t>(j)] +
                                      "' has zero variance after gaussianization");
        scale(j) = 1.0 / std::sqrt(cov(j, j));
    }
    Eigen::MatrixXd corr = scale.asDiagonal() * cov * scale.asDiagonal();
    for (int j = 0; j < p; ++j) corr(j, j) = 1.0;

    // Floor the spectrum by shrinking toward the identity when needed.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr, Eigen::EigenvaluesOnly);
    const double lo_eig = es.eigenvalues().minCoeff();
    if (lo_eig < cfg.eigenvalue_floor) {
        const double shrink =
            (cfg.eigenvalue_floor - lo_eig) / std::max(1e-30, 1.0 - lo_eig);
        corr = (1.0 - shrink) * corr + shrink * Eigen::MatrixXd::Identity(p, p);
        for (int j = 0; j < p; ++j) corr(j, j) = 1.0;
    }

    LocalModel model{corr_project(SpdMatrix(corr))};
    model.sample = alpha;
    model.neighbors.reserve(static_cast<std::size_t>(n));
    for (const auto& nb : knn.neighbors) model.neighbors.push_back(nb.id);
    model.chol = cholesky(model.corr);
    model.gaussian = center_scores;
    model.factors = decorrelate(center_scores, model.chol);
    return model;
}

std::vector<LocalModel> infer_all_local_models(const SampleSet& samples,
                                               const SpatialIndex& index,
                                               const LocalInferenceConfig& cfg, int threads) {
    std::vector<LocalModel> models(static_cast<std::size_t>(samples.count()),
                                   LocalModel{CorrMatrix::identity(
                                       std::max(2, samples.attribute_count()))});
    parallel_for(samples.count(), threads, [&](int alpha) {
        models[static_cast<std::size_t>(alpha)] =
            infer_local_correlation(samples, index, alpha, cfg);
    });
    return models;
}

void write_local_models_csv(std::ostream& out, const std::vector<LocalModel>& models) {
    if (models.empty()) return;
    const int p = models.front().corr.dim();
    out << "sample";
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) out << ",corr_" << i + 1 << "_" << j + 1;
    for (int i = 0; i < p; ++i) out << ",factor_" << i + 1;
    out << "\n";
    char buf[40];
    for (const auto& model : models) {
        out << model.sample;
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", model.corr.entries()(i, j));
                out << "," << buf;
            }
        for (int i = 0; i < p; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", model.factors(i));
            out << "," << buf;
        }
        out << "\n";
    }
}

}  // namespace lvlmc
