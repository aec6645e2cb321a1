#include "lvlmc/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "lvlmc/parallel.hpp"
#include "lvlmc/rng.hpp"

namespace lvlmc {

namespace {

constexpr std::uint64_t kRotationTag = 0x726f7461ULL;   // line fan rotation stream
constexpr std::uint64_t kLineTag = 0x6c696e65ULL;       // per-line spectral stream
constexpr std::uint64_t kNuggetTag = 0x6e756767ULL;     // per-point nugget stream

struct Line {
    Point3 direction;
    double frequency;
    double phase;
};

/// 3x3 rotation from a seeded uniform quaternion.
std::array<std::array<double, 3>, 3> random_rotation(Rng& rng) {
    // Shoemake's method from three uniforms.
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double qx = a * std::sin(2.0 * M_PI * u2);
    const double qy = a * std::cos(2.0 * M_PI * u2);
    const double qz = b * std::sin(2.0 * M_PI * u3);
    const double qw = b * std::cos(2.0 * M_PI * u3);
    return {{{1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)},
             {2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)},
             {2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)}}};
}

/// Spectral frequency for the 1-d process whose line covariance integrates
/// to the 3-d exponential model: density proportional to w^2/(a^2+w^2)^2,
/// sampled as a tan(theta) with theta from sin^2 by rejection.
double sample_exponential_frequency(double a, Rng& rng) {
    while (true) {
        const double theta = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
        const double s = std::sin(theta);
        if (rng.uniform() < s * s) return a * std::tan(theta);
    }
}

std::uint64_t hash_position(const Point3& point) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (double c : point) {
        // quantize to a nanometer so equal positions share their nugget draw
        const auto q = static_cast<std::int64_t>(std::llround(c * 1e9));
        h ^= static_cast<std::uint64_t>(q) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

}  // namespace

std::vector<double> turning_bands(const VariogramModel& model,
                                  const std::vector<Point3>& points, int n_lines,
                                  const StreamKey& key, int threads) {
    model.validate();
    if (n_lines < 100) throw InvariantError("turning_bands: need at least 100 lines");
    if (std::abs(model.total_sill() - 1.0) > 1e-6)
        throw InvariantError("turning_bands: model must have unit total sill");
    if (model.structures.size() != 1)
        throw InvariantError("turning_bands: exactly one structure plus nugget supported");
    const Structure& structure = model.structures.front();
    if (structure.type != StructureType::exponential)
        throw InvariantError("turning_bands: unsupported structure type " +
                             to_string(structure.type));

    const double a = 3.0 / structure.range;
    const double nugget = model.nugget;
    const double sill = structure.sill;

    // Fibonacci fan rotated by a keyed rotation: even directional coverage,
    // independent across realizations.
    Rng rot_rng(key.seed ^ kRotationTag, key.realization, key.factor);
    const auto rot = random_rotation(rot_rng);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    std::vector<Line> lines(static_cast<std::size_t>(n_lines));
    for (int l = 0; l < n_lines; ++l) {
        const double z = 1.0 - 2.0 * (l + 0.5) / n_lines;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double az = golden * l;
        const Point3 raw = {r * std::cos(az), r * std::sin(az), z};
        Point3 dir;
        for (int c = 0; c < 3; ++c)
            dir[static_cast<std::size_t>(c)] = rot[static_cast<std::size_t>(c)][0] * raw[0] +
                                               rot[static_cast<std::size_t>(c)][1] * raw[1] +
                                               rot[static_cast<std::size_t>(c)][2] * raw[2];
        Rng line_rng(key.seed ^ kLineTag, key.realization, key.factor,
                     static_cast<std::uint64_t>(l) + 1);
        lines[static_cast<std::size_t>(l)] = {dir, sample_exponential_frequency(a, line_rng),
                                              line_rng.uniform(0.0, 2.0 * M_PI)};
    }

    const double amplitude = std::sqrt(2.0 * sill / static_cast<double>(n_lines));
    std::vector<double> field(points.size(), 0.0);
    parallel_for(static_cast<int>(points.size()), threads, [&](int i) {
        const Point3& u = points[static_cast<std::size_t>(i)];
        double acc = 0.0;
        for (const Line& line : lines) {
            const double t = u[0] * line.direction[0] + u[1] * line.direction[1] +
                             u[2] * line.direction[2];
            acc += std::cos(line.frequency * t + line.phase);
        }
        double value = amplitude * acc;
        if (nugget > 0.0) {
            Rng nugget_rng(key.seed ^ kNuggetTag, key.realization, key.factor,
                           hash_position(u));
            value += std::sqrt(nugget) * nugget_rng.normal();
        }
        field[static_cast<std::size_t>(i)] = value;
    });
    return field;
}

std::vector<double> turning_bands(const VariogramModel& model, const Grid& grid,
                                  int n_lines, std::uint64_t seed, int threads) {
    grid.validate();
    return turning_bands(model, grid.nodes(), n_lines, StreamKey{seed, 0, 0}, threads);
}

ConditioningPlan build_conditioning_plan(const VariogramModel& model,
                                         const std::vector<Point3>& targets,
                                         const SpatialIndex& data_index,
                                         const SearchParams& search, int threads) {
    ConditioningPlan plan;
    plan.neighbor_ids.resize(targets.size());
    plan.weights.resize(targets.size());
    parallel_for(static_cast<int>(targets.size()), threads, [&](int t) {
        const auto st = static_cast<std::size_t>(t);
        const auto found = data_index.radius(targets[st], search.radius, search.max_samples);
        if (found.empty()) return;
        std::vector<Point3> locs;
        locs.reserve(found.size());
        std::vector<int> ids;
        ids.reserve(found.size());
        for (const auto& nb : found) {
            ids.push_back(nb.id);
            locs.push_back(data_index.location(nb.id));
        }
        const KrigingResult kriged = ordinary_kriging_weights(model, locs, targets[st]);
        plan.neighbor_ids[st] = std::move(ids);
        plan.weights[st] = kriged.weights;
    });
    return plan;
}

std::vector<double> apply_conditioning(const std::vector<double>& unconditional,
                                       const ConditioningPlan& plan,
                                       const std::vector<double>& data_values,
                                       const std::vector<double>& unconditional_at_data) {
    if (unconditional.size() != plan.neighbor_ids.size())
        throw DimensionError("apply_conditioning: field/plan size mismatch");
    if (data_values.size() != unconditional_at_data.size())
        throw DimensionError("apply_conditioning: data/unconditional-at-data size mismatch");
    std::vector<double> out(unconditional);
    for (std::size_t t = 0; t < out.size(); ++t) {
        const auto& ids = plan.neighbor_ids[t];
        if (ids.empty()) continue;
        const Eigen::VectorXd& w = plan.weights[t];
        double shift = 0.0;
        for (std::size_t j = 0; j < ids.size(); ++j) {
            const auto id = static_cast<std::size_t>(ids[j]);
            shift += w(static_cast<Eigen::Index>(j)) *
                     (data_values[id] - unconditional_at_data[id]);
        }
        out[t] += shift;
    }
    return out;
}

std::vector<double> condition(const std::vector<double>& unconditional,
                              const std::vector<Point3>& targets,
                              const SpatialIndex& data_index,
                              const std::vector<double>& data_values,
                              const std::vector<double>& unconditional_at_data,
                              const VariogramModel& model, const SearchParams& search,
                              int threads) {
    const ConditioningPlan plan =
        build_conditioning_plan(model, targets, data_index, search, threads);
    return apply_conditioning(unconditional, plan, data_values, unconditional_at_data);
}

int CorrelationField::count(NodeFlag flag) const {
    int n = 0;
    for (NodeFlag f : flags) n += (f == flag) ? 1 : 0;
    return n;
}

CorrelationField interpolate_correlation_field(const std::vector<LocalModel>& models,
                                               const SpatialIndex& sample_index,
                                               const std::vector<Point3>& points,
                                               const VariogramModel& model,
                                               const SearchParams& search,
                                               const SolverConfig& solver, int threads) {
    if (models.empty())
        throw InvariantError("interpolate_correlation_field: no local models");
    const int p = models.front().corr.dim();
    CorrelationField field;
    field.matrices.assign(points.size(), CorrMatrix::identity(p));
    field.residuals.assign(points.size(), 0.0);
    field.flags.assign(points.size(), NodeFlag::unestimated);

    parallel_for(static_cast<int>(points.size()), threads, [&](int t) {
        const auto st = static_cast<std::size_t>(t);
        const auto found =
            sample_index.radius(points[st], search.radius, search.max_samples);
        if (found.empty()) return;  // stays flagged unestimated

        std::vector<Point3> locs;
        std::vector<CorrMatrix> obs;
        locs.reserve(found.size());
        obs.reserve(found.size());
        for (const auto& nb : found) {
            locs.push_back(sample_index.location(nb.id));
            obs.push_back(models[static_cast<std::size_t>(nb.id)].corr);
        }
        if (found.size() == 1) {
            field.matrices[st] = obs.front();
            field.flags[st] = NodeFlag::ok;
            return;
        }
        const KrigingResult kriged = ordinary_kriging_weights(model, locs, points[st]);
        std::vector<double> weights(kriged.weights.data(),
                                    kriged.weights.data() + kriged.weights.size());
        const CorrMatrix& warm = obs.front();  // nearest sample's correlation
        try {
            field.matrices[st] =
                corr_frechet_mean(obs, weights, solver, warm, &field.residuals[st]);
            field.flags[st] = NodeFlag::ok;
        } catch (const ConvergenceError& err) {
            field.matrices[st] = CorrMatrix(err.last_iterate());
            field.residuals[st] = err.residual();
            field.flags[st] = NodeFlag::fallback;
        }
    });
    return field;
}

void write_correlation_field_csv(std::ostream& out, const CorrelationField& field) {
    if (field.matrices.empty()) return;
    const int p = field.matrices.front().dim();
    out << "node";
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) out << ",corr_" << i + 1 << "_" << j + 1;
    out << ",residual,flag\n";
    char buf[40];
    for (std::size_t t = 0; t < field.matrices.size(); ++t) {
        out << t;
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", field.matrices[t].entries()(i, j));
                out << "," << buf;
            }
        std::snprintf(buf, sizeof(buf), "%.3e", field.residuals[t]);
        out << "," << buf << "," << static_cast<int>(field.flags[t]) << "\n";
    }
}

}  // namespace lvlmc
