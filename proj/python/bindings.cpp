#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lvlmc/manifold.hpp"
#include "lvlmc/pipeline.hpp"

namespace py = pybind11;
using namespace lvlmc;

namespace {

std::vector<Point3> to_points(const py::array_t<double>& array) {
    const auto buf = array.unchecked<2>();
    if (buf.shape(1) != 3) throw DimensionError("points must be an (n, 3) array");
    std::vector<Point3> pts(static_cast<std::size_t>(buf.shape(0)));
    for (py::ssize_t i = 0; i < buf.shape(0); ++i)
        pts[static_cast<std::size_t>(i)] = {buf(i, 0), buf(i, 1), buf(i, 2)};
    return pts;
}

VariogramModel model_from_args(double range, double sill, double nugget,
                               const std::string& type) {
    VariogramModel model;
    model.nugget = nugget;
    model.structures.push_back({structure_from_string(type), range, sill});
    model.validate();
    return model;
}

}  // namespace

PYBIND11_MODULE(_lvlmc, m) {
    m.doc() = "locally varying coregionalization simulation core";
    m.attr("__version__") = kToolVersion;

    py::register_exception<Error>(m, "LvlmcError");

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("epsilon", &SolverConfig::epsilon)
        .def_readwrite("delta", &SolverConfig::delta)
        .def_readwrite("max_outer_iterations", &SolverConfig::max_outer_iterations)
        .def_readwrite("max_fiber_iterations", &SolverConfig::max_fiber_iterations);

    // manifold operations on plain arrays
    m.def("sym_exp",
          [](const Eigen::MatrixXd& x) { return sym_exp(SymMatrix(x)).entries(); },
          py::arg("x"));
    m.def("sym_log",
          [](const Eigen::MatrixXd& v) { return sym_log(SpdMatrix(v)).entries(); },
          py::arg("v"));
    m.def(
        "spd_exp_map",
        [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& x) {
            return spd_exp_map(SpdMatrix(p), SymMatrix(x)).entries();
        },
        py::arg("p"), py::arg("x"));
    m.def(
        "spd_log_map",
        [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& v) {
            return spd_log_map(SpdMatrix(p), SpdMatrix(v)).entries();
        },
        py::arg("p"), py::arg("v"));
    m.def(
        "spd_distance",
        [](const Eigen::MatrixXd& v, const Eigen::MatrixXd& w) {
            return spd_distance(SpdMatrix(v), SpdMatrix(w));
        },
        py::arg("v"), py::arg("w"));
    m.def(
        "spd_geodesic",
        [](const Eigen::MatrixXd& v, const Eigen::MatrixXd& x, double t) {
            return spd_geodesic(SpdMatrix(v), SymMatrix(x), t).entries();
        },
        py::arg("v"), py::arg("x"), py::arg("t"));
    m.def(
        "spd_frechet_mean",
        [](const std::vector<Eigen::MatrixXd>& mats, const std::vector<double>& weights,
           const SolverConfig& cfg) {
            std::vector<SpdMatrix> wrapped;
            wrapped.reserve(mats.size());
            for (const auto& mat : mats) wrapped.push_back(SpdMatrix(mat));
            return spd_frechet_mean(wrapped, weights, cfg).entries();
        },
        py::arg("matrices"), py::arg("weights"), py::arg("config") = SolverConfig{});
    m.def("corr_project",
          [](const Eigen::MatrixXd& s) { return corr_project(SpdMatrix(s)).entries(); },
          py::arg("sigma"));
    m.def(
        "fiber_optimize",
        [](const Eigen::MatrixXd& c_ref, const Eigen::MatrixXd& c_i, const SolverConfig& cfg) {
            return fiber_optimize(CorrMatrix(c_ref), CorrMatrix(c_i), cfg).entries();
        },
        py::arg("c_ref"), py::arg("c_i"), py::arg("config") = SolverConfig{});
    m.def(
        "corr_distance",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SolverConfig& cfg) {
            return corr_distance(CorrMatrix(a), CorrMatrix(b), cfg);
        },
        py::arg("c1"), py::arg("c2"), py::arg("config") = SolverConfig{});
    m.def(
        "corr_frechet_mean",
        [](const std::vector<Eigen::MatrixXd>& mats, const std::vector<double>& weights,
           const SolverConfig& cfg) {
            std::vector<CorrMatrix> wrapped;
            wrapped.reserve(mats.size());
            for (const auto& mat : mats) wrapped.push_back(CorrMatrix(mat));
            return corr_frechet_mean(wrapped, weights, cfg).entries();
        },
        py::arg("matrices"), py::arg("weights"), py::arg("config") = SolverConfig{});

    // transforms
    py::class_<AnamorphosisTable>(m, "AnamorphosisTable")
        .def_property_readonly("raw", &AnamorphosisTable::raw)
        .def_property_readonly("gaussian", &AnamorphosisTable::gaussian)
        .def("__len__", &AnamorphosisTable::size);
    m.def(
        "build_anamorphosis",
        [](const std::vector<double>& values, std::uint64_t seed) {
            return build_anamorphosis(values, seed);
        },
        py::arg("values"), py::arg("seed") = 0);
    m.def("gaussianize", &gaussianize, py::arg("table"), py::arg("z"));
    m.def("back_transform", &back_transform, py::arg("table"), py::arg("y"));
    m.def(
        "nataf_cdf",
        [](const Eigen::MatrixXd& c, const std::vector<AnamorphosisTable>& tables,
           const std::vector<double>& z) { return nataf_cdf(CorrMatrix(c), tables, z); },
        py::arg("correlation"), py::arg("tables"), py::arg("z"));
    m.def(
        "alr_forward",
        [](const std::vector<double>& parts, double closure) {
            Composition c;
            c.parts = parts;
            c.closure = closure;
            return alr_forward(c);
        },
        py::arg("parts"), py::arg("closure") = 100.0);
    m.def(
        "alr_inverse",
        [](const std::vector<double>& x, double closure) {
            return alr_inverse(x, closure).parts;
        },
        py::arg("x"), py::arg("closure") = 100.0);

    // variograms and kriging
    py::class_<VariogramModel>(m, "VariogramModel")
        .def_property_readonly("nugget", [](const VariogramModel& v) { return v.nugget; })
        .def_property_readonly("total_sill", &VariogramModel::total_sill)
        .def_property_readonly(
            "structures",
            [](const VariogramModel& v) {
                std::vector<std::tuple<std::string, double, double>> out;
                for (const auto& s : v.structures)
                    out.push_back({to_string(s.type), s.range, s.sill});
                return out;
            })
        .def("gamma", &VariogramModel::gamma, py::arg("h"));
    m.def("variogram_model", &model_from_args, py::arg("range"), py::arg("sill") = 1.0,
          py::arg("nugget") = 0.0, py::arg("type") = "exponential");
    m.def("covariance_eval", &covariance_eval, py::arg("model"), py::arg("h"));
    m.def(
        "experimental_variogram",
        [](const py::array_t<double>& locations, const std::vector<double>& vi,
           const std::vector<double>& vj, double lag_width, int n_lags) {
            const auto vario =
                experimental_variogram(to_points(locations), vi, vj, lag_width, n_lags);
            return py::make_tuple(vario.lag_centers, vario.gamma, vario.pairs);
        },
        py::arg("locations"), py::arg("values_i"), py::arg("values_j"), py::arg("lag_width"),
        py::arg("n_lags"));
    m.def(
        "fit_exponential",
        [](const std::vector<double>& lags, const std::vector<double>& gamma,
           const std::vector<long>& pairs) {
            ExperimentalVariogram vario;
            vario.lag_centers = lags;
            vario.gamma = gamma;
            vario.pairs = pairs;
            return fit_exponential(vario);
        },
        py::arg("lag_centers"), py::arg("gamma"), py::arg("pairs"));
    m.def(
        "ordinary_kriging_weights",
        [](const VariogramModel& model, const py::array_t<double>& neighbors,
           const std::vector<double>& target) {
            if (target.size() != 3) throw DimensionError("target must have 3 coordinates");
            const auto res = ordinary_kriging_weights(model, to_points(neighbors),
                                                      {target[0], target[1], target[2]});
            return py::make_tuple(res.weights, res.lagrange, res.variance);
        },
        py::arg("model"), py::arg("neighbors"), py::arg("target"));

    // spatial index
    py::class_<SpatialIndex>(m, "SpatialIndex")
        .def(py::init([](const py::array_t<double>& locations) {
                 return SpatialIndex(to_points(locations));
             }),
             py::arg("locations"))
        .def("__len__", &SpatialIndex::size)
        .def(
            "knn",
            [](const SpatialIndex& index, const std::vector<double>& query, int k) {
                if (query.size() != 3) throw DimensionError("query must have 3 coordinates");
                const auto res = index.knn({query[0], query[1], query[2]}, k);
                std::vector<int> ids;
                std::vector<double> dists;
                for (const auto& nb : res.neighbors) {
                    ids.push_back(nb.id);
                    dists.push_back(nb.distance);
                }
                return py::make_tuple(ids, dists, res.capped);
            },
            py::arg("query"), py::arg("k"));

    // simulation
    m.def(
        "turning_bands",
        [](const VariogramModel& model, const py::array_t<double>& points, int n_lines,
           std::uint64_t seed, std::uint64_t realization, std::uint64_t factor, int threads) {
            return turning_bands(model, to_points(points), n_lines,
                                 StreamKey{seed, realization, factor}, threads);
        },
        py::arg("model"), py::arg("points"), py::arg("n_lines") = 1200, py::arg("seed") = 0,
        py::arg("realization") = 0, py::arg("factor") = 0, py::arg("threads") = 1);

    m.def("error_metrics",
          [](const std::vector<double>& predicted, const std::vector<double>& truth) {
              const auto m2 = error_metrics(predicted, truth);
              return py::make_tuple(m2.me, m2.mae, m2.rmse);
          });
    m.def(
        "accuracy_plot_data",
        [](const Eigen::MatrixXd& realizations, const std::vector<double>& truth) {
            return accuracy_plot_data(realizations, truth);
        },
        py::arg("realizations"), py::arg("truth"));

    // pipeline entry points
    m.def(
        "run_pipeline",
        [](const std::string& config_path) {
            const auto cfg = PipelineConfig::from_json_file(config_path);
            const auto result = run_pipeline(cfg);
            py::dict out;
            out["samples"] = result.models.size();
            out["masked_nodes"] = result.field.count(NodeFlag::unestimated);
            out["fallback_nodes"] = result.field.count(NodeFlag::fallback);
            out["mean"] = result.mean;
            out["factor_variances"] = result.factor_variances;
            out["output_dir"] = cfg.output_dir;
            return out;
        },
        py::arg("config_path"));
    m.def(
        "run_inference",
        [](const std::string& config_path) {
            const auto cfg = PipelineConfig::from_json_file(config_path);
            const auto result = run_inference(cfg);
            py::dict out;
            out["samples"] = result.models.size();
            out["factor_variances"] = result.factor_variances;
            out["output_dir"] = cfg.output_dir;
            return out;
        },
        py::arg("config_path"));
}
