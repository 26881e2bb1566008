#include "geokernel/commands.hpp"
#include "geokernel/config.hpp"
#include "geokernel/dataset_io.hpp"
#include "geokernel/errors.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace geokernel;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (n, d) array with d <= 3 to points padded with zeros.
std::vector<Vec3> to_points(const Array& a) {
    if (a.ndim() != 2 || a.shape(1) < 1 || a.shape(1) > 3) throw ValidationError("points must have shape (n, 1..3)");
    const auto v = a.unchecked<2>();
    std::vector<Vec3> out(static_cast<std::size_t>(a.shape(0)), Vec3::Zero());
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        for (py::ssize_t c = 0; c < a.shape(1); ++c) out[std::size_t(i)][c] = v(i, c);
    return out;
}

Vec3 to_vec(const Array& a) {
    if (a.ndim() != 1 || a.shape(0) < 1 || a.shape(0) > 3) throw ValidationError("vector must have 1..3 entries");
    Vec3 out = Vec3::Zero();
    for (py::ssize_t c = 0; c < a.shape(0); ++c) out[c] = a.at(c);
    return out;
}

Array from_vec(const Vec3& v, int amb) {
    Array out(amb);
    for (int c = 0; c < amb; ++c) out.mutable_at(c) = v[c];
    return out;
}

Array from_points(const std::vector<Vec3>& p, int amb) {
    Array out({static_cast<py::ssize_t>(p.size()), static_cast<py::ssize_t>(amb)});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < p.size(); ++i)
        for (int c = 0; c < amb; ++c) v(py::ssize_t(i), c) = p[i][c];
    return out;
}

// Stack of point sets as an (..., n, amb) array.
template <class Outer, class Get>
Array stack(const Outer& outer, std::size_t n, int amb, Get get) {
    Array out({static_cast<py::ssize_t>(outer.size()), static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(amb)});
    auto v = out.mutable_unchecked<3>();
    for (std::size_t s = 0; s < outer.size(); ++s) {
        const std::vector<Vec3>& p = get(outer[s]);
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < amb; ++c) v(py::ssize_t(s), py::ssize_t(i), c) = p[i][c];
    }
    return out;
}

int amb_of(const ManifoldDescriptor& d) { return Manifold(d).ambient_dim(); }

// Vectorized evaluation of any r -> value callable.
template <class F>
py::object eval_any(const F& f, py::object r) {
    if (py::isinstance<py::float_>(r) || py::isinstance<py::int_>(r)) return py::float_(f(r.cast<double>()));
    Array a = r.cast<Array>();
    Array out(a.request().shape);
    const double* in = a.data();
    double* o = out.mutable_data();
    for (py::ssize_t j = 0; j < a.size(); ++j) o[j] = f(in[j]);
    return out;
}

}  // namespace

PYBIND11_MODULE(_geokernel, mod) {
    mod.doc() = "Interaction-kernel learning for agent systems on manifolds";

    py::register_exception<ValidationError>(mod, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(mod, "NumericalError", PyExc_ArithmeticError);

    py::enum_<ManifoldKind>(mod, "ManifoldKind")
        .value("Euclidean", ManifoldKind::Euclidean)
        .value("Sphere", ManifoldKind::Sphere)
        .value("PoincareDisk", ManifoldKind::PoincareDisk);
    py::enum_<DistanceConvention>(mod, "DistanceConvention")
        .value("PaperFormula", DistanceConvention::PaperFormula)
        .value("Factor2", DistanceConvention::Factor2);

    py::class_<ManifoldDescriptor>(mod, "ManifoldDescriptor")
        .def_readonly("kind", &ManifoldDescriptor::kind)
        .def_readonly("dim", &ManifoldDescriptor::dim)
        .def_readonly("radius", &ManifoldDescriptor::radius)
        .def_readonly("convention", &ManifoldDescriptor::convention)
        .def_readonly("interaction_cap", &ManifoldDescriptor::interaction_cap);

    py::class_<Manifold>(mod, "Manifold")
        .def_static("euclidean", [](int dim) { return Manifold(ManifoldDescriptor::euclidean(dim)); },
                    py::arg("dim") = 2)
        .def_static(
            "sphere", [](double radius, double cap) { return Manifold(ManifoldDescriptor::sphere(radius, cap)); },
            py::arg("radius") = 5.0 / 3.141592653589793, py::arg("interaction_cap") = 5.0)
        .def_static(
            "poincare",
            [](DistanceConvention c, double cap) { return Manifold(ManifoldDescriptor::poincare(c, cap)); },
            py::arg("convention") = DistanceConvention::PaperFormula, py::arg("interaction_cap") = kInf)
        .def_property_readonly("descriptor", &Manifold::descriptor)
        .def_property_readonly("ambient_dim", &Manifold::ambient_dim)
        .def("distance", [](const Manifold& m, const Array& x, const Array& y) { return m.distance(to_vec(x), to_vec(y)); })
        .def("unit_tangent",
             [](const Manifold& m, const Array& x, const Array& y) {
                 return from_vec(m.unit_tangent(to_vec(x), to_vec(y)), m.ambient_dim());
             })
        .def("norm", [](const Manifold& m, const Array& x, const Array& u) { return m.norm(to_vec(x), to_vec(u)); })
        .def("retract",
             [](const Manifold& m, const Array& x, const Array& s) {
                 return from_vec(m.retract(to_vec(x), to_vec(s)), m.ambient_dim());
             })
        .def("project", [](const Manifold& m, const Array& x) { return from_vec(m.project(to_vec(x)), m.ambient_dim()); })
        .def("contains", [](const Manifold& m, const Array& x) { return m.contains(to_vec(x)); });

    py::class_<PiecewiseKernel>(mod, "PiecewiseKernel")
        .def_static("zero", &PiecewiseKernel::zero)
        .def_static("constant", &PiecewiseKernel::constant, py::arg("c"), py::arg("support_end") = kInf)
        .def("__call__", [](const PiecewiseKernel& k, py::object r) { return eval_any(k, r); })
        .def("deriv", [](const PiecewiseKernel& k, py::object r) {
            return eval_any([&](double x) { return k.eval_deriv(x); }, r);
        })
        .def_property_readonly("support_end", &PiecewiseKernel::support_end)
        .def("knots", &PiecewiseKernel::knots)
        .def("to_json", [](const PiecewiseKernel& k) { return k.to_json().dump(); })
        .def_static("from_json", [](const std::string& s) { return PiecewiseKernel::from_json(nlohmann::json::parse(s)); });

    py::class_<KernelMatrix>(mod, "KernelMatrix")
        .def(py::init<PiecewiseKernel>())
        .def_property_readonly("types", &KernelMatrix::types)
        .def("at", py::overload_cast<std::size_t, std::size_t>(&KernelMatrix::at, py::const_))
        .def("to_json", [](const KernelMatrix& k) { return k.to_json().dump(); })
        .def_static("from_json", [](const std::string& s) { return KernelMatrix::from_json(nlohmann::json::parse(s)); });

    mod.def("make_od", &make_od);
    mod.def("make_lj", &make_lj, py::arg("eps") = 10.0, py::arg("sigma") = 1.0, py::arg("interaction_cap") = kInf);
    mod.def("make_ps1", &make_ps1, py::arg("interaction_cap") = kInf);

    py::class_<ModelSpec>(mod, "ModelSpec")
        .def(py::init<Manifold, PiecewiseKernel, std::size_t>(), py::arg("manifold"), py::arg("kernel"), py::arg("n"))
        .def(py::init<Manifold, KernelMatrix, std::vector<int>>(), py::arg("manifold"), py::arg("kernels"),
             py::arg("types"))
        .def_property_readonly("manifold", &ModelSpec::manifold)
        .def_property_readonly("agents", &ModelSpec::agents)
        .def_property_readonly("types", &ModelSpec::types);
    mod.def("types_from_counts", &types_from_counts);

    mod.def("rhs", [](const ModelSpec& m, const Array& x) {
        return from_points(rhs(m, to_points(x)), m.manifold().ambient_dim());
    });
    mod.def("energy", [](const ModelSpec& m, const Array& x) { return energy(m, to_points(x)); });

    mod.def(
        "initial_condition",
        [](const ModelSpec& m, const std::string& ic, double size, std::uint64_t seed, std::size_t index) {
            return from_points(initial_condition(m, ICSpec::parse(ic, size), seed, index), m.manifold().ambient_dim());
        },
        py::arg("model"), py::arg("ic"), py::arg("size") = 0.0, py::arg("seed") = 0, py::arg("index") = 0);

    mod.def(
        "simulate",
        [](const ModelSpec& m, const Array& x0, double T, double h, const std::string& scheme) {
            IntegratorConfig cfg;
            cfg.h = h;
            cfg.scheme = parse_scheme(scheme);
            const Trajectory tr = simulate(m, to_points(x0), T, cfg);
            const int amb = m.manifold().ambient_dim();
            const auto id = [](const std::vector<Vec3>& p) -> const std::vector<Vec3>& { return p; };
            return py::make_tuple(py::array(py::cast(tr.times)), stack(tr.states, m.agents(), amb, id),
                                  stack(tr.velocities, m.agents(), amb, id));
        },
        py::arg("model"), py::arg("x0"), py::arg("T"), py::arg("h") = 0.01, py::arg("scheme") = "rk4p",
        "Returns (times, states, velocities) with states shaped (steps + 1, N, ambient_dim).");

    py::class_<TrajectoryDataset>(mod, "TrajectoryDataset")
        .def_property_readonly("N", &TrajectoryDataset::N)
        .def_property_readonly("L", &TrajectoryDataset::L)
        .def_property_readonly("M", &TrajectoryDataset::M)
        .def_readonly("T", &TrajectoryDataset::T)
        .def_readonly("seed", &TrajectoryDataset::seed)
        .def_readonly("types", &TrajectoryDataset::types)
        .def_readonly("times", &TrajectoryDataset::times)
        .def_readonly("manifold", &TrajectoryDataset::manifold)
        .def("positions",
             [](const TrajectoryDataset& ds, std::size_t m) {
                 if (m >= ds.M()) throw py::index_error("trajectory index out of range");
                 return stack(ds.runs[m].snaps, ds.N(), amb_of(ds.manifold),
                              [](const Snapshot& s) -> const std::vector<Vec3>& { return s.x; });
             })
        .def("velocities",
             [](const TrajectoryDataset& ds, std::size_t m) {
                 if (m >= ds.M()) throw py::index_error("trajectory index out of range");
                 return stack(ds.runs[m].snaps, ds.N(), amb_of(ds.manifold),
                              [](const Snapshot& s) -> const std::vector<Vec3>& { return s.v; });
             })
        .def("subset", &TrajectoryDataset::subset)
        .def("to_bytes", [](const TrajectoryDataset& ds) { return py::bytes(encode_dataset(ds)); })
        .def_static("from_bytes", [](const py::bytes& b) { return decode_dataset(std::string(b)); })
        .def("__eq__", [](const TrajectoryDataset& a, const TrajectoryDataset& b) { return a == b; });
    mod.def("read_dataset", &read_dataset);
    mod.def("write_dataset", &write_dataset);

    py::class_<SplineBasis>(mod, "SplineBasis")
        .def(py::init<double, double, std::size_t, int>(), py::arg("lo"), py::arg("hi"), py::arg("n"),
             py::arg("degree") = 1)
        .def_property_readonly("lo", &SplineBasis::lo)
        .def_property_readonly("hi", &SplineBasis::hi)
        .def_property_readonly("size", &SplineBasis::size)
        .def_property_readonly("degree", &SplineBasis::degree)
        .def("eval", &SplineBasis::eval);

    py::class_<Estimator>(mod, "Estimator")
        .def(py::init<SplineBasis, Eigen::VectorXd>())
        .def_property_readonly("empty", &Estimator::empty)
        .def_property_readonly("basis", &Estimator::basis)
        .def_property_readonly("coeffs", &Estimator::coeffs)
        .def("__call__", [](const Estimator& e, py::object r) { return eval_any(e, r); })
        .def("smooth", &Estimator::smooth)
        .def("to_kernel", &Estimator::to_kernel);

    py::class_<EstimatorSet>(mod, "EstimatorSet")
        .def_property_readonly("types", &EstimatorSet::types)
        .def("at", py::overload_cast<std::size_t, std::size_t>(&EstimatorSet::at, py::const_))
        .def("to_kernels", &EstimatorSet::to_kernels)
        .def("to_json", [](const EstimatorSet& e) { return e.to_json().dump(); })
        .def_static("from_json", [](const std::string& s) { return EstimatorSet::from_json(nlohmann::json::parse(s)); });

    py::class_<LearnReport>(mod, "LearnReport")
        .def_readonly("coeffs", &LearnReport::coeffs)
        .def_readonly("lambda_min", &LearnReport::lambda_min)
        .def_readonly("lambda_max", &LearnReport::lambda_max)
        .def_readonly("cond", &LearnReport::cond)
        .def_readonly("residual_loss", &LearnReport::residual_loss)
        .def_readonly("flagged", &LearnReport::flagged);

    py::class_<LearnResult>(mod, "LearnResult")
        .def_readonly("estimators", &LearnResult::estimators)
        .def_readonly("reports", &LearnResult::reports)
        .def("report_json", [](const LearnResult& r) { return r.report_json().dump(); });

    py::class_<RelError>(mod, "RelError")
        .def_readonly("value", &RelError::value)
        .def_readonly("absolute", &RelError::absolute);
    py::class_<PairError>(mod, "PairError")
        .def_readonly("k", &PairError::k)
        .def_readonly("kp", &PairError::kp)
        .def_readonly("has_data", &PairError::has_data)
        .def_readonly("error", &PairError::error);
    py::class_<TrajErrorStats>(mod, "TrajErrorStats")
        .def_readonly("mean", &TrajErrorStats::mean)
        .def_readonly("std", &TrajErrorStats::std)
        .def_readonly("errors", &TrajErrorStats::errors);
    py::class_<EvaluateReport>(mod, "EvaluateReport")
        .def_readonly("pairs", &EvaluateReport::pairs)
        .def_readonly("training", &EvaluateReport::training)
        .def_readonly("fresh", &EvaluateReport::fresh)
        .def_readonly("transfer", &EvaluateReport::transfer)
        .def("pair", &EvaluateReport::pair, py::return_value_policy::reference_internal);

    py::class_<EmpiricalMeasure>(mod, "EmpiricalMeasure")
        .def(py::init([](std::vector<double> r, std::vector<double> w) { return EmpiricalMeasure{std::move(r), std::move(w)}; }))
        .def_readonly("r", &EmpiricalMeasure::r)
        .def_readonly("w", &EmpiricalMeasure::w)
        .def("min", &EmpiricalMeasure::min)
        .def("max", &EmpiricalMeasure::max)
        .def("total", &EmpiricalMeasure::total);
    mod.def("rho_empirical", &rho_empirical, py::arg("dataset"), py::arg("pair") = PairFilter{});
    mod.def("observed_range", &observed_range, py::arg("dataset"), py::arg("pair") = PairFilter{});
    mod.def("l2_rho", &l2_rho);
    mod.def("rel_error",
            py::overload_cast<const std::function<double(double)>&, const std::function<double(double)>&,
                              const EmpiricalMeasure&>(&rel_error));

    py::class_<SlopeFit>(mod, "SlopeFit")
        .def_readonly("slope", &SlopeFit::slope)
        .def_readonly("intercept", &SlopeFit::intercept)
        .def_readonly("ci_lo", &SlopeFit::ci_lo)
        .def_readonly("ci_hi", &SlopeFit::ci_hi);
    mod.def("fit_loglog", &fit_loglog, py::arg("x"), py::arg("y"), py::arg("confidence") = 0.95);

    py::class_<ExperimentConfig>(mod, "ExperimentConfig")
        .def_static("load", &ExperimentConfig::load)
        .def_static("parse", &ExperimentConfig::parse)
        .def("validate", &ExperimentConfig::validate)
        .def_property_readonly("N", &ExperimentConfig::N)
        .def_property_readonly("K", &ExperimentConfig::K)
        .def_readwrite("T", &ExperimentConfig::T)
        .def_readwrite("L", &ExperimentConfig::L)
        .def_readwrite("M", &ExperimentConfig::M)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("basis_n", &ExperimentConfig::basis_n)
        .def_readwrite("smooth", &ExperimentConfig::smooth)
        .def_readwrite("test_ics", &ExperimentConfig::test_ics)
        .def_readwrite("transfer_N", &ExperimentConfig::transfer_N)
        .def("kernels", &ExperimentConfig::kernels)
        .def("model", &ExperimentConfig::model);

    mod.def(
        "simulate_training",
        [](const ExperimentConfig& cfg, std::optional<std::uint64_t> seed, std::optional<std::size_t> M) {
            py::gil_scoped_release release;
            return simulate_training(cfg, seed.value_or(cfg.seed), M.value_or(cfg.M));
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("M") = py::none());
    mod.def(
        "learn",
        [](const ExperimentConfig& cfg, const TrajectoryDataset& ds) {
            py::gil_scoped_release release;
            return learn_dataset(cfg, ds);
        },
        py::arg("config"), py::arg("dataset"));
    mod.def(
        "evaluate",
        [](const ExperimentConfig& cfg, const TrajectoryDataset& ds, const EstimatorSet& est,
           const std::filesystem::path& out) {
            py::gil_scoped_release release;
            return evaluate(cfg, ds, est, out);
        },
        py::arg("config"), py::arg("dataset"), py::arg("estimators"), py::arg("out_dir"),
        "Writes the evaluation CSV files to out_dir and returns the error report.");
}
