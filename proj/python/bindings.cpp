#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vfilter/exact_gaussian.hpp"
#include "vfilter/experiments.hpp"
#include "vfilter/filter_engine.hpp"
#include "vfilter/presets.hpp"

namespace py = pybind11;
using namespace vfilter;

PYBIND11_MODULE(_core, m) {
    m.doc() = "grid laboratory for normalized products of nonnegative kernels";

    py::enum_<Scenario>(m, "Scenario")
        .value("Filter", Scenario::Filter)
        .value("Prediction", Scenario::Prediction);

    py::class_<WeightSpec>(m, "WeightSpec")
        .def_static("exp_abs", &WeightSpec::exp_abs, py::arg("c"))
        .def_static("exp_square", &WeightSpec::exp_square, py::arg("c"))
        .def_readonly("c", &WeightSpec::c);
    m.def("v_eval", &v_eval, py::arg("v"), py::arg("x"));
    m.def("v_eval_log", &v_eval_log, py::arg("v"), py::arg("x"));

    py::class_<FuncSpec>(m, "FuncSpec")
        .def_static("scale", &FuncSpec::scale, py::arg("value"))
        .def_static("constant", &FuncSpec::constant, py::arg("value"))
        .def_static("identity", &FuncSpec::identity)
        .def("__call__", &FuncSpec::operator(), py::arg("x"));

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_static("linear", &ModelSpec::linear, py::arg("alpha"), py::arg("beta_obs") = 1.0)
        .def_static("nonlinear", &ModelSpec::nonlinear, py::arg("b"), py::arg("sigma"),
                    py::arg("h"), py::arg("beta_obs") = 1.0)
        .def_readonly("alpha", &ModelSpec::alpha)
        .def_readonly("sigma", &ModelSpec::sigma)
        .def_readonly("beta_obs", &ModelSpec::beta_obs)
        .def("drift_mean", &ModelSpec::drift_mean, py::arg("x"))
        .def("to_json", [](const ModelSpec& s) { return model_to_json(s); })
        .def_static("from_json", &model_from_json, py::arg("text"));

    py::class_<ObservationPath>(m, "ObservationPath")
        .def_readonly("y", &ObservationPath::y)
        .def_readonly("seed", &ObservationPath::seed);

    py::class_<SimulatedPath>(m, "SimulatedPath")
        .def_readonly("x", &SimulatedPath::x)
        .def_readonly("obs", &SimulatedPath::obs);
    m.def("simulate", &simulate, py::arg("model"), py::arg("n"), py::arg("seed"));
    m.def("stationary_sd_x", &stationary_sd_x, py::arg("model"));
    m.def("stationary_sd_y", &stationary_sd_y, py::arg("model"));

    py::class_<GridMeasure>(m, "GridMeasure")
        .def_readonly("nodes", &GridMeasure::nodes)
        .def_readonly("weights", &GridMeasure::weights)
        .def_readonly("lo", &GridMeasure::lo)
        .def_readonly("hi", &GridMeasure::hi);
    m.def("uniform_nodes", &uniform_nodes, py::arg("lo"), py::arg("hi"), py::arg("n"));
    m.def("gaussian_on_grid", &gaussian_on_grid, py::arg("nodes"), py::arg("lo"),
          py::arg("hi"), py::arg("mean"), py::arg("var"));
    m.def("vnorm", &vnorm, py::arg("measure"), py::arg("v"));
    m.def("grid_mean", &grid_mean, py::arg("measure"));
    m.def("grid_var", &grid_var, py::arg("measure"));
    m.def("tail_fraction", &tail_fraction, py::arg("measure"), py::arg("v"));

    py::class_<GaussianState>(m, "GaussianState")
        .def(py::init([](double mean, double var) {
                 return GaussianState{mean, var};
             }),
             py::arg("mean"), py::arg("var"))
        .def_readonly("mean", &GaussianState::mean)
        .def_readonly("var", &GaussianState::var);
    m.def("stationary_pi", &stationary_pi, py::arg("alpha"));
    m.def("gaussian_posterior", &gaussian_posterior, py::arg("prior"), py::arg("y"),
          py::arg("beta_obs"));
    m.def(
        "kalman_step",
        [](const GaussianState& prior, double y, double alpha, double beta_obs) {
            KalmanResult r = kalman_step(prior, y, alpha, beta_obs);
            return py::make_tuple(r.state, r.loglik);
        },
        py::arg("prior"), py::arg("y"), py::arg("alpha"), py::arg("beta_obs"));
    m.def("gaussian_v_moment", &gaussian_v_moment, py::arg("state"), py::arg("v"));

    py::class_<FilterRun>(m, "FilterRun")
        .def_readonly("etas", &FilterRun::etas)
        .def_readonly("lambdas", &FilterRun::lambdas)
        .def_readonly("v_moments", &FilterRun::v_moments)
        .def_readonly("tail_diags", &FilterRun::tail_diags);
    m.def("initial_measure", &initial_measure, py::arg("model"), py::arg("scenario"),
          py::arg("lambda0"), py::arg("y0"));
    m.def("run", &run, py::arg("model"), py::arg("scenario"), py::arg("lambda0"),
          py::arg("path"), py::arg("v"));
    m.def("run_to_csv", &run_to_csv, py::arg("run"));

    py::class_<DivergenceSpec>(m, "DivergenceSpec")
        .def_readonly("enabled", &DivergenceSpec::enabled)
        .def_readonly("alpha", &DivergenceSpec::alpha)
        .def_readonly("c", &DivergenceSpec::c)
        .def_readonly("rmax", &DivergenceSpec::rmax);

    py::class_<StabilityConfig>(m, "StabilityConfig")
        .def_readonly("name", &StabilityConfig::name)
        .def_readonly("model", &StabilityConfig::model)
        .def_readonly("scenario", &StabilityConfig::scenario)
        .def_readonly("v", &StabilityConfig::v)
        .def_readonly("window_l", &StabilityConfig::window_l)
        .def_readwrite("nodes", &StabilityConfig::nodes)
        .def_readwrite("steps", &StabilityConfig::steps)
        .def_readonly("seeds", &StabilityConfig::seeds)
        .def_readwrite("burn", &StabilityConfig::burn);

    py::class_<RateFit>(m, "RateFit")
        .def_readonly("slope", &RateFit::slope)
        .def_readonly("r2", &RateFit::r2)
        .def_readonly("rho_hat", &RateFit::rho_hat)
        .def_readonly("points", &RateFit::points);

    py::class_<StabilityTrace>(m, "StabilityTrace")
        .def_readonly("seed", &StabilityTrace::seed)
        .def_readonly("gap_v", &StabilityTrace::gap_v)
        .def_readonly("vmom", &StabilityTrace::vmom)
        .def_readonly("vmom_tilde", &StabilityTrace::vmom_tilde)
        .def_readonly("bound_forget", &StabilityTrace::bound_forget)
        .def_readonly("bound_echeck", &StabilityTrace::bound_echeck)
        .def_readonly("max_tail", &StabilityTrace::max_tail)
        .def_readonly("forget_dominates", &StabilityTrace::forget_dominates)
        .def_readonly("echeck_dominates", &StabilityTrace::echeck_dominates)
        .def_readonly("fit_ok", &StabilityTrace::fit_ok)
        .def_readonly("fit", &StabilityTrace::fit)
        .def("to_csv", [](const StabilityTrace& t) { return trace_to_csv(t); })
        .def("summary_json", [](const StabilityTrace& t) { return trace_summary_json(t); });

    m.def("preset_names", &preset_names);
    m.def("make_preset", &make_preset, py::arg("name"));
    m.def("config_from_toml_file", &config_from_toml_file, py::arg("path"));
    m.def("stability_run", &stability_run, py::arg("config"), py::arg("seed"));

    m.def(
        "prediction_vnorm_divergence",
        [](double alpha, double c, const std::vector<double>& ladder, double x) {
            std::vector<py::tuple> out;
            for (const DivergencePoint& p : prediction_vnorm_divergence(alpha, c, ladder, x))
                out.push_back(py::make_tuple(p.r, p.value, p.log_value));
            return out;
        },
        py::arg("alpha"), py::arg("c"), py::arg("r_ladder"), py::arg("x") = 0.0);

    m.def(
        "check_e_conditions_json",
        [](const ModelSpec& model, double max_radius) {
            return e_conditions_to_json(check_e_conditions(model, max_radius));
        },
        py::arg("model"), py::arg("max_radius") = 1000.0);
}
