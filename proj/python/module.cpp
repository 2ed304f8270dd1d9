#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "radiff/config.hpp"
#include "radiff/harness.hpp"
#include "radiff/kinetic.hpp"
#include "radiff/layers.hpp"
#include "radiff/quadrature.hpp"
#include "radiff/threading.hpp"

namespace py = pybind11;
using namespace radiff;

PYBIND11_MODULE(_radiff, m) {
    m.doc() = "radiative-transfer diffusion-limit laboratory (C++ core bindings)";

    py::class_<AngularQuadrature>(m, "AngularQuadrature")
        .def_readonly("dirs", &AngularQuadrature::dirs)
        .def_readonly("weights", &AngularQuadrature::weights)
        .def("ndirs", &AngularQuadrature::ndirs)
        .def("weight_sum", &AngularQuadrature::weight_sum)
        .def("first_moment", &AngularQuadrature::first_moment)
        .def("second_moment", &AngularQuadrature::second_moment);

    m.def("build_quadrature", &build_quadrature, py::arg("n_polar"), py::arg("n_azimuth"),
          "Product quadrature on the unit sphere; weights sum to 1.");

    m.def("compatible_root", &compatible_root, py::arg("l0"),
          "Unique positive root of theta^4 + theta = l0.");

    m.def(
        "relaxation_solve",
        [](double fbar, double theta, double eps, double dt, double tol) {
            return relaxation_solve(fbar, theta, eps, dt, tol);
        },
        py::arg("fbar"), py::arg("theta"), py::arg("eps"), py::arg("dt"),
        py::arg("tol") = 1e-12,
        "Implicit cell-local relaxation step; returns (fbar_new, theta_new) with "
        "fbar + theta conserved exactly.");

    m.def("layer_picard", &layer_picard, py::arg("theta00"), py::arg("thetaI_init"),
          py::arg("tau_max"), py::arg("dtau"), py::arg("tol") = 1e-12,
          py::arg("max_iters") = 200,
          "Picard/Duhamel cross-check of the scalar order-0 layer ODE.");

    py::class_<RateResult>(m, "RateResult")
        .def_readonly("slope", &RateResult::slope)
        .def_readonly("intercept", &RateResult::intercept)
        .def_readonly("max_residual", &RateResult::max_residual);

    m.def("fit_rate", &fit_rate, py::arg("points"),
          "Log-log least squares over (eps, err) pairs.");

    m.def(
        "normalize_config",
        [](const std::string& text) { return echo_config(parse_config(text)); },
        py::arg("text"), "Parse, validate, and return the canonical config echo.");

    m.def("set_threads", &set_threads, py::arg("n"));

    py::class_<ErrorRow>(m, "ErrorRow")
        .def_readonly("epsilon", &ErrorRow::epsilon)
        .def_readonly("t", &ErrorRow::t)
        .def_readonly("err_linf_f", &ErrorRow::err_linf_f)
        .def_readonly("err_linf_theta", &ErrorRow::err_linf_theta)
        .def_readonly("err_h2_theta", &ErrorRow::err_h2_theta)
        .def_readonly("composite_order", &ErrorRow::composite_order);

    py::class_<RateFit>(m, "RateFit")
        .def_readonly("metric", &RateFit::metric)
        .def_readonly("composite_order", &RateFit::composite_order)
        .def_readonly("slope", &RateFit::slope)
        .def_readonly("intercept", &RateFit::intercept)
        .def_readonly("max_residual", &RateFit::max_residual)
        .def_readonly("flag", &RateFit::flag);

    py::class_<ConvergenceReport>(m, "ConvergenceReport")
        .def_readonly("rows", &ConvergenceReport::rows)
        .def_readonly("rates", &ConvergenceReport::rates)
        .def_readonly("degenerate", &ConvergenceReport::degenerate)
        .def_readonly("note", &ConvergenceReport::note);

    py::class_<ResidualRow>(m, "ResidualRow")
        .def_readonly("epsilon", &ResidualRow::epsilon)
        .def_readonly("t", &ResidualRow::t)
        .def_readonly("res_l1", &ResidualRow::res_l1)
        .def_readonly("res_l2", &ResidualRow::res_l2)
        .def_readonly("composite_order", &ResidualRow::composite_order);

    py::class_<ResidualReport>(m, "ResidualReport")
        .def_readonly("rows", &ResidualReport::rows)
        .def_readonly("rates", &ResidualReport::rates)
        .def_readonly("degenerate", &ResidualReport::degenerate)
        .def_readonly("note", &ResidualReport::note);

    m.def(
        "run_sweep",
        [](const std::string& config_text) {
            return run_sweep(parse_config(config_text).sweep_config());
        },
        py::arg("config_text"),
        "Full epsilon sweep with composite errors and rate fits from a config string.");

    m.def(
        "residual_sweep",
        [](const std::string& config_text) {
            return residual_sweep(parse_config(config_text).sweep_config());
        },
        py::arg("config_text"), "Composite residual sweep from a config string.");
}
