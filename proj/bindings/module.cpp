#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>
#include <vector>

#include "quenchlab/cli.hpp"
#include "quenchlab/free_fermion.hpp"
#include "quenchlab/groundstate.hpp"
#include "quenchlab/meanfield.hpp"
#include "quenchlab/model.hpp"
#include "quenchlab/scaling.hpp"
#include "quenchlab/statevector.hpp"

namespace py = pybind11;
using namespace quenchlab;

namespace {

HamiltonianSpec make_spec(const std::string& family, double j, double delta, double alpha,
                          double b, int length, const std::string& boundary) {
    HamiltonianSpec spec;
    spec.family = family_from_name(family);
    spec.J = j;
    spec.Delta = delta;
    spec.alpha = alpha;
    spec.B = b;
    spec.L = length;
    spec.boundary = boundary_from_name(boundary);
    return spec;
}

DerivativeCurveSet make_curves(const std::vector<double>& times,
                               const std::vector<double>& b_grid,
                               const std::vector<std::vector<double>>& values) {
    DerivativeCurveSet set;
    set.times = times;
    set.b_grid = b_grid;
    set.values = values;
    return set;
}

py::dict estimate_dict(const CriticalPointEstimate& e) {
    py::dict d;
    d["b_c"] = e.b_c;
    d["uncertainty"] = e.uncertainty;
    d["method"] = method_name(e.method);
    d["residual"] = e.residual;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "transverse-field Ising chain quench dynamics and scaling analysis";
    m.attr("__version__") = "0.1.0";

    m.def("g_inf", &g_inf, py::arg("b"), py::arg("j") = 1.0);
    m.def("g_exact", &g_exact, py::arg("b"), py::arg("j"), py::arg("length"), py::arg("t"));
    m.def("g_av_exact", &g_av_exact, py::arg("b"), py::arg("j"), py::arg("length"),
          py::arg("t"));
    m.def("g_av_stationary", &g_av_stationary, py::arg("b"), py::arg("j"), py::arg("length"));
    m.def("dgdb_exact", &dgdb_exact, py::arg("b"), py::arg("j"), py::arg("length"),
          py::arg("t"));
    m.def("dispersion", &dispersion, py::arg("b"), py::arg("j"), py::arg("q"));
    m.def("scaling_function_reference", &scaling_function_reference, py::arg("epsilon_t"));
    m.def(
        "momentum_grid", [](int length) { return momentum_grid(length).momenta; },
        py::arg("length"));
    m.def("full_zone_momenta", &full_zone_momenta, py::arg("length"));
    m.def("polarized_occupations", &polarized_occupations, py::arg("b"), py::arg("j"),
          py::arg("momenta"));
    m.def("thermal_occupations", &thermal_occupations, py::arg("b"), py::arg("j"),
          py::arg("beta"), py::arg("momenta"));
    m.def("gge_correlator", &gge_correlator, py::arg("b"), py::arg("j"), py::arg("length"),
          py::arg("occupations"));

    m.def(
        "run_quench",
        [](const std::string& family, double b, int length, double t_max, double dt,
           double delta, double alpha, double j, int sample_stride) {
            const HamiltonianSpec spec =
                make_spec(family, j, delta, alpha, b, length, "periodic");
            QuenchConfig config;
            config.t_max = t_max;
            config.dt = dt;
            config.sample_stride = sample_stride;
            const CorrelatorSeries series = run_quench(spec, config);
            py::dict d;
            d["b_over_j"] = series.b_over_j;
            d["t"] = series.t;
            d["g"] = series.g;
            d["g_av"] = series.g_av;
            return d;
        },
        py::arg("family"), py::arg("b"), py::arg("length"), py::arg("t_max"),
        py::arg("dt") = 0.01, py::arg("delta") = 0.0, py::arg("alpha") = 6.0,
        py::arg("j") = 1.0, py::arg("sample_stride") = 1);

    m.def(
        "derivative_curves_exact",
        [](double j, int length, const std::vector<double>& times,
           const std::vector<double>& b_grid) {
            const DerivativeCurveSet set = derivative_curves_exact(j, length, times, b_grid);
            py::dict d;
            d["times"] = set.times;
            d["b_grid"] = set.b_grid;
            d["values"] = set.values;
            return d;
        },
        py::arg("j"), py::arg("length"), py::arg("times"), py::arg("b_grid"));

    m.def(
        "find_crossing",
        [](const std::vector<double>& times, const std::vector<double>& b_grid,
           const std::vector<std::vector<double>>& values) {
            const CrossingResult res = find_crossing(make_curves(times, b_grid, values));
            py::dict d = estimate_dict(res.estimate);
            d["crossing_value"] = res.crossing_value;
            d["crossing_value_std"] = res.crossing_value_std;
            return d;
        },
        py::arg("times"), py::arg("b_grid"), py::arg("values"));

    m.def(
        "collapse_fit",
        [](const std::vector<double>& times, const std::vector<double>& b_grid,
           const std::vector<std::vector<double>>& values, double b_lo, double b_hi,
           double x_window) {
            const CollapseResult res =
                collapse_fit(make_curves(times, b_grid, values), b_lo, b_hi, x_window);
            py::dict d = estimate_dict(res.estimate);
            d["correction_c"] = res.correction_c;
            d["slope"] = res.slope;
            d["intercept"] = res.intercept;
            d["master_x"] = res.master_x;
            d["master_y"] = res.master_y;
            return d;
        },
        py::arg("times"), py::arg("b_grid"), py::arg("values"), py::arg("b_lo"),
        py::arg("b_hi"), py::arg("x_window") = 0.3);

    m.def(
        "ground_state",
        [](const std::string& family, double b, int length, double delta, double alpha,
           double j, bool return_state) {
            const GroundStateResult res =
                ground_state(make_spec(family, j, delta, alpha, b, length, "periodic"));
            py::dict d;
            d["energy"] = res.energy;
            d["iterations"] = res.iterations;
            d["residual"] = res.residual;
            if (return_state) d["state"] = res.state;
            return d;
        },
        py::arg("family"), py::arg("b"), py::arg("length"), py::arg("delta") = 0.0,
        py::arg("alpha") = 0.0, py::arg("j") = 1.0, py::arg("return_state") = false);

    m.def("binder_cumulant", &binder_cumulant, py::arg("state"), py::arg("length"));

    m.def(
        "binder_curve",
        [](const std::string& family, int length, const std::vector<double>& b_grid,
           double delta) {
            HamiltonianSpec spec = make_spec(family, 1.0, delta, 0.0, 0.0, length, "periodic");
            return binder_curve(spec, b_grid).u4;
        },
        py::arg("family"), py::arg("length"), py::arg("b_grid"), py::arg("delta") = 0.0);

    m.def(
        "binder_crossing",
        [](const std::vector<std::tuple<int, std::vector<double>, std::vector<double>>>&
               curves) {
            std::vector<BinderCurve> set;
            for (const auto& [length, grid, u4] : curves) {
                BinderCurve c;
                c.L = length;
                c.b_grid = grid;
                c.u4 = u4;
                set.push_back(std::move(c));
            }
            return estimate_dict(binder_crossing(set).estimate);
        },
        py::arg("curves"));

    m.def(
        "predict_critical_points",
        [](double delta) {
            const MeanFieldPrediction p = predict_critical_points(delta);
            py::dict d;
            d["delta"] = p.delta;
            d["b_c_dy"] = p.b_c_dy;
            d["b_c_gs"] = p.b_c_gs;
            d["validity_warning"] = p.validity_warning;
            return d;
        },
        py::arg("delta"));

    m.def(
        "run_cli", [](const std::vector<std::string>& args) { return run_cli(args); },
        py::arg("args"));
}
