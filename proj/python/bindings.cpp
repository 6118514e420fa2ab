// SPDX-License-Identifier: MIT
#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "levy_multiscale/harness.hpp"

namespace py = pybind11;
using namespace levy_multiscale;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

InvariantMeasure measure_from(const std::vector<double>& nodes, const std::vector<double>& weights) {
    InvariantMeasure mu;
    mu.nodes = nodes;
    mu.weights = weights;
    mu.validate();
    return mu;
}

// Python callables must not run on worker threads; the volatility is
// tabulated on the measure's nodes before it reaches the library.
VolatilityFn tabulated(const py::function& sigma, const InvariantMeasure& mu) {
    std::vector<double> values;
    values.reserve(mu.size());
    for (double y : mu.nodes) values.push_back(sigma(y).cast<double>());
    return [nodes = mu.nodes, values](double y) {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), y);
        const auto k = std::min(static_cast<std::size_t>(it - nodes.begin()), nodes.size() - 1);
        return values[k];
    };
}

FastProcessConfig driver(const LevyMeasureModel& model, double lambda, double dt, std::uint64_t seed) {
    FastProcessConfig cfg;
    cfg.model = model;
    cfg.lambda = lambda;
    cfg.dt = dt;
    cfg.horizon = std::max(1.0, dt);
    cfg.seed = seed;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multiscale stochastic control with a Levy-driven fast volatility factor";

    py::register_exception<AssumptionError>(m, "AssumptionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<LevyMeasureModel>(m, "LevyMeasureModel")
        .def_static("symmetric", &LevyMeasureModel::symmetric, py::arg("alpha"), py::arg("intensity") = 1.0)
        .def_static("one_sided", &LevyMeasureModel::one_sided, py::arg("alpha"), py::arg("intensity") = 1.0)
        .def_static("subordinator", &LevyMeasureModel::subordinator, py::arg("alpha"), py::arg("intensity") = 1.0)
        .def_static("null_driver", &LevyMeasureModel::null_driver)
        .def_readonly("alpha", &LevyMeasureModel::alpha)
        .def_readonly("intensity", &LevyMeasureModel::intensity)
        .def_readonly("subordinator_mode", &LevyMeasureModel::subordinator_mode)
        .def_property_readonly("family", [](const LevyMeasureModel& x) { return to_string(x.family); })
        .def("__repr__", [](const LevyMeasureModel& x) {
            return "LevyMeasureModel(" + to_string(x.family) + ", alpha=" + std::to_string(x.alpha) +
                   ", intensity=" + std::to_string(x.intensity) + ")";
        });

    m.def("density", &density_eval, py::arg("model"), py::arg("z"));
    m.def("levy_exponent", [](const LevyMeasureModel& model, double u) { return levy_exponent(model, u); },
          py::arg("model"), py::arg("u"), "Levy exponent by quadrature.");
    m.def("stable_exponent", &stable_exponent, py::arg("model"), py::arg("u"), "Levy exponent in closed form.");
    m.def(
        "check_assumptions",
        [](const LevyMeasureModel& model) {
            const AssumptionReport r = check_assumptions(model);
            py::dict d;
            d["a1_satisfied"] = r.a1_satisfied;
            d["a2_satisfied"] = r.a2_satisfied;
            d["a3_satisfied"] = r.a3_satisfied;
            d["a2_reason"] = to_string(r.a2_reason);
            d["p_witness"] = r.p_witness;
            d["C_witness"] = r.C_witness;
            d["q_witness"] = r.q_witness;
            d["is_subordinator"] = r.is_subordinator;
            d["all_satisfied"] = r.all_satisfied();
            return d;
        },
        py::arg("model"));

    m.def("stationary_cf", &stationary_cf_oracle, py::arg("model"), py::arg("u"),
          "Characteristic function of the invariant law.");
    m.def(
        "sample_stationary",
        [](const LevyMeasureModel& model, std::size_t n_samples, double lambda, double dt, double burn_in,
           std::uint64_t seed) {
            StationarySampling s;
            s.n_samples = n_samples;
            s.burn_in = burn_in;
            std::vector<double> ys;
            {
                py::gil_scoped_release release;
                ys = sample_stationary(driver(model, lambda, dt, seed), s);
            }
            return to_array(ys);
        },
        py::arg("model"), py::arg("n_samples") = 100000, py::arg("lam") = 1.0, py::arg("dt") = 0.01,
        py::arg("burn_in") = 10.0, py::arg("seed") = 0);
    m.def(
        "invariant_measure",
        [](const LevyMeasureModel& model, std::size_t n_samples, std::size_t n_nodes, double dt, std::uint64_t seed) {
            StationarySampling s;
            s.n_samples = n_samples;
            InvariantMeasure mu;
            {
                py::gil_scoped_release release;
                mu = estimate_invariant_measure(driver(model, 1.0, dt, seed), s, n_nodes);
            }
            return py::make_tuple(to_array(mu.nodes), to_array(mu.weights));
        },
        py::arg("model"), py::arg("n_samples") = 100000, py::arg("n_nodes") = 128, py::arg("dt") = 0.01,
        py::arg("seed") = 0, "Returns (nodes, weights) of the estimated invariant law.");
    m.def("ks_distance", [](std::vector<double> a, std::vector<double> b) { return ks_distance(a, b); });

    m.def(
        "generator_apply",
        [](const py::function& f, const py::function& df, const py::function& d2f, double growth_order,
           const LevyMeasureModel& model, double y) {
            SmoothFunction fn{[f](double v) { return f(v).cast<double>(); },
                              [df](double v) { return df(v).cast<double>(); },
                              [d2f](double v) { return d2f(v).cast<double>(); }, growth_order};
            const GeneratorValue r = generator_apply(GeneratorQuadrature(model), fn, y);
            return py::make_tuple(r.value, r.error);
        },
        py::arg("f"), py::arg("df"), py::arg("d2f"), py::arg("growth_order"), py::arg("model"), py::arg("y"),
        "Nonlocal generator I[y, f]; returns (value, error estimate).");
    m.def(
        "lyapunov_drift_check",
        [](const LevyMeasureModel& model, double q_exp, double R, const std::vector<double>& samples) {
            const LyapunovCheck c = lyapunov_drift_check(GeneratorQuadrature(model), q_exp, R, samples);
            return py::make_tuple(c.a_witness, c.pass);
        },
        py::arg("model"), py::arg("q_exp"), py::arg("R"), py::arg("samples"));
    m.def(
        "subordinator_counterexample",
        [](const LevyMeasureModel& model) {
            const CounterexampleResult r = subordinator_counterexample(GeneratorQuadrature(model));
            py::dict d;
            d["max_violation"] = r.max_violation;
            d["c"] = r.c;
            d["y"] = to_array(r.y_grid);
            d["minus_generator"] = to_array(r.minus_generator);
            return d;
        },
        py::arg("model"));

    m.def(
        "effective_vol_quadratic",
        [](const py::function& sigma, const std::vector<double>& nodes, const std::vector<double>& weights) {
            const InvariantMeasure mu = measure_from(nodes, weights);
            return effective_vol_quadratic(tabulated(sigma, mu), mu);
        },
        py::arg("sigma"), py::arg("nodes"), py::arg("weights"));
    m.def(
        "effective_vol_harmonic",
        [](const py::function& sigma, const std::vector<double>& nodes, const std::vector<double>& weights) {
            const InvariantMeasure mu = measure_from(nodes, weights);
            return effective_vol_harmonic(tabulated(sigma, mu), mu);
        },
        py::arg("sigma"), py::arg("nodes"), py::arg("weights"));
    m.def(
        "black_scholes",
        [](double s, double x, double tau, double r, double strike, const std::string& payoff) {
            PricingSpec spec;
            spec.r = r;
            spec.discount = r;
            spec.strike = strike;
            spec.payoff_kind = parse_payoff_kind(payoff);
            spec.sigma = constant_volatility(s);
            return bs_oracle(spec, s, x, tau);
        },
        py::arg("s"), py::arg("x"), py::arg("tau"), py::arg("r") = 0.05, py::arg("strike") = 1.0,
        py::arg("payoff") = "call", "Price with instantaneous variance 2 s^2.");
    m.def(
        "merton_value",
        [](double sigma, double t, double w, double r, double alpha_drift, double gamma, double a, double R1,
           double R, double T) {
            MertonSpec spec;
            spec.sigma = constant_volatility(sigma);
            spec.r = r;
            spec.alpha_drift = alpha_drift;
            spec.gamma = gamma;
            spec.a = a;
            spec.R1 = R1;
            spec.R = R;
            spec.horizon = T;
            return merton_hara_closed_form(spec, InvariantMeasure::two_atom(0.0, 1.0), t, w);
        },
        py::arg("sigma"), py::arg("t"), py::arg("w"), py::arg("r") = 0.05, py::arg("alpha_drift") = 0.1,
        py::arg("gamma") = 0.5, py::arg("a") = 1.0, py::arg("R1") = 0.0, py::arg("R") = 3.0, py::arg("T") = 1.0,
        "Closed-form HARA value for a constant volatility.");

    m.def("parse_config", [](const std::string& text) { return parse_config(text).echo(); }, py::arg("text"),
          "Validates configuration text and returns its canonical form with defaults applied.");
    m.def(
        "run_experiment",
        [](const std::string& text, const std::filesystem::path& output_dir) {
            ExperimentConfig cfg = parse_config(text);
            cfg.output_dir = output_dir;
            ConvergenceReport report;
            {
                py::gil_scoped_release release;
                report = run_experiment(cfg);
            }
            py::list rows;
            for (const auto& r : report.rows) {
                py::dict d;
                d["epsilon"] = r.epsilon;
                d["gap"] = r.gap;
                d["std_error"] = r.std_error;
                d["grid_tol"] = r.grid_tol;
                rows.append(d);
            }
            return py::make_tuple(rows, report.monotone_flag);
        },
        py::arg("config_text"), py::arg("output_dir"),
        "Runs an experiment; returns (rows, monotone_flag) and writes its files into output_dir.");
}
