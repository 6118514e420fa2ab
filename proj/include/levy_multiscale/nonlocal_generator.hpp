// SPDX-License-Identifier: MIT
/**
 * @file nonlocal_generator.hpp
 * @brief The integro-differential generator of the fast factor,
 *
 *   I[y, f] = -f'(y) y + int ( f(y+z) - f(y) - f'(y) z 1_{|z|<=1} ) nu(dz),
 *
 * together with the Lyapunov drift check, the subordinator counterexample to
 * the strong maximum principle, approximate correctors and the effective
 * (measure-averaged) Hamiltonian.
 *
 * The z-integral runs over the support of nu. Quadrature splits it into
 *   |z| < kappa        second-order Taylor term 1/2 f''(y) int z^2 nu(dz),
 *   kappa <= |z| <= M  panelled Gauss-Kronrod,
 *   |z| > M            f extrapolated as f(y +- M) (|z| / M)^g with g the
 *                      declared growth order of f (g < alpha).
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "levy_multiscale/control_problem.hpp"
#include "levy_multiscale/ergodicity.hpp"
#include "levy_multiscale/levy_measures.hpp"

namespace levy_multiscale {

struct GeneratorQuadrature {
    LevyMeasureModel model;
    double kappa = 1e-3;
    /// Large-jump cut; 0 selects the point where nu's tail mass beyond M is
    /// 1e-8 of nu(|z| > 1), capped at 1e6.
    double M = 0.0;
    double tolerance = 1e-10;
    /// Longest Gauss-Kronrod piece; finite values resolve oscillatory f.
    double max_piece = std::numeric_limits<double>::infinity();

    explicit GeneratorQuadrature(LevyMeasureModel m) : model(m) {}
    GeneratorQuadrature(LevyMeasureModel m, double kappa_, double M_, double tolerance_ = 1e-10)
        : model(m), kappa(kappa_), M(M_), tolerance(tolerance_) {}

    void validate() const;
    /// M with the default applied.
    [[nodiscard]] double outer_cut() const;
};

/// f with its first two derivatives and its polynomial growth order at infinity.
struct SmoothFunction {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
    double growth_order = 0.0;

    static SmoothFunction constant(double k);
    static SmoothFunction identity();
    static SmoothFunction cosine(double frequency = 1.0);
    /// (1 + y^2)^{q/2}.
    static SmoothFunction lyapunov(double q);
};

struct GeneratorValue {
    double value = 0.0;
    /// Quadrature error plus estimates for the Taylor term and the cut at M.
    double error = 0.0;
};

/**
 * I[y, f]. Throws NumericalError (with the partial value and achieved error)
 * if the quadrature misses the requested tolerance.
 */
[[nodiscard]] GeneratorValue generator_apply(const GeneratorQuadrature& q, const SmoothFunction& f, double y);

struct LyapunovCheck {
    double a_witness = 0.0;
    bool pass = false;
};

/**
 * With phi(y) = (1 + y^2)^{q_exp/2}, returns min over the samples of
 * -I[y, phi] / phi(y). Requires q_exp < alpha and |y| >= R for every sample.
 */
[[nodiscard]] LyapunovCheck lyapunov_drift_check(const GeneratorQuadrature& q, double q_exp, double R,
                                                 const std::vector<double>& y_samples);

struct CounterexampleResult {
    double max_violation = 0.0;
    /// int_0^1 z nu(dz).
    double c = 0.0;
    /// Profile f(y) = -exp(-L / (-c - y)) for y < -c, 0 otherwise.
    double profile_scale = 1.0;
    std::vector<double> y_grid;
    std::vector<double> minus_generator;
};

/**
 * Evaluates -I[y, f] on n_points equispaced y in [y_lo, y_hi] for a smooth,
 * bounded f that increases strictly on y < -c and is constant on y >= -c.
 * Requires a one-sided model in subordinator mode.
 */
[[nodiscard]] CounterexampleResult subordinator_counterexample(const GeneratorQuadrature& q,
                                                               double y_lo = -10.0, double y_hi = 10.0,
                                                               std::size_t n_points = 401,
                                                               double profile_scale = 1.0);

/// Bounded smooth profile used by the counterexample.
[[nodiscard]] SmoothFunction counterexample_profile(double c, double profile_scale);

struct CorrectorQuery {
    double x_bar = 1.0;
    double p_bar = 1.0;
    double X_bar = -1.0;
    double delta = 0.1;
    std::vector<double> y_grid;
    std::size_t mc_paths = 10000;
    std::uint64_t seed = 0;
    LevyMeasureModel model;
    /// Time step of the fast path (rate 1).
    double dt = 0.02;

    void validate() const;
};

struct CorrectorPoint {
    double y = 0.0;
    double chi = 0.0;
    double std_error = 0.0;
};

/**
 * chi_delta(y) = -E int_0^inf H(x_bar, Y(t), p_bar, X_bar) e^{-delta t} dt for the
 * rate-one fast factor started at each y, by Monte Carlo to t = 10 / delta
 * with the remaining discount mass put on the terminal state.
 *
 * All starting points share the same driver increments: since the factor is
 * linear in its start, Y^y(t) = Y^0(t) + y e^{-t}.
 */
[[nodiscard]] std::vector<CorrectorPoint> approximate_corrector(const CorrectorQuery& cq, const HamiltonianFn& H);

/// The same estimate for several deltas from one set of paths (cq.delta is ignored).
[[nodiscard]] std::vector<std::vector<CorrectorPoint>> approximate_corrector(const CorrectorQuery& cq,
                                                                             const std::vector<double>& deltas,
                                                                             const HamiltonianFn& H);

/// sum_i weights[i] H(x, nodes[i], p, X).
[[nodiscard]] double effective_hamiltonian(const InvariantMeasure& mu, const HamiltonianFn& H, double x, double p,
                                           double X);

}  // namespace levy_multiscale
