// SPDX-License-Identifier: MIT
/**
 * @file finance.hpp
 * @brief Multiscale option pricing and the Merton portfolio problem.
 *
 * Both models keep the sqrt(2) diffusion convention of the multiscale
 * literature this library follows:
 *
 *   pricing  dX = r X dt + sqrt(2) sigma(Y) X dW
 *   Merton   dW = W (r + (alpha - r) u) dt + sqrt(2) u sigma(Y) W dB
 *
 * so a constant volatility s corresponds to instantaneous variance 2 s^2.
 * Averaging over the invariant law mu gives two different effective
 * volatilities: the quadratic mean sigma~ for pricing and the harmonic mean
 * sigma- for the Merton problem.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "levy_multiscale/control_problem.hpp"
#include "levy_multiscale/ergodicity.hpp"
#include "levy_multiscale/jump_processes.hpp"

namespace levy_multiscale {

using VolatilityFn = std::function<double(double)>;

[[nodiscard]] VolatilityFn constant_volatility(double s);
/// base + amplitude tanh(y); requires amplitude < base.
[[nodiscard]] VolatilityFn tanh_volatility(double base, double amplitude);

/// (sum_k mu_k sigma^2(y_k))^{1/2}; returns 0 when sigma vanishes on every node.
[[nodiscard]] double effective_vol_quadratic(const VolatilityFn& sigma, const InvariantMeasure& mu);

/// (sum_k mu_k / sigma^2(y_k))^{-1/2}; AssumptionError if sigma vanishes at a node.
[[nodiscard]] double effective_vol_harmonic(const VolatilityFn& sigma, const InvariantMeasure& mu);

enum class PayoffKind { Call, Put, Identity, Custom };

[[nodiscard]] std::string to_string(PayoffKind kind);
[[nodiscard]] PayoffKind parse_payoff_kind(const std::string& text);

struct PricingSpec {
    double r = 0.05;
    VolatilityFn sigma;
    PayoffKind payoff_kind = PayoffKind::Call;
    double strike = 1.0;
    /// Used when payoff_kind is Custom.
    Payoff custom_payoff;
    double discount = 0.05;
    double horizon = 1.0;
    double x0 = 1.0;

    void validate() const;
    [[nodiscard]] Payoff payoff() const;
    /// K with |g(x)| <= K (1 + x^2).
    [[nodiscard]] double growth_constant() const;
};

/// The pricing operator as a control problem with the single control 0.
[[nodiscard]] ControlProblemSpec pricing_problem(const PricingSpec& spec);

/**
 * Discounted expected payoff under constant volatility s over time to
 * maturity tau, started at x: closed form for calls, puts and the identity,
 * Gauss-Hermite quadrature (n_nodes) in the log-price otherwise.
 */
[[nodiscard]] double bs_oracle(const PricingSpec& spec, double s, double x, double tau);

/// Same expectation by Gauss-Hermite quadrature for any payoff.
[[nodiscard]] double lognormal_quadrature(const PricingSpec& spec, double s, double x, double tau,
                                          std::size_t n_nodes = 96);

/// d bs_oracle / d s by central differences.
[[nodiscard]] double bs_vega(const PricingSpec& spec, double s, double x, double tau);

/// Probabilists' Gauss-Hermite rule (weights sum to 1) by the Golub-Welsch eigenproblem.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
[[nodiscard]] QuadratureRule gauss_hermite(std::size_t n);

/**
 * Monte Carlo price at (t = 0, x0, fast.y0) with fast rate 1/epsilon.
 *
 * The factor uses the step fast.dt. Between steps sigma(Y) is frozen at the
 * left endpoint and the log-price is advanced exactly.
 */
[[nodiscard]] McEstimate price_mc(const PricingSpec& spec, double epsilon, const FastProcessConfig& fast,
                                  std::size_t n_paths);

struct PriceGridPoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    McEstimate estimate;
};

/**
 * Prices on the grid t_levels x x_levels x y_levels with one set of paths.
 * Time homogeneity turns (t, y) into a horizon T - t from y; linearity of
 * the factor in its start shares driver increments across y; the price path
 * is linear in x, so payoffs at every x come from the same paths.
 */
[[nodiscard]] std::vector<PriceGridPoint> price_mc_grid(const PricingSpec& spec, double epsilon,
                                                        const FastProcessConfig& fast, std::size_t n_paths,
                                                        const std::vector<double>& t_levels,
                                                        const std::vector<double>& x_levels,
                                                        const std::vector<double>& y_levels);

struct MertonSpec {
    double r = 0.05;
    double alpha_drift = 0.1;
    VolatilityFn sigma;
    double R1 = 0.0;
    double R = 3.0;
    double a = 1.0;
    double gamma = 0.5;
    double horizon = 1.0;
    double w0 = 1.0;
    std::size_t n_controls = 41;

    void validate() const;
};

[[nodiscard]] ControlProblemSpec merton_problem(const MertonSpec& spec);

/// Hamiltonian of merton_problem(spec), evaluating sigma once per call instead of once per control.
[[nodiscard]] HamiltonianFn merton_hamiltonian(const MertonSpec& spec);

/// r + sum_k mu_k max_{u in [R1, R]} {(alpha - r) u + (gamma - 1) sigma^2 u^2}.
[[nodiscard]] double merton_hbar(const MertonSpec& spec, const InvariantMeasure& mu);

/// a exp(gamma hbar (T - t)) w^gamma / gamma.
[[nodiscard]] double merton_hara_closed_form(const MertonSpec& spec, const InvariantMeasure& mu, double t, double w);

}  // namespace levy_multiscale
