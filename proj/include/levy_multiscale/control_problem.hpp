// SPDX-License-Identifier: MIT
/**
 * @file control_problem.hpp
 * @brief One-dimensional controlled diffusion with a fast volatility factor.
 *
 *   dX = f(X, Y, u) ds + sigma(X, Y, u) dW,    X >= 0,
 *   value = sup_u E[ e^{c(t-T)} g(X(T)) ].
 *
 * Coefficients must vanish at x = 0 so that the closed half-line is invariant.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace levy_multiscale {

/// Coefficient (x, y, u) -> value.
using StateCoefficient = std::function<double(double, double, double)>;
using Payoff = std::function<double(double)>;

struct ControlProblemSpec {
    std::string name;
    StateCoefficient drift;
    StateCoefficient volatility;
    std::vector<double> controls;
    Payoff payoff;
    double discount = 0.0;
    double horizon = 1.0;
    /// K in |g(x)| <= K (1 + x^2).
    double growth_constant = 1.0;

    void validate() const;
};

/// n equispaced controls on [lo, hi]; n = 1 gives {lo}.
[[nodiscard]] std::vector<double> control_grid(double lo, double hi, std::size_t n = 41);

struct HamiltonianValue {
    double value;
    std::size_t control_index;
    double control;
};

/**
 * H(x, y, p, X) = min_u { -1/2 sigma^2 X - f p } over the control grid.
 * Ties go to the smallest grid index.
 */
[[nodiscard]] HamiltonianValue hamiltonian_eval(const ControlProblemSpec& spec, double x, double y,
                                                double p, double X);

/// Frozen Hamiltonian handle (x, y, p, X) -> H.
using HamiltonianFn = std::function<double(double, double, double, double)>;

[[nodiscard]] HamiltonianFn hamiltonian_handle(const ControlProblemSpec& spec);

}  // namespace levy_multiscale
