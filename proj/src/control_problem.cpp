// SPDX-License-Identifier: MIT
#include "levy_multiscale/control_problem.hpp"

#include <cmath>

#include <fmt/format.h>

#include "levy_multiscale/errors.hpp"

namespace levy_multiscale {

void ControlProblemSpec::validate() const {
    if (!drift || !volatility || !payoff) {
        throw UsageError(fmt::format("control problem '{}' is missing a coefficient", name));
    }
    if (controls.empty()) {
        throw UsageError(fmt::format("control problem '{}' has an empty control grid", name));
    }
    if (!(horizon > 0.0)) throw UsageError("problem.T must be positive");
    if (!(discount >= 0.0)) throw UsageError("problem.c must be nonnegative");
    if (!(growth_constant > 0.0)) throw UsageError("growth constant must be positive");
}

std::vector<double> control_grid(double lo, double hi, std::size_t n) {
    if (n == 0) throw UsageError("control grid needs at least one point");
    if (hi < lo) throw UsageError(fmt::format("control interval [{}, {}] is empty", lo, hi));
    if (n == 1) return {lo};
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k) {
        grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    grid.back() = hi;
    return grid;
}

HamiltonianValue hamiltonian_eval(const ControlProblemSpec& spec, double x, double y, double p,
                                  double X) {
    HamiltonianValue best{0.0, 0, spec.controls.front()};
    for (std::size_t k = 0; k < spec.controls.size(); ++k) {
        const double u = spec.controls[k];
        const double s = spec.volatility(x, y, u);
        const double value = -0.5 * s * s * X - spec.drift(x, y, u) * p;
        if (k == 0 || value < best.value) best = {value, k, u};
    }
    return best;
}

HamiltonianFn hamiltonian_handle(const ControlProblemSpec& spec) {
    return [spec](double x, double y, double p, double X) {
        return hamiltonian_eval(spec, x, y, p, X).value;
    };
}

}  // namespace levy_multiscale
