// SPDX-License-Identifier: MIT
/**
 * @file hjb_solvers.hpp
 * @brief Finite-difference solvers for the singularly perturbed Bellman PIDE
 *
 *   -V_t + H(x, y, V_x, V_xx) - (1/eps) I[y, V] + c V = 0,   V(T, x, y) = g(x),
 *
 * and for the averaged problem -V_t + Hbar(x, V_x, V_xx) + c V = 0.
 *
 * Space is one-dimensional in x. The x grid is {0} followed by geometrically
 * spaced nodes, so relative resolution is uniform in x. No lateral condition
 * is imposed at x = 0 (the coefficients vanish there); the top node reuses
 * its neighbour's second difference with a backward first difference.
 *
 * Time stepping (backward from T, step dt):
 *
 *   W = e^{-c dt} ( V^{n+1} + dt max_u { a_u D2 V^{n+1} + b_u D1_u V^{n+1} } )
 *   (Id - dt/eps L_h) V^n = W          (per x node, along y)
 *
 * where a_u = sigma^2 / 2, b_u = f, D1_u is the central difference when it is
 * monotone (2 a_u >= |b_u| h) and the upwind difference otherwise, and L_h is
 * the monotone Toeplitz discretisation of I on the uniform y grid. The explicit
 * part is monotone for dt below the CFL bound; L_h is an M-matrix generator.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "levy_multiscale/control_problem.hpp"
#include "levy_multiscale/ergodicity.hpp"
#include "levy_multiscale/levy_measures.hpp"

namespace levy_multiscale {

enum class BoundaryPolicy { NO_BC_INTERIOR_SCHEME };

struct SolverGrids {
    /// First positive x node; nodes 1..n_x-1 are geometric on [x_min, x_max].
    double x_min = 0.01;
    double x_max = 20.0;
    std::size_t n_x = 200;
    double y_min = -8.0;
    double y_max = 8.0;
    std::size_t n_y = 81;
    /// Number of stored time levels, equispaced on [0, T] (at least 2).
    std::size_t n_t_out = 5;
    /// Requested step; 0 picks cfl_safety times the monotonicity bound.
    double dt = 0.0;
    double cfl_safety = 0.9;

    void validate(bool with_y) const;
    [[nodiscard]] std::vector<double> x_grid() const;
    [[nodiscard]] std::vector<double> y_grid() const;
};

struct SolveDiagnostics {
    double dt = 0.0;
    std::size_t n_steps = 0;
    /// Largest step keeping the explicit part monotone.
    double dt_cfl = 0.0;
    /// nu-mass of jumps from the node nearest y = 0 that leave the y grid.
    double extrapolated_mass = 0.0;
};

struct ValueField {
    std::vector<double> t_grid;
    std::vector<double> x_grid;
    /// Empty for fields of the averaged problem.
    std::vector<double> y_grid;
    /// values[(k * n_x + i) * n_y + j], n_y = 1 when y_grid is empty.
    std::vector<double> values;
    BoundaryPolicy boundary_policy = BoundaryPolicy::NO_BC_INTERIOR_SCHEME;
    std::optional<double> epsilon;
    SolveDiagnostics diagnostics;

    [[nodiscard]] bool has_y() const noexcept { return !y_grid.empty(); }
    [[nodiscard]] std::size_t ny() const noexcept { return has_y() ? y_grid.size() : 1; }
    [[nodiscard]] double at(std::size_t k, std::size_t i, std::size_t j = 0) const {
        return values[(k * x_grid.size() + i) * ny() + j];
    }
    /// Multilinear interpolation; y is ignored for fields without a y grid.
    [[nodiscard]] double interpolate(double t, double x, double y = 0.0) const;
};

/// CSV with columns t,x[,y],value.
void write_field_csv(const ValueField& field, const std::filesystem::path& path);

/**
 * Solves the eps-problem on the (t, x, y) grid. Refuses drivers that fail
 * the standing assumptions (AssumptionError) and steps above the CFL bound
 * (CflError carrying the suggested step).
 */
[[nodiscard]] ValueField pide_solve(const ControlProblemSpec& spec, const LevyMeasureModel& model, double epsilon,
                                    const SolverGrids& grids);

/// Solves the averaged problem with Hbar = sum_k mu_k H(x, y_k, p, X) on the (t, x) grid.
[[nodiscard]] ValueField effective_solve(const ControlProblemSpec& spec, const InvariantMeasure& mu,
                                         const SolverGrids& grids);

struct CompactBox {
    double t_lo = 0.0;
    double t_hi = 1.0;
    double x_lo = 0.5;
    double x_hi = 2.0;
    double y_lo = -1.0;
    double y_hi = 1.0;
};

/**
 * max |a - b| over the grid points of a inside the box, with b interpolated
 * multilinearly. Throws UsageError if the box misses either field's domain.
 */
[[nodiscard]] double sup_norm_gap(const ValueField& a, const ValueField& b, const CompactBox& box);

/// Toeplitz discretisation of the nonlocal operator on a uniform y grid (exposed for tests).
struct NonlocalStencil {
    std::vector<double> y;
    /// Dense row-major n_y x n_y generator matrix (rows sum to zero).
    std::vector<double> matrix;
    double extrapolated_mass = 0.0;
};

[[nodiscard]] NonlocalStencil nonlocal_stencil(const LevyMeasureModel& model, const std::vector<double>& y_grid);

}  // namespace levy_multiscale
