// SPDX-License-Identifier: MIT
#include "levy_multiscale/hjb_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "io_util.hpp"
#include "levy_multiscale/errors.hpp"

namespace levy_multiscale {

namespace {

// ---------------------------------------------------------------------------
// Grids and interpolation

std::size_t locate(const std::vector<double>& grid, double v, const char* axis) {
    const double span = grid.back() - grid.front();
    const double tol = 1e-12 * std::max(1.0, std::abs(span));
    if (v < grid.front() - tol || v > grid.back() + tol) {
        throw UsageError(fmt::format("{} = {} lies outside the field domain [{}, {}]", axis, v, grid.front(),
                                     grid.back()));
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), v);
    const auto idx = static_cast<std::size_t>(std::distance(grid.begin(), it));
    return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, grid.size() - 2);
}

double fraction(const std::vector<double>& grid, std::size_t i, double v) {
    return std::clamp((v - grid[i]) / (grid[i + 1] - grid[i]), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Explicit Bellman part

// Neighbour coefficients of a D2 + b D1 at node i, with ghost reflection at x = 0.
struct Coupling {
    double lo;
    double up;
};

Coupling couple(double a, double b, double hm, double hp) {
    const double lo_a = 2.0 * a / (hm * (hm + hp));
    const double up_a = 2.0 * a / (hp * (hm + hp));
    if (2.0 * a >= b * hp && 2.0 * a >= -b * hm) {
        return {lo_a - b * hp / (hm * (hm + hp)), up_a + b * hm / (hp * (hm + hp))};
    }
    return b > 0.0 ? Coupling{lo_a, up_a + b / hp} : Coupling{lo_a - b / hm, up_a};
}

/// Coefficient tables for every (x node, factor state, control).
class BellmanTables {
public:
    BellmanTables(const ControlProblemSpec& spec, const std::vector<double>& x, const std::vector<double>& states)
        : n_x_(x.size()), n_s_(states.size()), n_u_(spec.controls.size()), x_(x) {
        coupling_.resize(n_x_ * n_s_ * n_u_);
        top_.resize(n_s_ * n_u_);
        for (std::size_t i = 0; i + 1 < n_x_; ++i) {
            const double hp = x[i + 1] - x[i];
            const double hm = i == 0 ? hp : x[i] - x[i - 1];
            for (std::size_t k = 0; k < n_s_; ++k) {
                for (std::size_t u = 0; u < n_u_; ++u) {
                    const double ctrl = spec.controls[u];
                    const double vol = spec.volatility(x[i], states[k], ctrl);
                    const double b = spec.drift(x[i], states[k], ctrl);
                    coupling_[index(i, k, u)] = couple(0.5 * vol * vol, b, hm, hp);
                }
            }
        }
        const std::size_t N = n_x_ - 1;
        for (std::size_t k = 0; k < n_s_; ++k) {
            for (std::size_t u = 0; u < n_u_; ++u) {
                const double ctrl = spec.controls[u];
                const double vol = spec.volatility(x[N], states[k], ctrl);
                top_[k * n_u_ + u] = {0.5 * vol * vol, spec.drift(x[N], states[k], ctrl)};
            }
        }
    }

    /// max_u of the discrete operator at interior or bottom node i for state k.
    [[nodiscard]] double interior(std::size_t i, std::size_t k, double dm, double dp) const {
        const Coupling* c = &coupling_[index(i, k, 0)];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < n_u_; ++u) best = std::max(best, c[u].lo * dm + c[u].up * dp);
        return best;
    }

    /// max_u at the top node: neighbour's second difference, backward first difference.
    [[nodiscard]] double top(std::size_t k, double d2_prev, double backward) const {
        const Coupling* c = &top_[k * n_u_];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < n_u_; ++u) best = std::max(best, c[u].lo * d2_prev + c[u].up * backward);
        return best;
    }

    /// Row sum bound max_u (lo + up) per node and state.
    [[nodiscard]] double rate(std::size_t i, std::size_t k) const {
        double best = 0.0;
        if (i + 1 < n_x_) {
            const Coupling* c = &coupling_[index(i, k, 0)];
            for (std::size_t u = 0; u < n_u_; ++u) best = std::max(best, c[u].lo + c[u].up);
        } else {
            const std::size_t N = n_x_ - 1;
            const double h = x_[N] - x_[N - 1];
            const double hm = x_[N - 1] - x_[N - 2];
            for (std::size_t u = 0; u < n_u_; ++u) {
                const Coupling& c = top_[k * n_u_ + u];
                best = std::max(best, 2.0 * c.lo / (hm * h) + std::abs(c.up) / h);
            }
        }
        return best;
    }

private:
    [[nodiscard]] std::size_t index(std::size_t i, std::size_t k, std::size_t u) const {
        return (i * n_s_ + k) * n_u_ + u;
    }

    std::size_t n_x_;
    std::size_t n_s_;
    std::size_t n_u_;
    std::vector<double> x_;
    std::vector<Coupling> coupling_;
    std::vector<Coupling> top_;  // {a, b}
};

/// Central second difference at interior node i of a strided column.
double second_difference(const std::vector<double>& x, const double* v, std::size_t stride, std::size_t i) {
    const double hm = x[i] - x[i - 1];
    const double hp = x[i + 1] - x[i];
    return 2.0 * ((v[(i + 1) * stride] - v[i * stride]) / hp - (v[i * stride] - v[(i - 1) * stride]) / hm) /
           (hm + hp);
}

/// Bellman increment max_u{...} at node i of the column v (x-stride `stride`) for state k.
double bellman_at(const BellmanTables& tables, const std::vector<double>& x, const double* v, std::size_t stride,
                  std::size_t i, std::size_t k) {
    const std::size_t N = x.size() - 1;
    const double vi = v[i * stride];
    if (i == N) {
        const double d2 = second_difference(x, v, stride, N - 1);
        const double backward = (vi - v[(N - 1) * stride]) / (x[N] - x[N - 1]);
        return tables.top(k, d2, backward);
    }
    const double dm = i == 0 ? 0.0 : v[(i - 1) * stride] - vi;
    const double dp = v[(i + 1) * stride] - vi;
    return tables.interior(i, k, dm, dp);
}

struct TimeStepping {
    double dt;
    std::size_t steps_per_output;
};

TimeStepping plan_steps(const SolverGrids& grids, double horizon, double dt_cfl) {
    const double target = grids.dt > 0.0 ? grids.dt : grids.cfl_safety * dt_cfl;
    if (grids.dt > 0.0 && grids.dt > dt_cfl) {
        throw CflError(fmt::format("time step {} exceeds the monotonicity bound {}; use dt <= {}", grids.dt, dt_cfl,
                                   grids.cfl_safety * dt_cfl),
                       grids.cfl_safety * dt_cfl);
    }
    const double interval = horizon / static_cast<double>(grids.n_t_out - 1);
    const auto steps = static_cast<std::size_t>(std::ceil(interval / target - 1e-12));
    return {interval / static_cast<double>(steps), steps};
}

std::vector<double> output_times(std::size_t n, double horizon) {
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = horizon * static_cast<double>(k) / static_cast<double>(n - 1);
    t.back() = horizon;
    return t;
}

// ---------------------------------------------------------------------------
// Nonlocal y-operator

double power_p0(double alpha, double a, double b) {
    const double upper = std::isinf(b) ? 0.0 : std::pow(b, -alpha);
    return (std::pow(a, -alpha) - upper) / alpha;
}

double power_p1(double alpha, double a, double b) {
    if (alpha == 1.0) return std::log(b / a);
    return (std::pow(b, 1.0 - alpha) - std::pow(a, 1.0 - alpha)) / (1.0 - alpha);
}

}  // namespace

// ---------------------------------------------------------------------------

void SolverGrids::validate(bool with_y) const {
    if (!(x_min > 0.0 && x_max > x_min)) {
        throw UsageError(fmt::format("grid needs 0 < x_min < x_max, got [{}, {}]", x_min, x_max));
    }
    if (n_x < 4) throw UsageError("grid needs n_x >= 4");
    if (n_t_out < 2) throw UsageError("grid needs n_t_out >= 2");
    if (dt < 0.0) throw UsageError("grid dt must be nonnegative");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw UsageError("cfl_safety must lie in (0, 1]");
    if (with_y) {
        if (!(y_max > y_min) || n_y < 3) throw UsageError("grid needs y_min < y_max and n_y >= 3");
        if ((y_max - y_min) / static_cast<double>(n_y - 1) >= 1.0) {
            throw UsageError("y spacing must be below 1 (the compensator range)");
        }
    }
}

std::vector<double> SolverGrids::x_grid() const {
    std::vector<double> x(n_x);
    x[0] = 0.0;
    const double ratio = std::log(x_max / x_min) / static_cast<double>(n_x - 2);
    for (std::size_t i = 1; i < n_x; ++i) x[i] = x_min * std::exp(ratio * static_cast<double>(i - 1));
    x.back() = x_max;
    return x;
}

std::vector<double> SolverGrids::y_grid() const {
    std::vector<double> y(n_y);
    for (std::size_t j = 0; j < n_y; ++j) {
        y[j] = y_min + (y_max - y_min) * static_cast<double>(j) / static_cast<double>(n_y - 1);
    }
    y.back() = y_max;
    return y;
}

double ValueField::interpolate(double t, double x, double y) const {
    const std::size_t k = locate(t_grid, t, "t");
    const std::size_t i = locate(x_grid, x, "x");
    const double ft = fraction(t_grid, k, t);
    const double fx = fraction(x_grid, i, x);
    std::size_t j = 0;
    double fy = 0.0;
    if (has_y()) {
        j = locate(y_grid, y, "y");
        fy = fraction(y_grid, j, y);
    }
    double out = 0.0;
    for (int dk = 0; dk < 2; ++dk) {
        for (int di = 0; di < 2; ++di) {
            for (int dj = 0; dj < (has_y() ? 2 : 1); ++dj) {
                const double w = (dk ? ft : 1.0 - ft) * (di ? fx : 1.0 - fx) * (has_y() ? (dj ? fy : 1.0 - fy) : 1.0);
                if (w != 0.0) out += w * at(k + dk, i + di, j + dj);
            }
        }
    }
    return out;
}

void write_field_csv(const ValueField& field, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    out << (field.has_y() ? "t,x,y,value\n" : "t,x,value\n");
    for (std::size_t k = 0; k < field.t_grid.size(); ++k) {
        for (std::size_t i = 0; i < field.x_grid.size(); ++i) {
            for (std::size_t j = 0; j < field.ny(); ++j) {
                out << detail::num(field.t_grid[k]) << ',' << detail::num(field.x_grid[i]) << ',';
                if (field.has_y()) out << detail::num(field.y_grid[j]) << ',';
                out << detail::num(field.at(k, i, j)) << '\n';
            }
        }
    }
    detail::finish_write(out, path);
}

NonlocalStencil nonlocal_stencil(const LevyMeasureModel& model, const std::vector<double>& y) {
    model.validate();
    const std::size_t n = y.size();
    if (n < 3) throw UsageError("nonlocal stencil needs at least three y nodes");
    const double h = (y.back() - y.front()) / static_cast<double>(n - 1);
    if (!(h > 0.0 && h < 1.0)) throw UsageError("nonlocal stencil needs a uniform y spacing in (0, 1)");

    NonlocalStencil st;
    st.y = y;
    st.matrix.assign(n * n, 0.0);
    auto L = [&](std::size_t r, std::size_t c) -> double& { return st.matrix[r * n + c]; };

    const double a = model.alpha;
    const double c = model.intensity;
    // Hat-function weight of lattice offset d >= 1 and ramp (cumulative) weight from offset D >= 1.
    const auto hat = [&](std::size_t d) {
        const double dd = static_cast<double>(d);
        double w = 0.0;
        if (d >= 2) w += power_p1(a, (dd - 1.0) * h, dd * h) / h - (dd - 1.0) * power_p0(a, (dd - 1.0) * h, dd * h);
        w += (dd + 1.0) * power_p0(a, dd * h, (dd + 1.0) * h) - power_p1(a, dd * h, (dd + 1.0) * h) / h;
        return c * w;
    };
    const auto ramp = [&](std::size_t D) {
        const double DD = static_cast<double>(D);
        double w = power_p0(a, DD * h, std::numeric_limits<double>::infinity());
        if (D >= 2) w += power_p1(a, (DD - 1.0) * h, DD * h) / h - (DD - 1.0) * power_p0(a, (DD - 1.0) * h, DD * h);
        return c * w;
    };

    if (!model.is_null()) {
        std::vector<double> hats(n, 0.0);
        for (std::size_t d = 1; d < n; ++d) hats[d] = hat(d);
        const std::size_t N = n - 1;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t m = j + 1; m < N; ++m) L(j, m) += hats[m - j];
            if (j < N) L(j, N) += ramp(N - j);
            if (model.two_sided()) {
                for (std::size_t m = 1; m < j; ++m) L(j, m) += hats[j - m];
                if (j > 0) L(j, 0) += ramp(j);
            }
        }
        std::size_t centre = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(y[j]) < std::abs(y[centre])) centre = j;
        }
        st.extrapolated_mass = (centre < N ? ramp(N - centre) : 0.0) +
                               (model.two_sided() && centre > 0 ? ramp(centre) : 0.0);
    }

    // Small jumps as diffusion, the compensator over h <= |z| <= 1 and the mean reversion as drift.
    const double diffusion = model.is_null() ? 0.0 : 0.5 * small_jump_variance(model, h);
    const double shift = model.is_null() ? 0.0 : compensator_drift(model, h);
    for (std::size_t j = 0; j < n; ++j) {
        const double b = -(y[j] + shift);
        double lo = diffusion / (h * h);
        double up = lo;
        if (2.0 * diffusion >= std::abs(b) * h) {
            up += b / (2.0 * h);
            lo -= b / (2.0 * h);
        } else if (b > 0.0) {
            up += b / h;
        } else {
            lo -= b / h;
        }
        if (j + 1 < n) L(j, j + 1) += up;  // ghost nodes copy the boundary value
        if (j > 0) L(j, j - 1) += lo;
    }
    for (std::size_t j = 0; j < n; ++j) {
        double off = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            if (m != j) off += L(j, m);
        }
        L(j, j) = -off;
    }
    return st;
}

ValueField pide_solve(const ControlProblemSpec& spec, const LevyMeasureModel& model, double epsilon,
                      const SolverGrids& grids) {
    spec.validate();
    grids.validate(true);
    if (!(epsilon > 0.0)) throw UsageError(fmt::format("epsilon = {} must be positive", epsilon));
    const AssumptionReport report = check_assumptions(model);
    if (!report.all_satisfied()) {
        throw AssumptionError(fmt::format("driver fails the standing assumptions (A1 {}, A3 {}, A2 {})",
                                          report.a1_satisfied, report.a3_satisfied, report.a2_satisfied));
    }

    const std::vector<double> x = grids.x_grid();
    const std::vector<double> y = grids.y_grid();
    const std::size_t n_x = x.size();
    const std::size_t n_y = y.size();
    const BellmanTables tables(spec, x, y);

    double max_rate = 0.0;
    for (std::size_t i = 0; i < n_x; ++i) {
        for (std::size_t j = 0; j < n_y; ++j) max_rate = std::max(max_rate, tables.rate(i, j));
    }
    const double dt_cfl = max_rate > 0.0 ? 1.0 / max_rate : spec.horizon;
    const TimeStepping plan = plan_steps(grids, spec.horizon, dt_cfl);

    const NonlocalStencil stencil = nonlocal_stencil(model, y);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Lh(
        stencil.matrix.data(), static_cast<Eigen::Index>(n_y), static_cast<Eigen::Index>(n_y));
    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n_y), static_cast<Eigen::Index>(n_y)) -
        (plan.dt / epsilon) * Lh;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);

    ValueField field;
    field.t_grid = output_times(grids.n_t_out, spec.horizon);
    field.x_grid = x;
    field.y_grid = y;
    field.epsilon = epsilon;
    field.values.assign(field.t_grid.size() * n_x * n_y, 0.0);
    field.diagnostics = {plan.dt, plan.steps_per_output * (grids.n_t_out - 1), dt_cfl, stencil.extrapolated_mass};

    // V(j, i): column i holds the y-profile at x_i, contiguous in memory.
    Eigen::MatrixXd V(static_cast<Eigen::Index>(n_y), static_cast<Eigen::Index>(n_x));
    for (std::size_t i = 0; i < n_x; ++i) V.col(static_cast<Eigen::Index>(i)).setConstant(spec.payoff(x[i]));
    Eigen::MatrixXd W(V.rows(), V.cols());

    const auto store = [&](std::size_t k) {
        for (std::size_t i = 0; i < n_x; ++i) {
            for (std::size_t j = 0; j < n_y; ++j) {
                field.values[(k * n_x + i) * n_y + j] =
                    V(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            }
        }
    };
    std::size_t k_out = grids.n_t_out - 1;
    store(k_out);
    const double damp = std::exp(-spec.discount * plan.dt);
    while (k_out > 0) {
        for (std::size_t s = 0; s < plan.steps_per_output; ++s) {
            const double* v = V.data();
            for (std::size_t i = 0; i < n_x; ++i) {
                for (std::size_t j = 0; j < n_y; ++j) {
                    const double inc = bellman_at(tables, x, v + j, n_y, i, j);
                    W(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = damp * (v[i * n_y + j] + plan.dt * inc);
                }
            }
            V = lu.solve(W);
        }
        if (!V.allFinite()) throw NumericalError("eps-problem produced non-finite values");
        store(--k_out);
    }
    return field;
}

ValueField effective_solve(const ControlProblemSpec& spec, const InvariantMeasure& mu, const SolverGrids& grids) {
    spec.validate();
    grids.validate(false);
    mu.validate();
    const std::vector<double> x = grids.x_grid();
    const std::size_t n_x = x.size();
    const std::size_t n_k = mu.size();
    const BellmanTables tables(spec, x, mu.nodes);

    double max_rate = 0.0;
    for (std::size_t i = 0; i < n_x; ++i) {
        double rate = 0.0;
        for (std::size_t k = 0; k < n_k; ++k) rate += mu.weights[k] * tables.rate(i, k);
        max_rate = std::max(max_rate, rate);
    }
    const double dt_cfl = max_rate > 0.0 ? 1.0 / max_rate : spec.horizon;
    const TimeStepping plan = plan_steps(grids, spec.horizon, dt_cfl);

    ValueField field;
    field.t_grid = output_times(grids.n_t_out, spec.horizon);
    field.x_grid = x;
    field.values.assign(field.t_grid.size() * n_x, 0.0);
    field.diagnostics = {plan.dt, plan.steps_per_output * (grids.n_t_out - 1), dt_cfl, 0.0};

    std::vector<double> V(n_x);
    std::vector<double> next(n_x);
    for (std::size_t i = 0; i < n_x; ++i) V[i] = spec.payoff(x[i]);
    std::size_t k_out = grids.n_t_out - 1;
    std::copy(V.begin(), V.end(), field.values.begin() + static_cast<std::ptrdiff_t>(k_out * n_x));
    const double damp = std::exp(-spec.discount * plan.dt);
    while (k_out > 0) {
        for (std::size_t s = 0; s < plan.steps_per_output; ++s) {
            for (std::size_t i = 0; i < n_x; ++i) {
                double inc = 0.0;
                for (std::size_t k = 0; k < n_k; ++k) inc += mu.weights[k] * bellman_at(tables, x, V.data(), 1, i, k);
                next[i] = damp * (V[i] + plan.dt * inc);
            }
            V.swap(next);
        }
        for (double v : V) {
            if (!std::isfinite(v)) throw NumericalError("averaged problem produced non-finite values");
        }
        --k_out;
        std::copy(V.begin(), V.end(), field.values.begin() + static_cast<std::ptrdiff_t>(k_out * n_x));
    }
    return field;
}

double sup_norm_gap(const ValueField& a, const ValueField& b, const CompactBox& box) {
    const auto inside = [](double v, double lo, double hi) {
        const double tol = 1e-12 * std::max(1.0, std::abs(hi - lo));
        return v >= lo - tol && v <= hi + tol;
    };
    const auto covers = [&](const ValueField& f) {
        return inside(box.t_lo, f.t_grid.front(), f.t_grid.back()) && inside(box.t_hi, f.t_grid.front(), f.t_grid.back()) &&
               inside(box.x_lo, f.x_grid.front(), f.x_grid.back()) && inside(box.x_hi, f.x_grid.front(), f.x_grid.back()) &&
               (!f.has_y() || (inside(box.y_lo, f.y_grid.front(), f.y_grid.back()) &&
                               inside(box.y_hi, f.y_grid.front(), f.y_grid.back())));
    };
    if (!covers(a) || !covers(b)) throw UsageError("compact box is not contained in both field domains");

    double gap = 0.0;
    std::size_t points = 0;
    for (std::size_t k = 0; k < a.t_grid.size(); ++k) {
        if (!inside(a.t_grid[k], box.t_lo, box.t_hi)) continue;
        for (std::size_t i = 0; i < a.x_grid.size(); ++i) {
            if (!inside(a.x_grid[i], box.x_lo, box.x_hi)) continue;
            for (std::size_t j = 0; j < a.ny(); ++j) {
                const double yv = a.has_y() ? a.y_grid[j] : 0.5 * (box.y_lo + box.y_hi);
                if (a.has_y() && !inside(yv, box.y_lo, box.y_hi)) continue;
                gap = std::max(gap, std::abs(a.at(k, i, j) - b.interpolate(a.t_grid[k], a.x_grid[i], yv)));
                ++points;
            }
        }
    }
    if (points == 0) throw UsageError("compact box contains no grid point of the first field");
    return gap;
}

}  // namespace levy_multiscale
