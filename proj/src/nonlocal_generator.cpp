// SPDX-License-Identifier: MIT
#include "levy_multiscale/nonlocal_generator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "levy_multiscale/errors.hpp"
#include "levy_multiscale/jump_processes.hpp"
#include "levy_multiscale/random.hpp"
#include "levy_quadrature.hpp"

namespace levy_multiscale {

void GeneratorQuadrature::validate() const {
    model.validate();
    const double m = outer_cut();
    if (!(kappa > 0.0 && kappa < 1.0 && m > 1.0)) {
        throw UsageError(fmt::format("generator quadrature needs 0 < kappa < 1 < M, got kappa = {}, M = {}", kappa, m));
    }
    if (!(tolerance > 0.0)) throw UsageError("generator quadrature tolerance must be positive");
    if (!(max_piece > 0.0)) throw UsageError("generator quadrature max_piece must be positive");
}

double GeneratorQuadrature::outer_cut() const {
    if (M > 0.0) return M;
    return std::min(1e6, std::pow(1e8, 1.0 / model.alpha));
}

SmoothFunction SmoothFunction::constant(double k) {
    return {[k](double) { return k; }, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0};
}

SmoothFunction SmoothFunction::identity() {
    return {[](double y) { return y; }, [](double) { return 1.0; }, [](double) { return 0.0; }, 1.0};
}

SmoothFunction SmoothFunction::cosine(double w) {
    return {[w](double y) { return std::cos(w * y); }, [w](double y) { return -w * std::sin(w * y); },
            [w](double y) { return -w * w * std::cos(w * y); }, 0.0};
}

SmoothFunction SmoothFunction::lyapunov(double q) {
    return {[q](double y) { return std::pow(1.0 + y * y, 0.5 * q); },
            [q](double y) { return q * y * std::pow(1.0 + y * y, 0.5 * q - 1.0); },
            [q](double y) {
                const double s = 1.0 + y * y;
                return q * std::pow(s, 0.5 * q - 1.0) + q * (q - 2.0) * y * y * std::pow(s, 0.5 * q - 2.0);
            },
            q};
}

GeneratorValue generator_apply(const GeneratorQuadrature& q, const SmoothFunction& fn, double y) {
    q.validate();
    const LevyMeasureModel& model = q.model;
    const double fy = fn.f(y);
    const double dfy = fn.df(y);
    const double drift = -dfy * y;
    if (model.is_null()) return {drift, 0.0};

    const double a = model.alpha;
    const double c = model.intensity;
    const double M = q.outer_cut();
    const bool both = model.two_sided();

    // Integrands against z^{-1-alpha} on z > 0, mirrored for two-sided measures.
    const auto inner = [&](double z) {
        double v = fn.f(y + z) - fy - dfy * z;
        if (both) v += fn.f(y - z) - fy + dfy * z;
        return c * v;
    };
    const auto outer = [&](double z) {
        double v = fn.f(y + z) - fy;
        if (both) v += fn.f(y - z) - fy;
        return c * v;
    };
    detail::QuadratureSum sum = detail::integrate_power_weighted(inner, a, q.kappa, 1.0, q.tolerance, q.max_piece);
    sum += detail::integrate_power_weighted(outer, a, 1.0, M, q.tolerance, q.max_piece);

    const double d2fy = fn.d2f(y);
    const double taylor = 0.5 * d2fy * small_jump_variance(model, q.kappa);
    const double d3_estimate = std::abs(fn.d2f(y + q.kappa) - fn.d2f(y - q.kappa)) / (2.0 * q.kappa);
    const double taylor_error = d3_estimate * c * std::pow(q.kappa, 3.0 - a) / (6.0 * (3.0 - a));

    const double g = fn.growth_order;
    if (g >= a) {
        throw UsageError(fmt::format("growth order {} of f must be below alpha = {}", g, a));
    }
    const double Ma = std::pow(M, -a);
    double tail = c * (fn.f(y + M) * Ma / (a - g) - fy * Ma / a);
    if (both) tail += c * (fn.f(y - M) * Ma / (a - g) - fy * Ma / a);
    // The closed form assumes f grows like |z|^g beyond M. Its own size is
    // taken as the truncation error; for bounded f the jump term can be as
    // large as |f(y + M) - f(y)| times the tail mass.
    double tail_error = std::abs(tail);
    if (g == 0.0) {
        tail_error = c * std::abs(fn.f(y + M) - fy) * Ma / a;
        if (both) tail_error += c * std::abs(fn.f(y - M) - fy) * Ma / a;
    }

    const double value = drift + sum.value + taylor + tail;
    const double scale = std::max({sum.l1, std::abs(value), std::abs(drift)});
    if (sum.error > std::max(1e3 * q.tolerance * scale, 1e-12)) {
        throw NumericalError(fmt::format("generator quadrature at y = {} reached error {:.3g}", y, sum.error), value,
                             sum.error);
    }
    return {value, sum.error + taylor_error + tail_error};
}

LyapunovCheck lyapunov_drift_check(const GeneratorQuadrature& q, double q_exp, double R,
                                   const std::vector<double>& y_samples) {
    if (!(q_exp > 0.0 && q_exp < q.model.alpha)) {
        throw UsageError(fmt::format("Lyapunov exponent q = {} must lie in (0, alpha = {})", q_exp, q.model.alpha));
    }
    if (!(R > 0.0)) throw UsageError("Lyapunov radius R must be positive");
    if (y_samples.empty()) throw UsageError("Lyapunov check needs at least one sample");
    const SmoothFunction phi = SmoothFunction::lyapunov(q_exp);
    LyapunovCheck out;
    out.a_witness = std::numeric_limits<double>::infinity();
    for (double y : y_samples) {
        if (std::abs(y) < R) {
            throw UsageError(fmt::format("Lyapunov sample y = {} lies inside the radius R = {}", y, R));
        }
        const double ratio = -generator_apply(q, phi, y).value / phi.f(y);
        out.a_witness = std::min(out.a_witness, ratio);
    }
    out.pass = out.a_witness > 0.0;
    return out;
}

SmoothFunction counterexample_profile(double c, double L) {
    const auto f = [c, L](double y) {
        const double s = -c - y;
        return s > 0.0 ? -std::exp(-L / s) : 0.0;
    };
    const auto df = [c, L](double y) {
        const double s = -c - y;
        return s > 0.0 ? std::exp(-L / s) * L / (s * s) : 0.0;
    };
    const auto d2f = [c, L](double y) {
        const double s = -c - y;
        if (s <= 0.0) return 0.0;
        const double s2 = s * s;
        return -std::exp(-L / s) * (L * L / (s2 * s2) - 2.0 * L / (s2 * s));
    };
    return {f, df, d2f, 0.0};
}

CounterexampleResult subordinator_counterexample(const GeneratorQuadrature& q, double y_lo, double y_hi,
                                                 std::size_t n_points, double profile_scale) {
    if (!q.model.subordinator_mode || q.model.two_sided() || !(q.model.alpha < 1.0)) {
        throw UsageError("the counterexample needs a one-sided driver with alpha < 1 in subordinator mode");
    }
    if (n_points < 2 || !(y_hi > y_lo)) throw UsageError("counterexample grid needs y_hi > y_lo and two points");
    if (!(profile_scale > 0.0)) throw UsageError("counterexample profile scale must be positive");

    CounterexampleResult out;
    out.c = q.model.intensity / (1.0 - q.model.alpha);
    out.profile_scale = profile_scale;
    const SmoothFunction f = counterexample_profile(out.c, profile_scale);
    out.max_violation = -std::numeric_limits<double>::infinity();
    out.y_grid.reserve(n_points);
    out.minus_generator.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double y = y_lo + (y_hi - y_lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
        const double v = -generator_apply(q, f, y).value;
        out.y_grid.push_back(y);
        out.minus_generator.push_back(v);
        out.max_violation = std::max(out.max_violation, v);
    }
    return out;
}

void CorrectorQuery::validate() const {
    model.validate();
    if (model.subordinator_mode) throw AssumptionError("approximate correctors need an ergodic driver");
    if (!(delta > 0.0)) throw UsageError(fmt::format("corrector delta = {} must be positive", delta));
    if (y_grid.empty()) throw UsageError("corrector y grid is empty");
    if (mc_paths < 1000) throw UsageError(fmt::format("corrector needs at least 1000 paths, got {}", mc_paths));
    if (!(dt > 0.0)) throw UsageError("corrector time step must be positive");
}

std::vector<CorrectorPoint> approximate_corrector(const CorrectorQuery& cq, const HamiltonianFn& H) {
    cq.validate();
    return approximate_corrector(cq, {cq.delta}, H).front();
}

std::vector<std::vector<CorrectorPoint>> approximate_corrector(const CorrectorQuery& cq,
                                                               const std::vector<double>& deltas,
                                                               const HamiltonianFn& H) {
    if (deltas.empty()) throw UsageError("corrector needs at least one delta");
    CorrectorQuery check = cq;
    for (double d : deltas) {
        check.delta = d;
        check.validate();
    }

    // Each delta runs to its own horizon 10 / delta; the discount mass left
    // after it is put on the terminal state, so a constant Hamiltonian is
    // integrated exactly.
    const std::size_t n_d = deltas.size();
    std::vector<std::size_t> n_steps(n_d);
    std::vector<double> step_discount(n_d);
    std::size_t n_max = 0;
    for (std::size_t d = 0; d < n_d; ++d) {
        n_steps[d] = static_cast<std::size_t>(std::ceil(10.0 / (deltas[d] * cq.dt) - 1e-9));
        step_discount[d] = std::exp(-deltas[d] * cq.dt);
        n_max = std::max(n_max, n_steps[d]);
    }

    FastProcessConfig fast;
    fast.model = cq.model;
    fast.lambda = 1.0;
    fast.dt = cq.dt;
    fast.horizon = static_cast<double>(n_max) * cq.dt;
    fast.seed = cq.seed;
    const FastProcessStepper stepper(fast);
    const double decay = stepper.decay();

    const std::size_t n_y = cq.y_grid.size();
    double y_span = 0.0;
    for (double y : cq.y_grid) y_span = std::max(y_span, std::abs(y));

    constexpr std::size_t kBlock = 128;
    const std::size_t n_blocks = (cq.mc_paths + kBlock - 1) / kBlock;
    // Per block: for each (delta, y) the sum and the sum of squares.
    std::vector<std::vector<double>> sums(n_blocks, std::vector<double>(2 * n_d * n_y, 0.0));
    parallel_for_blocks(n_blocks, [&](std::size_t b) {
        std::vector<double>& s = sums[b];
        std::vector<double> acc(n_d * n_y);
        std::vector<double> h(n_y);
        std::vector<double> discount(n_d);
        const std::size_t end = std::min(cq.mc_paths, (b + 1) * kBlock);
        for (std::size_t p = b * kBlock; p < end; ++p) {
            RandomStream rng(cq.seed, StreamKind::Jump, p);
            std::fill(acc.begin(), acc.end(), 0.0);
            std::fill(discount.begin(), discount.end(), 1.0);
            double base = 0.0;    // path started at 0
            double memory = 1.0;  // e^{-t_k}
            for (std::size_t k = 0; k <= n_max; ++k) {
                if (memory * y_span < 1e-15 * (1.0 + std::abs(base))) {
                    std::fill(h.begin(), h.end(), H(cq.x_bar, base, cq.p_bar, cq.X_bar));
                } else {
                    for (std::size_t j = 0; j < n_y; ++j) {
                        h[j] = H(cq.x_bar, base + cq.y_grid[j] * memory, cq.p_bar, cq.X_bar);
                    }
                }
                for (std::size_t d = 0; d < n_d; ++d) {
                    if (k > n_steps[d]) continue;
                    const double mass = k < n_steps[d] ? discount[d] * (1.0 - step_discount[d]) : discount[d];
                    const double w = mass / deltas[d];
                    for (std::size_t j = 0; j < n_y; ++j) acc[d * n_y + j] += w * h[j];
                    discount[d] *= step_discount[d];
                }
                if (k == n_max) break;
                base = decay * base + stepper.increment(rng);
                memory *= decay;
            }
            for (std::size_t i = 0; i < n_d * n_y; ++i) {
                s[2 * i] += acc[i];
                s[2 * i + 1] += acc[i] * acc[i];
            }
        }
    });

    std::vector<std::vector<CorrectorPoint>> out(n_d, std::vector<CorrectorPoint>(n_y));
    const double n = static_cast<double>(cq.mc_paths);
    for (std::size_t d = 0; d < n_d; ++d) {
        for (std::size_t j = 0; j < n_y; ++j) {
            const std::size_t i = d * n_y + j;
            double s1 = 0.0;
            double s2 = 0.0;
            for (const auto& s : sums) {
                s1 += s[2 * i];
                s2 += s[2 * i + 1];
            }
            const double mean = s1 / n;
            const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
            out[d][j] = {cq.y_grid[j], -mean, std::sqrt(var / n)};
        }
    }
    return out;
}

double effective_hamiltonian(const InvariantMeasure& mu, const HamiltonianFn& H, double x, double p, double X) {
    if (mu.nodes.empty()) throw UsageError("effective Hamiltonian needs a nonempty measure");
    return mu.expect([&](double y) { return H(x, y, p, X); });
}

}  // namespace levy_multiscale
