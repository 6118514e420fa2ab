// SPDX-License-Identifier: MIT
#include "levy_multiscale/finance.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "levy_multiscale/errors.hpp"
#include "levy_multiscale/random.hpp"
#include "monte_carlo.hpp"

namespace levy_multiscale {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

VolatilityFn constant_volatility(double s) {
    if (!(s >= 0.0)) throw UsageError("volatility must be nonnegative");
    return [s](double) { return s; };
}

VolatilityFn tanh_volatility(double base, double amplitude) {
    if (!(base > 0.0 && std::abs(amplitude) < base)) {
        throw UsageError(fmt::format("tanh volatility needs |amplitude| < base, got base {} amplitude {}", base,
                                     amplitude));
    }
    return [base, amplitude](double y) { return base + amplitude * std::tanh(y); };
}

double effective_vol_quadratic(const VolatilityFn& sigma, const InvariantMeasure& mu) {
    mu.validate();
    const double second = mu.expect([&](double y) {
        const double s = sigma(y);
        return s * s;
    });
    if (second == 0.0) {
        std::cerr << "warning: volatility vanishes on every node of the invariant measure\n";
        return 0.0;
    }
    return std::sqrt(second);
}

double effective_vol_harmonic(const VolatilityFn& sigma, const InvariantMeasure& mu) {
    mu.validate();
    double inverse = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const double s = sigma(mu.nodes[k]);
        if (s == 0.0) {
            throw AssumptionError(fmt::format("harmonic volatility undefined: sigma({}) = 0", mu.nodes[k]));
        }
        inverse += mu.weights[k] / (s * s);
    }
    return 1.0 / std::sqrt(inverse);
}

std::string to_string(PayoffKind kind) {
    switch (kind) {
        case PayoffKind::Call: return "call";
        case PayoffKind::Put: return "put";
        case PayoffKind::Identity: return "identity";
        case PayoffKind::Custom: return "custom";
    }
    return "custom";
}

PayoffKind parse_payoff_kind(const std::string& text) {
    if (text == "call") return PayoffKind::Call;
    if (text == "put") return PayoffKind::Put;
    if (text == "identity") return PayoffKind::Identity;
    throw UsageError(fmt::format("unknown payoff '{}' (expected call, put or identity)", text));
}

void PricingSpec::validate() const {
    if (!sigma) throw UsageError("pricing spec needs a volatility function");
    if (!(horizon > 0.0)) throw UsageError("pricing horizon must be positive");
    if (!(discount >= 0.0)) throw UsageError("pricing discount must be nonnegative");
    if (!(x0 >= 0.0)) throw UsageError("pricing x0 must be nonnegative");
    if ((payoff_kind == PayoffKind::Call || payoff_kind == PayoffKind::Put) && !(strike >= 0.0)) {
        throw UsageError("strike must be nonnegative");
    }
    if (payoff_kind == PayoffKind::Custom && !custom_payoff) throw UsageError("custom payoff is not set");
}

Payoff PricingSpec::payoff() const {
    const double k = strike;
    switch (payoff_kind) {
        case PayoffKind::Call: return [k](double x) { return std::max(x - k, 0.0); };
        case PayoffKind::Put: return [k](double x) { return std::max(k - x, 0.0); };
        case PayoffKind::Identity: return [](double x) { return x; };
        case PayoffKind::Custom: return custom_payoff;
    }
    return custom_payoff;
}

double PricingSpec::growth_constant() const {
    switch (payoff_kind) {
        case PayoffKind::Call:
        case PayoffKind::Identity: return 1.0;
        case PayoffKind::Put: return std::max(1.0, strike);
        case PayoffKind::Custom: return 1.0;
    }
    return 1.0;
}

ControlProblemSpec pricing_problem(const PricingSpec& spec) {
    spec.validate();
    ControlProblemSpec p;
    p.name = "pricing";
    const double r = spec.r;
    const VolatilityFn sigma = spec.sigma;
    p.drift = [r](double x, double, double) { return r * x; };
    p.volatility = [sigma](double x, double y, double) { return std::numbers::sqrt2 * sigma(y) * x; };
    p.controls = {0.0};
    p.payoff = spec.payoff();
    p.discount = spec.discount;
    p.horizon = spec.horizon;
    p.growth_constant = spec.growth_constant();
    return p;
}

QuadratureRule gauss_hermite(std::size_t n) {
    if (n == 0) throw UsageError("Gauss-Hermite rule needs at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(k));
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        rule.nodes[k] = eig.eigenvalues()(i);
        rule.weights[k] = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
    }
    return rule;
}

double lognormal_quadrature(const PricingSpec& spec, double s, double x, double tau, std::size_t n_nodes) {
    const Payoff g = spec.payoff();
    const double discount = std::exp(-spec.discount * tau);
    const double v = std::numbers::sqrt2 * s * std::sqrt(tau);
    const double drift = (spec.r - s * s) * tau;
    if (v == 0.0) return discount * g(x * std::exp(spec.r * tau));
    const QuadratureRule rule = gauss_hermite(n_nodes);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * g(x * std::exp(drift + v * rule.nodes[k]));
    return discount * sum;
}

double bs_oracle(const PricingSpec& spec, double s, double x, double tau) {
    spec.validate();
    if (!(s >= 0.0) || !(tau >= 0.0) || !(x >= 0.0)) throw UsageError("bs_oracle needs s, tau, x >= 0");
    const double discount = std::exp(-spec.discount * tau);
    const double forward = x * std::exp(spec.r * tau);
    const double v = std::numbers::sqrt2 * s * std::sqrt(tau);
    const double K = spec.strike;
    switch (spec.payoff_kind) {
        case PayoffKind::Identity: return discount * forward;
        case PayoffKind::Call:
        case PayoffKind::Put: {
            if (v == 0.0 || x == 0.0 || K == 0.0) return discount * spec.payoff()(forward);
            const double d1 = (std::log(forward / K) + 0.5 * v * v) / v;
            const double d2 = d1 - v;
            if (spec.payoff_kind == PayoffKind::Call) {
                return discount * (forward * normal_cdf(d1) - K * normal_cdf(d2));
            }
            return discount * (K * normal_cdf(-d2) - forward * normal_cdf(-d1));
        }
        case PayoffKind::Custom: return lognormal_quadrature(spec, s, x, tau);
    }
    return lognormal_quadrature(spec, s, x, tau);
}

double bs_vega(const PricingSpec& spec, double s, double x, double tau) {
    const double h = 1e-5 * std::max(1.0, s);
    const double lo = std::max(0.0, s - h);
    return (bs_oracle(spec, s + h, x, tau) - bs_oracle(spec, lo, x, tau)) / (s + h - lo);
}

McEstimate price_mc(const PricingSpec& spec, double epsilon, const FastProcessConfig& fast, std::size_t n_paths) {
    spec.validate();
    if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
    FastProcessConfig cfg = fast;
    cfg.lambda = 1.0 / epsilon;
    cfg.horizon = spec.horizon;
    cfg.validate();
    const FastProcessStepper stepper(cfg);
    const std::size_t n = cfg.n_steps();
    const double h = spec.horizon / static_cast<double>(n);
    const double sqrt_2h = std::sqrt(2.0 * h);
    const double discount = std::exp(-spec.discount * spec.horizon);
    const Payoff g = spec.payoff();
    return detail::monte_carlo(n_paths, [&](std::size_t p) {
        RandomStream jumps(cfg.seed, StreamKind::Jump, p);
        RandomStream noise(cfg.seed, StreamKind::Brownian, p);
        double y = cfg.y0;
        double log_x = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double s = spec.sigma(y);
            log_x += (spec.r - s * s) * h + s * sqrt_2h * noise.normal();
            y = stepper.step(y, jumps);
        }
        return discount * g(spec.x0 * std::exp(log_x));
    });
}

std::vector<PriceGridPoint> price_mc_grid(const PricingSpec& spec, double epsilon, const FastProcessConfig& fast,
                                          std::size_t n_paths, const std::vector<double>& t_levels,
                                          const std::vector<double>& x_levels, const std::vector<double>& y_levels) {
    spec.validate();
    if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
    if (t_levels.empty() || x_levels.empty() || y_levels.empty()) throw UsageError("price grid has an empty axis");
    if (n_paths == 0) throw UsageError("price grid needs at least one path");
    FastProcessConfig cfg = fast;
    cfg.lambda = 1.0 / epsilon;
    cfg.horizon = spec.horizon;
    cfg.validate();
    const FastProcessStepper stepper(cfg);
    const std::size_t n = cfg.n_steps();
    const double h = spec.horizon / static_cast<double>(n);
    const double sqrt_2h = std::sqrt(2.0 * h);

    // Step index at which the horizon T - t is reached.
    const std::size_t n_t = t_levels.size();
    std::vector<std::size_t> record(n_t);
    std::vector<double> tau(n_t);
    for (std::size_t m = 0; m < n_t; ++m) {
        if (!(t_levels[m] >= 0.0 && t_levels[m] < spec.horizon)) {
            throw UsageError(fmt::format("price grid time {} must lie in [0, T)", t_levels[m]));
        }
        record[m] = static_cast<std::size_t>(std::llround((spec.horizon - t_levels[m]) / h));
        record[m] = std::clamp<std::size_t>(record[m], 1, n);
        tau[m] = static_cast<double>(record[m]) * h;
    }
    const Payoff g = spec.payoff();
    const std::size_t n_x = x_levels.size();
    const std::size_t n_y = y_levels.size();
    const std::size_t n_points = n_t * n_x * n_y;
    const auto point = [&](std::size_t m, std::size_t i, std::size_t j) { return (m * n_x + i) * n_y + j; };

    const std::size_t n_blocks = (n_paths + detail::kPathsPerBlock - 1) / detail::kPathsPerBlock;
    std::vector<std::vector<detail::Moments>> blocks(n_blocks, std::vector<detail::Moments>(n_points));
    parallel_for_blocks(n_blocks, [&](std::size_t b) {
        auto& acc = blocks[b];
        std::vector<double> log_x(n_y);
        std::vector<double> at_record(n_t * n_y);
        const std::size_t end = std::min(n_paths, (b + 1) * detail::kPathsPerBlock);
        for (std::size_t p = b * detail::kPathsPerBlock; p < end; ++p) {
            RandomStream jumps(cfg.seed, StreamKind::Jump, p);
            RandomStream noise(cfg.seed, StreamKind::Brownian, p);
            std::fill(log_x.begin(), log_x.end(), 0.0);
            double base = 0.0;
            double memory = 1.0;
            for (std::size_t k = 1; k <= n; ++k) {
                const double xi = noise.normal();
                for (std::size_t j = 0; j < n_y; ++j) {
                    const double s = spec.sigma(base + y_levels[j] * memory);
                    log_x[j] += (spec.r - s * s) * h + s * sqrt_2h * xi;
                }
                base = stepper.step(base, jumps);
                memory *= stepper.decay();
                for (std::size_t m = 0; m < n_t; ++m) {
                    if (record[m] == k) {
                        for (std::size_t j = 0; j < n_y; ++j) at_record[m * n_y + j] = std::exp(log_x[j]);
                    }
                }
            }
            for (std::size_t m = 0; m < n_t; ++m) {
                const double discount = std::exp(-spec.discount * tau[m]);
                for (std::size_t i = 0; i < n_x; ++i) {
                    for (std::size_t j = 0; j < n_y; ++j) {
                        acc[point(m, i, j)].add(discount * g(x_levels[i] * at_record[m * n_y + j]));
                    }
                }
            }
        }
    });

    std::vector<PriceGridPoint> out(n_points);
    std::vector<detail::Moments> column(n_blocks);
    for (std::size_t m = 0; m < n_t; ++m) {
        for (std::size_t i = 0; i < n_x; ++i) {
            for (std::size_t j = 0; j < n_y; ++j) {
                const std::size_t q = point(m, i, j);
                for (std::size_t b = 0; b < n_blocks; ++b) column[b] = blocks[b][q];
                out[q] = {spec.horizon - tau[m], x_levels[i], y_levels[j], detail::finish(column)};
            }
        }
    }
    return out;
}

void MertonSpec::validate() const {
    if (!sigma) throw UsageError("Merton spec needs a volatility function");
    if (!(alpha_drift > r)) throw UsageError(fmt::format("Merton needs alpha = {} > r = {}", alpha_drift, r));
    if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError(fmt::format("HARA gamma = {} must lie in (0, 1)", gamma));
    if (!(a > 0.0)) throw UsageError("HARA a must be positive");
    if (!(R > 0.0 && R1 <= 0.0 && R1 >= -R)) {
        throw UsageError(fmt::format("control interval needs -R <= R1 <= 0 < R, got [{}, {}]", R1, R));
    }
    if (!(horizon > 0.0)) throw UsageError("Merton horizon must be positive");
    if (!(w0 > 0.0)) throw UsageError("Merton w0 must be positive");
    if (n_controls == 0) throw UsageError("Merton needs at least one control");
}

ControlProblemSpec merton_problem(const MertonSpec& spec) {
    spec.validate();
    ControlProblemSpec p;
    p.name = "merton";
    const double r = spec.r;
    const double excess = spec.alpha_drift - spec.r;
    const VolatilityFn sigma = spec.sigma;
    p.drift = [r, excess](double w, double, double u) { return w * (r + excess * u); };
    p.volatility = [sigma](double w, double y, double u) { return std::numbers::sqrt2 * u * sigma(y) * w; };
    p.controls = control_grid(spec.R1, spec.R, spec.n_controls);
    const double a = spec.a;
    const double gamma = spec.gamma;
    p.payoff = [a, gamma](double w) { return a * std::pow(std::max(w, 0.0), gamma) / gamma; };
    p.discount = 0.0;
    p.horizon = spec.horizon;
    p.growth_constant = a / gamma;
    return p;
}

HamiltonianFn merton_hamiltonian(const MertonSpec& spec) {
    spec.validate();
    const double r = spec.r;
    const double excess = spec.alpha_drift - spec.r;
    const VolatilityFn sigma = spec.sigma;
    const std::vector<double> controls = control_grid(spec.R1, spec.R, spec.n_controls);
    return [=](double w, double y, double p, double X) {
        const double s = sigma(y);
        double best = 0.0;
        for (std::size_t k = 0; k < controls.size(); ++k) {
            const double u = controls[k];
            const double vol = std::numbers::sqrt2 * u * s * w;
            const double value = -0.5 * vol * vol * X - w * (r + excess * u) * p;
            if (k == 0 || value < best) best = value;
        }
        return best;
    };
}

double merton_hbar(const MertonSpec& spec, const InvariantMeasure& mu) {
    spec.validate();
    mu.validate();
    const double excess = spec.alpha_drift - spec.r;
    const double one_minus_gamma = 1.0 - spec.gamma;
    const double averaged = mu.expect([&](double y) {
        const double s = spec.sigma(y);
        const double s2 = s * s;
        if (2.0 * spec.R * one_minus_gamma * s2 >= excess) return excess * excess / (4.0 * one_minus_gamma * s2);
        return excess * spec.R - one_minus_gamma * s2 * spec.R * spec.R;
    });
    return spec.r + averaged;
}

double merton_hara_closed_form(const MertonSpec& spec, const InvariantMeasure& mu, double t, double w) {
    if (!(w > 0.0)) throw UsageError(fmt::format("wealth w = {} must be positive", w));
    if (!(t >= 0.0 && t <= spec.horizon)) throw UsageError(fmt::format("time t = {} outside [0, T]", t));
    const double hbar = merton_hbar(spec, mu);
    return spec.a * std::exp(spec.gamma * hbar * (spec.horizon - t)) * std::pow(w, spec.gamma) / spec.gamma;
}

}  // namespace levy_multiscale
