// SPDX-License-Identifier: MIT
#include "levy_multiscale/jump_processes.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

#include <fmt/format.h>

#include "levy_multiscale/errors.hpp"

namespace levy_multiscale {

void FastProcessConfig::validate() const {
    model.validate();
    if (!(lambda > 0.0)) throw UsageError(fmt::format("fast.lambda = {} must be positive", lambda));
    if (!(dt > 0.0)) throw UsageError(fmt::format("fast.dt = {} must be positive", dt));
    if (!(horizon > 0.0)) throw UsageError(fmt::format("fast.horizon = {} must be positive", horizon));
    if (!(dt < horizon)) {
        throw UsageError(fmt::format("fast.dt = {} must be smaller than the horizon {}", dt, horizon));
    }
}

std::size_t FastProcessConfig::n_steps() const {
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

double FastProcessConfig::default_dt(double epsilon, double horizon) {
    return std::min(epsilon / 20.0, horizon / 2000.0);
}

StableIncrementSampler::StableIncrementSampler(const LevyMeasureModel& model, bool allow_subordinator)
    : params_(stable_parameters(model)) {
    model.validate();
    if (model.subordinator_mode && !allow_subordinator) {
        throw UsageError("sampling a subordinator driver requires explicit permission");
    }
    null_ = model.is_null();
    inv_alpha_ = 1.0 / params_.alpha;
    if (params_.skew != 0.0) {
        const double t = params_.skew * std::tan(std::numbers::pi * params_.alpha / 2.0);
        shift_ = std::atan(t) / params_.alpha;
        factor_ = std::pow(1.0 + t * t, 1.0 / (2.0 * params_.alpha));
    }
}

double StableIncrementSampler::standard(RandomStream& rng) const {
    const double V = std::numbers::pi * (rng.uniform_open() - 0.5);
    if (params_.alpha == 1.0) return std::tan(V);
    const double W = rng.exponential();
    const double a = params_.alpha;
    const double shifted = a * (V + shift_);
    return factor_ * std::sin(shifted) / std::pow(std::cos(V), inv_alpha_) *
           std::pow(std::cos(V - shifted) / W, (1.0 - a) * inv_alpha_);
}

double StableIncrementSampler::operator()(double dt_scaled, RandomStream& rng) const {
    if (null_) return 0.0;
    return params_.scale * std::pow(dt_scaled, inv_alpha_) * standard(rng) + params_.drift * dt_scaled;
}

double sample_stable_increment(const LevyMeasureModel& model, double dt_scaled, RandomStream& rng,
                               bool allow_subordinator) {
    if (!(dt_scaled > 0.0)) {
        throw UsageError(fmt::format("stable increment needs dt_scaled > 0, got {}", dt_scaled));
    }
    return StableIncrementSampler(model, allow_subordinator)(dt_scaled, rng);
}

FastProcessStepper::FastProcessStepper(const FastProcessConfig& cfg, bool allow_subordinator)
    : sampler_(cfg.model, allow_subordinator),
      decay_(std::exp(-cfg.lambda * cfg.dt)),
      dt_scaled_(cfg.lambda * cfg.dt) {}

PathSample simulate_fast_path(const FastProcessConfig& cfg, std::uint64_t path_index) {
    cfg.validate();
    const StableIncrementSampler sampler(cfg.model);
    RandomStream rng(cfg.seed, StreamKind::Jump, path_index);

    const std::size_t n = cfg.n_steps();
    PathSample path;
    path.seed = cfg.seed;
    path.times.reserve(n + 1);
    path.values.reserve(n + 1);
    path.times.push_back(0.0);
    path.values.push_back(cfg.y0);

    double y = cfg.y0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = static_cast<double>(k) * cfg.dt;
        const double t1 = (k + 1 == n) ? cfg.horizon : t0 + cfg.dt;
        const double h = t1 - t0;
        y = std::exp(-cfg.lambda * h) * y + sampler(cfg.lambda * h, rng);
        path.times.push_back(t1);
        path.values.push_back(y);
    }
    return path;
}

ControlPolicy constant_policy(double u) {
    return [u](double, double, double) { return u; };
}

SlowSystemPath simulate_slow_system(const SlowSystemConfig& cfg, std::uint64_t path_index) {
    if (cfg.problem == nullptr) throw UsageError("slow system needs a control problem");
    if (!cfg.policy) throw UsageError("slow system needs a control policy");
    if (!(cfg.x0 >= 0.0)) throw UsageError("slow system initial state must be nonnegative");
    const ControlProblemSpec& problem = *cfg.problem;
    problem.validate();
    cfg.fast.validate();

    const StableIncrementSampler sampler(cfg.fast.model);
    RandomStream jumps(cfg.fast.seed, StreamKind::Jump, path_index);
    RandomStream noise(cfg.fast.seed, StreamKind::Brownian, path_index);

    const std::size_t n = cfg.fast.n_steps();
    SlowSystemPath out;
    out.x.seed = out.y.seed = cfg.fast.seed;
    out.x.times.reserve(n + 1);
    out.x.values.reserve(n + 1);
    out.x.times.push_back(0.0);
    out.x.values.push_back(cfg.x0);
    out.y.values.reserve(n + 1);
    out.y.values.push_back(cfg.fast.y0);

    double x = cfg.x0;
    double y = cfg.fast.y0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = static_cast<double>(k) * cfg.fast.dt;
        const double t1 = (k + 1 == n) ? cfg.fast.horizon : t0 + cfg.fast.dt;
        const double h = t1 - t0;
        double u = 0.0;
        try {
            u = cfg.policy(t0, x, y);
        } catch (const std::exception& e) {
            throw NumericalError(fmt::format("control policy failed at step {}: {}", k, e.what()));
        }
        const double dW = std::sqrt(h) * noise.normal();
        x += problem.drift(x, y, u) * h + problem.volatility(x, y, u) * dW;
        x = std::max(x, 0.0);
        y = std::exp(-cfg.fast.lambda * h) * y + sampler(cfg.fast.lambda * h, jumps);
        out.x.times.push_back(t1);
        out.x.values.push_back(x);
        out.y.values.push_back(y);
    }
    out.y.times = out.x.times;
    return out;
}

}  // namespace levy_multiscale
