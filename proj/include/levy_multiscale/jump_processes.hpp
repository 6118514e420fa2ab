// SPDX-License-Identifier: MIT
/**
 * @file jump_processes.hpp
 * @brief Stable increments, the Levy-driven OU fast factor and the slow
 *        controlled system, all on counter-based random substreams.
 *
 * Time stepping of the fast factor (slow-time step dt, rate lambda):
 *
 *   Y_{k+1} = e^{-lambda dt} Y_k + dZ_k,   dZ_k ~ Z(lambda dt)
 *
 * i.e. exact exponential decay with the increment of the driver over the
 * internal time lambda dt added at the end of the step.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "levy_multiscale/control_problem.hpp"
#include "levy_multiscale/levy_measures.hpp"
#include "levy_multiscale/random.hpp"

namespace levy_multiscale {

struct FastProcessConfig {
    LevyMeasureModel model;
    /// Rate of mean reversion, 1 / epsilon.
    double lambda = 1.0;
    double y0 = 0.0;
    /// Step in slow-time units.
    double dt = 0.01;
    double horizon = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] std::size_t n_steps() const;

    /// min(epsilon / 20, horizon / 2000).
    [[nodiscard]] static double default_dt(double epsilon, double horizon);
};

struct PathSample {
    std::vector<double> times;
    std::vector<double> values;
    std::uint64_t seed = 0;
};

/**
 * Chambers-Mallows-Stuck sampler for the increment Z(s) of the driver.
 *
 * With V ~ U(-pi/2, pi/2) and W ~ Exp(1) (Weron's form of the transform),
 *
 *   X = S sin(alpha (V + B)) / cos(V)^{1/alpha} * (cos(V - alpha (V + B)) / W)^{(1-alpha)/alpha}
 *   B = atan(skew tan(pi alpha / 2)) / alpha,  S = (1 + skew^2 tan^2(pi alpha / 2))^{1/(2 alpha)}
 *
 * is S_alpha(1, skew, 0); alpha = 1 (symmetric only) uses X = tan(V).
 * Z(s) = scale s^{1/alpha} X + drift s, where (scale, skew, drift) come from
 * stable_parameters(). One-sided drivers use skew = 1 and carry the
 * compensator of the 1_{|z|<=1} convention in drift = c / (alpha - 1).
 */
class StableIncrementSampler {
public:
    explicit StableIncrementSampler(const LevyMeasureModel& model, bool allow_subordinator = false);

    /// One increment over internal time dt_scaled > 0.
    double operator()(double dt_scaled, RandomStream& rng) const;

    /// One draw of S_alpha(1, skew, 0).
    double standard(RandomStream& rng) const;

    [[nodiscard]] const StableParameters& parameters() const noexcept { return params_; }

private:
    StableParameters params_;
    double inv_alpha_ = 1.0;
    double shift_ = 0.0;
    double factor_ = 1.0;
    bool null_ = false;
};

double sample_stable_increment(const LevyMeasureModel& model, double dt_scaled, RandomStream& rng,
                               bool allow_subordinator = false);

/// Stepper for the fast factor with a fixed step; increments are drawn from rng.
class FastProcessStepper {
public:
    explicit FastProcessStepper(const FastProcessConfig& cfg, bool allow_subordinator = false);

    double step(double y, RandomStream& rng) const { return decay_ * y + sampler_(dt_scaled_, rng); }
    /// Increment only (for common-random-number evaluation of several starts).
    double increment(RandomStream& rng) const { return sampler_(dt_scaled_, rng); }
    [[nodiscard]] double decay() const noexcept { return decay_; }

private:
    StableIncrementSampler sampler_;
    double decay_;
    double dt_scaled_;
};

/// One fast path on the grid k dt (the last step may be shorter to hit horizon).
[[nodiscard]] PathSample simulate_fast_path(const FastProcessConfig& cfg, std::uint64_t path_index = 0);

/// Control as a function of (t, x, y).
using ControlPolicy = std::function<double(double, double, double)>;

[[nodiscard]] ControlPolicy constant_policy(double u);

struct SlowSystemConfig {
    const ControlProblemSpec* problem = nullptr;
    FastProcessConfig fast;
    double x0 = 1.0;
    ControlPolicy policy;
};

struct SlowSystemPath {
    PathSample x;
    PathSample y;
};

/**
 * Euler-Maruyama for X with Y frozen at the left endpoint of each step; the
 * Brownian stream is independent of the jump stream. X is kept in [0, inf).
 */
[[nodiscard]] SlowSystemPath simulate_slow_system(const SlowSystemConfig& cfg,
                                                  std::uint64_t path_index = 0);

}  // namespace levy_multiscale
