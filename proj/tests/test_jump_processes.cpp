// SPDX-License-Identifier: MIT
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "levy_multiscale/ergodicity.hpp"
#include "levy_multiscale/errors.hpp"
#include "levy_multiscale/finance.hpp"
#include "levy_multiscale/jump_processes.hpp"

using namespace levy_multiscale;

namespace {

std::complex<double> empirical_cf(const std::vector<double>& xs, double u) {
    std::complex<double> acc{0.0, 0.0};
    for (double x : xs) acc += std::polar(1.0, u * x);
    return acc / static_cast<double>(xs.size());
}

std::vector<double> increments(const LevyMeasureModel& model, double dt, std::size_t n, std::uint64_t seed) {
    const StableIncrementSampler sampler(model);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rng(seed, StreamKind::Jump, i);
        out[i] = sampler(dt, rng);
    }
    return out;
}

// Two-sample Kolmogorov-Smirnov statistic, written out independently of the library.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST(StableSampler, CharacteristicFunctionAtUnitTime) {
    const auto model = LevyMeasureModel::symmetric(1.5);
    const auto xs = increments(model, 1.0, 1000000, 11);
    const auto oracle = std::exp(levy_exponent(model, 1.0));
    EXPECT_LT(std::abs(empirical_cf(xs, 1.0) - oracle), 0.01);
}

TEST(StableSampler, OneSidedCharacteristicFunction) {
    const auto model = LevyMeasureModel::one_sided(1.5);
    const auto xs = increments(model, 0.5, 400000, 12);
    for (double u : {0.5, 1.0, 2.0}) {
        const auto oracle = std::exp(0.5 * levy_exponent(model, u));
        EXPECT_LT(std::abs(empirical_cf(xs, u) - oracle), 0.01) << "u = " << u;
    }
}

TEST(StableSampler, SymmetricMedianIsZero) {
    for (double alpha : {1.2, 1.5, 1.9}) {
        auto xs = increments(LevyMeasureModel::symmetric(alpha), 1.0, 200000, 13);
        const double n = static_cast<double>(xs.size());
        // Density at the origin from the fraction of samples in [-0.1, 0.1].
        const auto near = std::count_if(xs.begin(), xs.end(), [](double x) { return std::abs(x) < 0.1; });
        const double f0 = static_cast<double>(near) / (0.2 * n);
        std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
        const double median = xs[xs.size() / 2];
        const double se = 1.0 / (2.0 * f0 * std::sqrt(n));
        EXPECT_LT(std::abs(median), 3.0 * se) << "alpha = " << alpha;
    }
}

TEST(StableSampler, SelfSimilarScaling) {
    const auto model = LevyMeasureModel::symmetric(1.3);
    auto a = increments(model, 0.1, 20000, 14);
    auto b = increments(model, 0.2, 20000, 15);
    for (double& x : b) x /= std::pow(2.0, 1.0 / 1.3);
    // Critical value of the two-sample test at level 0.01.
    const double critical = 1.628 * std::sqrt(2.0 / 20000.0);
    EXPECT_LT(ks_statistic(a, b), critical);
}

TEST(StableSampler, NullDriverAndGuards) {
    RandomStream rng(1, StreamKind::Jump, 0);
    EXPECT_EQ(sample_stable_increment(LevyMeasureModel::null_driver(), 0.3, rng), 0.0);
    EXPECT_THROW((void)sample_stable_increment(LevyMeasureModel::symmetric(1.5), 0.0, rng), UsageError);
    EXPECT_THROW((void)sample_stable_increment(LevyMeasureModel::subordinator(0.5), 0.1, rng), UsageError);
    // Compensated small jumps make the driver a subordinator minus c t with c = int_0^1 z nu(dz) = 2.
    for (int i = 0; i < 1000; ++i) {
        EXPECT_GE(sample_stable_increment(LevyMeasureModel::subordinator(0.5), 0.1, rng, true) + 2.0 * 0.1, -1e-12);
    }
}

TEST(FastPath, NullDriverDecaysExactly) {
    FastProcessConfig cfg;
    cfg.model = LevyMeasureModel::null_driver();
    cfg.lambda = 2.0;
    cfg.y0 = 3.0;
    cfg.dt = 0.01;
    cfg.horizon = 1.0;
    const PathSample path = simulate_fast_path(cfg);
    ASSERT_EQ(path.values.size(), 101U);
    EXPECT_NEAR(path.values.back(), 3.0 * std::exp(-2.0), 1e-12);
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        EXPECT_NEAR(path.values[k], 3.0 * std::exp(-2.0 * path.times[k]), 1e-12);
    }
    cfg.y0 = 0.0;
    for (double v : simulate_fast_path(cfg).values) EXPECT_EQ(v, 0.0);
}

TEST(FastPath, DeterministicPerSeed) {
    FastProcessConfig cfg;
    cfg.model = LevyMeasureModel::symmetric(1.5);
    cfg.seed = 99;
    const auto a = simulate_fast_path(cfg, 3);
    const auto b = simulate_fast_path(cfg, 3);
    const auto c = simulate_fast_path(cfg, 4);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
}

TEST(FastPath, TerminalLawIsStationary) {
    FastProcessConfig cfg;
    cfg.model = LevyMeasureModel::symmetric(1.5);
    cfg.lambda = 1.0;
    cfg.dt = 0.01;
    cfg.horizon = 20.0;
    cfg.seed = 5;
    StationarySampling sampling;
    sampling.burn_in = 20.0;
    sampling.n_samples = 20000;
    sampling.n_chains = 20000;
    const auto ys = sample_stationary(cfg, sampling);
    const double u = 1.0;
    const auto oracle = std::exp(levy_exponent(cfg.model, u) / 1.5);
    EXPECT_LT(std::abs(empirical_cf(ys, u) - oracle), 0.02);
}

TEST(FastPath, ConfigValidation) {
    FastProcessConfig cfg;
    cfg.model = LevyMeasureModel::symmetric(1.5);
    cfg.dt = 2.0;
    cfg.horizon = 1.0;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.dt = 0.1;
    cfg.lambda = 0.0;
    EXPECT_THROW(cfg.validate(), UsageError);
    EXPECT_DOUBLE_EQ(FastProcessConfig::default_dt(0.01, 1.0), 0.0005);
    EXPECT_DOUBLE_EQ(FastProcessConfig::default_dt(1.0, 1.0), 0.0005);
    EXPECT_DOUBLE_EQ(FastProcessConfig::default_dt(0.001, 1.0), 0.00005);
}

TEST(SlowSystem, ZeroVolatilityIsDeterministic) {
    PricingSpec spec;
    spec.sigma = constant_volatility(0.0);
    const ControlProblemSpec problem = pricing_problem(spec);
    SlowSystemConfig cfg;
    cfg.problem = &problem;
    cfg.fast.model = LevyMeasureModel::symmetric(1.5);
    cfg.fast.dt = 0.001;
    cfg.fast.horizon = 1.0;
    cfg.x0 = 1.0;
    cfg.policy = constant_policy(0.0);
    const auto path = simulate_slow_system(cfg);
    EXPECT_NEAR(path.x.values.back(), std::exp(0.05), 1e-4);
}

TEST(SlowSystem, RisklessWealthGrowth) {
    MertonSpec spec;
    spec.sigma = constant_volatility(0.2);
    const ControlProblemSpec problem = merton_problem(spec);
    SlowSystemConfig cfg;
    cfg.problem = &problem;
    cfg.fast.model = LevyMeasureModel::symmetric(1.5);
    cfg.fast.dt = 0.0005;
    cfg.fast.horizon = 2.0;
    cfg.x0 = 1.0;
    cfg.policy = constant_policy(0.0);
    const auto path = simulate_slow_system(cfg);
    EXPECT_NEAR(path.x.values.back(), std::exp(0.1), 1e-4);
}

TEST(SlowSystem, DiscountedPriceIsMartingale) {
    PricingSpec spec;
    spec.sigma = tanh_volatility(0.2, 0.1);
    spec.payoff_kind = PayoffKind::Identity;
    spec.discount = spec.r;
    FastProcessConfig fast;
    fast.model = LevyMeasureModel::symmetric(1.5);
    fast.lambda = 10.0;
    fast.dt = 0.005;
    fast.horizon = 1.0;
    fast.seed = 21;
    const McEstimate est = price_mc(spec, 0.1, fast, 100000);
    EXPECT_LT(std::abs(est.mean - spec.x0), 3.0 * est.std_error);
}

TEST(SlowSystem, RequiresPolicyAndProblem) {
    SlowSystemConfig cfg;
    EXPECT_THROW((void)simulate_slow_system(cfg), UsageError);
}
