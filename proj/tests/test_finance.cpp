// SPDX-License-Identifier: MIT
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "levy_multiscale/errors.hpp"
#include "levy_multiscale/finance.hpp"

using namespace levy_multiscale;

namespace {

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Textbook Black-Scholes call with volatility v per unit time.
double textbook_call(double x, double K, double r, double v, double tau) {
    const double d1 = (std::log(x / K) + (r + 0.5 * v * v) * tau) / (v * std::sqrt(tau));
    const double d2 = d1 - v * std::sqrt(tau);
    return x * phi(d1) - K * std::exp(-r * tau) * phi(d2);
}

const VolatilityFn step_vol = [](double y) { return y < 0.0 ? 0.1 : 0.3; };

PricingSpec call_spec(double s) {
    PricingSpec spec;
    spec.sigma = constant_volatility(s);
    return spec;
}

}  // namespace

TEST(EffectiveVolatility, TwoAtomMeans) {
    const auto mu = InvariantMeasure::two_atom(-1.0, 1.0);
    EXPECT_NEAR(effective_vol_quadratic(step_vol, mu), std::sqrt(0.05), 1e-15);
    EXPECT_NEAR(effective_vol_quadratic(step_vol, mu), 0.22361, 5e-6);
    EXPECT_NEAR(effective_vol_harmonic(step_vol, mu), 0.13416, 5e-6);
}

TEST(EffectiveVolatility, ConstantAndDegenerate) {
    const auto mu = InvariantMeasure::two_atom(-2.0, 3.0);
    EXPECT_NEAR(effective_vol_quadratic(constant_volatility(0.2), mu), 0.2, 1e-15);
    EXPECT_NEAR(effective_vol_harmonic(constant_volatility(0.2), mu), 0.2, 1e-15);
    EXPECT_EQ(effective_vol_quadratic(constant_volatility(0.0), mu), 0.0);
    EXPECT_THROW((void)effective_vol_harmonic(constant_volatility(0.0), mu), AssumptionError);
}

// E sin^2 Y = (1 - Re E e^{2iY}) / 2 under the stationary law.
TEST(EffectiveVolatility, SineVolatilityAgainstCharacteristicFunction) {
    FastProcessConfig cfg;
    cfg.model = LevyMeasureModel::symmetric(1.5);
    cfg.lambda = 1.0;
    cfg.dt = 0.01;
    cfg.horizon = 1.0;
    cfg.seed = 31;
    StationarySampling s;
    s.n_samples = 100000;
    const auto mu = estimate_invariant_measure(cfg, s, 256);
    const VolatilityFn abs_sin = [](double y) { return std::abs(std::sin(y)); };
    const double oracle = 0.5 * (1.0 - stationary_cf_oracle(cfg.model, 2.0).real());
    EXPECT_NEAR(std::pow(effective_vol_quadratic(abs_sin, mu), 2), oracle, 0.01);
}

TEST(BlackScholes, MatchesTextbookWithScaledVolatility) {
    const PricingSpec spec = call_spec(0.2);
    for (double x : {0.8, 1.0, 1.3}) {
        EXPECT_NEAR(bs_oracle(spec, 0.2, x, 1.0), textbook_call(x, 1.0, 0.05, std::numbers::sqrt2 * 0.2, 1.0),
                    1e-12);
    }
}

TEST(BlackScholes, AgreesWithQuadrature) {
    // The kink of the payoff limits the Gauss-Hermite rule to about three digits.
    for (PayoffKind kind : {PayoffKind::Call, PayoffKind::Put}) {
        PricingSpec spec = call_spec(0.25);
        spec.payoff_kind = kind;
        EXPECT_NEAR(bs_oracle(spec, 0.25, 1.1, 0.7), lognormal_quadrature(spec, 0.25, 1.1, 0.7), 1e-3)
            << to_string(kind);
    }
}

TEST(BlackScholes, QuadratureExactForSmoothPayoff) {
    // E[X^2] = x^2 exp(2 (r - s^2) tau + 4 s^2 tau) for the log-normal law with variance 2 s^2 tau.
    PricingSpec spec = call_spec(0.25);
    spec.payoff_kind = PayoffKind::Custom;
    spec.custom_payoff = [](double x) { return x * x; };
    spec.discount = 0.0;
    const double s = 0.25, x = 1.1, tau = 0.7;
    const double exact = x * x * std::exp(2.0 * (0.05 - s * s) * tau + 4.0 * s * s * tau);
    EXPECT_NEAR(lognormal_quadrature(spec, s, x, tau), exact, 1e-12);
    EXPECT_NEAR(bs_oracle(spec, s, x, tau), exact, 1e-12);
}

TEST(BlackScholes, PutCallParity) {
    PricingSpec call = call_spec(0.2);
    PricingSpec put = call;
    put.payoff_kind = PayoffKind::Put;
    const double lhs = bs_oracle(call, 0.2, 1.2, 0.5) - bs_oracle(put, 0.2, 1.2, 0.5);
    EXPECT_NEAR(lhs, 1.2 - std::exp(-0.05 * 0.5), 1e-12);
}

TEST(BlackScholes, DegenerateCases) {
    const PricingSpec spec = call_spec(0.0);
    EXPECT_NEAR(bs_oracle(spec, 0.0, 1.2, 1.0), std::exp(-0.05) * (1.2 * std::exp(0.05) - 1.0), 1e-14);
    PricingSpec id = spec;
    id.payoff_kind = PayoffKind::Identity;
    id.discount = 0.0;
    EXPECT_NEAR(bs_oracle(id, 0.3, 2.0, 1.0), 2.0 * std::exp(0.05), 1e-14);
    EXPECT_THROW((void)bs_oracle(spec, -0.1, 1.0, 1.0), UsageError);
}

TEST(GaussHermite, Moments) {
    const auto rule = gauss_hermite(20);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double z = rule.nodes[k];
        m0 += rule.weights[k];
        m2 += rule.weights[k] * z * z;
        m4 += rule.weights[k] * z * z * z * z;
    }
    EXPECT_NEAR(m0, 1.0, 1e-13);
    EXPECT_NEAR(m2, 1.0, 1e-12);
    EXPECT_NEAR(m4, 3.0, 1e-11);
}

TEST(PriceGrid, ConstantVolatilityMatchesBlackScholes) {
    PricingSpec spec = call_spec(0.2);
    FastProcessConfig fast;
    fast.model = LevyMeasureModel::symmetric(1.5);
    fast.dt = 0.01;
    fast.seed = 8;
    const auto grid = price_mc_grid(spec, 0.1, fast, 50000, {0.0, 0.5}, {0.9, 1.1}, {-2.0, 2.0});
    ASSERT_EQ(grid.size(), 8U);
    for (const auto& p : grid) {
        const double exact = bs_oracle(spec, 0.2, p.x, 1.0 - p.t);
        EXPECT_LT(std::abs(p.estimate.mean - exact), 4.0 * p.estimate.std_error) << p.t << " " << p.x << " " << p.y;
    }
}

TEST(PriceGrid, OriginPointAgreesWithSinglePrice) {
    PricingSpec spec;
    spec.sigma = tanh_volatility(0.2, 0.1);
    FastProcessConfig fast;
    fast.model = LevyMeasureModel::symmetric(1.5);
    fast.dt = 0.01;
    fast.y0 = 0.5;
    fast.seed = 9;
    const auto single = price_mc(spec, 0.1, fast, 4000);
    const auto grid = price_mc_grid(spec, 0.1, fast, 4000, {0.0}, {1.0}, {0.5});
    EXPECT_NEAR(grid[0].estimate.mean, single.mean, 1e-10);
}

TEST(Merton, HbarInteriorOptimum) {
    MertonSpec spec;
    spec.sigma = constant_volatility(0.2);
    EXPECT_NEAR(merton_hbar(spec, InvariantMeasure::two_atom(0.0, 1.0)), 0.08125, 1e-15);
}

TEST(Merton, HbarSmallControlSetReducesToRate) {
    MertonSpec spec;
    spec.sigma = constant_volatility(0.2);
    spec.R = 1e-9;
    EXPECT_NEAR(merton_hbar(spec, InvariantMeasure::two_atom(0.0, 1.0)), spec.r, 1e-9);
}

TEST(Merton, HbarMixedRegimes) {
    // sigma = 0.1 saturates at u = R = 3: 0.15 - 0.045; sigma = 0.3 is interior: 0.05^2 / 0.18.
    MertonSpec spec;
    spec.sigma = step_vol;
    const double expected = 0.05 + 0.5 * (0.105 + 0.0025 / 0.18);
    EXPECT_NEAR(merton_hbar(spec, InvariantMeasure::two_atom(-1.0, 1.0)), expected, 1e-15);
}

TEST(Merton, ClosedFormValues) {
    MertonSpec spec;
    spec.sigma = constant_volatility(0.2);
    const auto mu = InvariantMeasure::two_atom(0.0, 1.0);
    EXPECT_NEAR(merton_hara_closed_form(spec, mu, 0.0, 1.0), 2.0 * std::exp(0.040625), 1e-14);
    EXPECT_NEAR(merton_hara_closed_form(spec, mu, 0.0, 1.0), 2.08290, 1e-4);
    EXPECT_NEAR(merton_hara_closed_form(spec, mu, 1.0, 4.0), 4.0, 1e-14);
    EXPECT_THROW((void)merton_hara_closed_form(spec, mu, 0.0, 0.0), UsageError);
}

TEST(Merton, SpecValidation) {
    MertonSpec spec;
    spec.sigma = constant_volatility(0.2);
    spec.alpha_drift = spec.r;
    EXPECT_THROW(spec.validate(), UsageError);
    spec.alpha_drift = 0.1;
    spec.gamma = 1.0;
    EXPECT_THROW(spec.validate(), UsageError);
    spec.gamma = 0.5;
    spec.R1 = 0.5;
    EXPECT_THROW(spec.validate(), UsageError);
}
