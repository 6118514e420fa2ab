// SPDX-License-Identifier: MIT
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "levy_multiscale/ergodicity.hpp"
#include "levy_multiscale/errors.hpp"

using namespace levy_multiscale;

namespace {

FastProcessConfig unit_rate(double dt, std::uint64_t seed) {
    FastProcessConfig cfg;
    cfg.model = LevyMeasureModel::symmetric(1.5);
    cfg.lambda = 1.0;
    cfg.dt = dt;
    cfg.horizon = 1.0;
    cfg.seed = seed;
    return cfg;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]);
        const double b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const auto bump = [](double y) { return std::exp(-y * y); };

}  // namespace

TEST(StationaryOracle, ValueAtZeroIsOne) {
    EXPECT_EQ(stationary_cf_oracle(LevyMeasureModel::symmetric(1.5), 0.0), std::complex<double>(1.0, 0.0));
}

TEST(StationaryOracle, CauchyValue) {
    EXPECT_NEAR(stationary_cf_oracle(LevyMeasureModel::symmetric(1.0), 1.0).real(), std::exp(-std::numbers::pi),
                1e-12);
}

TEST(StationaryOracle, StableHomogeneity) {
    const auto model = LevyMeasureModel::symmetric(1.5);
    for (double u : {0.3, 0.7, 1.1}) {
        const double lhs = std::abs(stationary_cf_oracle(model, 2.0 * u));
        const double rhs = std::pow(std::abs(stationary_cf_oracle(model, u)), std::pow(2.0, 1.5));
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(StationaryOracle, AgreesWithDirectIntegration) {
    for (const auto& model : {LevyMeasureModel::symmetric(1.5), LevyMeasureModel::symmetric(0.8),
                              LevyMeasureModel::one_sided(1.5), LevyMeasureModel::one_sided(1.3, 0.5)}) {
        for (double u : {-1.5, 0.5, 2.0}) {
            const auto a = stationary_cf_oracle(model, u);
            const auto b = stationary_cf_by_integration(model, u);
            EXPECT_NEAR(a.real(), b.real(), 1e-6) << "alpha " << model.alpha << " u " << u;
            EXPECT_NEAR(a.imag(), b.imag(), 1e-6) << "alpha " << model.alpha << " u " << u;
        }
    }
}

TEST(InvariantMeasureEstimate, NullDriverIsPointMass) {
    FastProcessConfig cfg = unit_rate(0.05, 1);
    cfg.model = LevyMeasureModel::null_driver();
    StationarySampling s;
    s.n_samples = 2000;
    const auto mu = estimate_invariant_measure(cfg, s, 16);
    ASSERT_EQ(mu.size(), 1U);
    EXPECT_EQ(mu.nodes[0], 0.0);
    EXPECT_DOUBLE_EQ(mu.weights[0], 1.0);
}

TEST(InvariantMeasureEstimate, CharacteristicFunctionMatchesOracle) {
    StationarySampling s;
    s.n_samples = 100000;
    const auto mu = estimate_invariant_measure(unit_rate(0.01, 2), s, 256);
    EXPECT_NO_THROW(mu.validate());
    const auto oracle = stationary_cf_oracle(LevyMeasureModel::symmetric(1.5), 1.0);
    EXPECT_LT(std::abs(mu.characteristic_function(1.0) - oracle), 0.02);
}

TEST(InvariantMeasureEstimate, IndependentOfRate) {
    StationarySampling slow;
    slow.n_samples = 20000;
    const auto a = sample_stationary(unit_rate(0.01, 3), slow);
    FastProcessConfig fast = unit_rate(0.001, 4);
    fast.lambda = 10.0;
    StationarySampling quick;
    quick.n_samples = 20000;
    quick.burn_in = 1.0;
    const auto b = sample_stationary(fast, quick);
    EXPECT_LT(ks_distance(a, b), 0.02);
}

TEST(InvariantMeasureEstimate, Preconditions) {
    FastProcessConfig sub = unit_rate(0.01, 5);
    sub.model = LevyMeasureModel::subordinator(0.5);
    EXPECT_THROW((void)sample_stationary(sub, StationarySampling{}), AssumptionError);
    StationarySampling short_burn;
    short_burn.burn_in = 1.0;
    EXPECT_THROW((void)sample_stationary(unit_rate(0.01, 5), short_burn), UsageError);
    StationarySampling few;
    few.n_samples = 10;
    EXPECT_THROW((void)sample_stationary(unit_rate(0.01, 5), few), UsageError);
}

TEST(InvariantMeasureEstimate, SeedDeterminism) {
    StationarySampling s;
    s.n_samples = 5000;
    EXPECT_EQ(sample_stationary(unit_rate(0.02, 6), s), sample_stationary(unit_rate(0.02, 6), s));
}

TEST(InvariantMeasureType, TwoAtomAndQuantiles) {
    const auto mu = InvariantMeasure::two_atom(-1.0, 2.0);
    EXPECT_EQ(mu.provenance, MeasureProvenance::EXPLICIT_TWO_ATOM_TEST);
    EXPECT_DOUBLE_EQ(mu.expect([](double y) { return y; }), 0.5);
    EXPECT_DOUBLE_EQ(mu.cdf(0.0), 0.5);
    EXPECT_DOUBLE_EQ(mu.cdf(2.0), 1.0);
    EXPECT_DOUBLE_EQ(mu.quantile(0.25), -1.0);
    EXPECT_DOUBLE_EQ(mu.quantile(0.75), 2.0);
}

TEST(InvariantMeasureType, CsvRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "lm_measure_roundtrip.csv";
    std::vector<double> samples;
    for (int i = 0; i < 1000; ++i) samples.push_back(std::sin(0.37 * i) * 3.0);
    const auto mu = InvariantMeasure::from_samples(samples, 32);
    write_measure_csv(mu, path);
    const auto back = read_measure_csv(path);
    EXPECT_EQ(back.nodes, mu.nodes);
    EXPECT_EQ(back.weights, mu.weights);
    std::filesystem::remove(path);
}

TEST(InvariantMeasureType, RejectsBadWeights) {
    InvariantMeasure mu;
    mu.nodes = {0.0, 1.0};
    mu.weights = {0.3, 0.3};
    EXPECT_THROW(mu.validate(), UsageError);
    mu.weights = {0.5, 0.5};
    mu.nodes = {1.0, 0.0};
    EXPECT_THROW(mu.validate(), UsageError);
}

TEST(ErgodicAverage, ConstantIsExact) {
    const auto est = ergodic_time_average(unit_rate(0.05, 7), [](double) { return 1.0; }, 5.0, 1000);
    EXPECT_DOUBLE_EQ(est.mean, 1.0);
}

TEST(ErgodicAverage, PositiveHalfLineHasMassOneHalf) {
    FastProcessConfig cfg = unit_rate(0.05, 8);
    const auto est = ergodic_time_average(cfg, [](double y) { return y > 0.0 ? 1.0 : 0.0; }, 20.0, 4000);
    EXPECT_LT(std::abs(est.mean - 0.5), 3.0 * est.std_error + 1e-3);
}

TEST(ErgodicAverage, ErrorDecreasesWithTime) {
    const FastProcessConfig cfg = unit_rate(0.02, 9);
    StationarySampling s;
    s.n_samples = 200000;
    const auto ys = sample_stationary(cfg, s);
    double target = 0.0;
    for (double y : ys) target += bump(y);
    target /= static_cast<double>(ys.size());
    double previous = std::numeric_limits<double>::infinity();
    for (double t : {5.0, 10.0, 20.0}) {
        const double err = std::abs(ergodic_time_average(cfg, bump, t, 4000).mean - target);
        EXPECT_LT(err, previous) << "t = " << t;
        previous = err;
    }
}

TEST(AbelAverage, ConstantIsExact) {
    EXPECT_NEAR(abel_average(unit_rate(0.05, 10), [](double) { return 2.5; }, 0.5, 1000).mean, 2.5, 1e-14);
}

TEST(AbelAverage, LinearRateInDelta) {
    const FastProcessConfig cfg = unit_rate(0.02, 11);
    StationarySampling s;
    s.n_samples = 400000;
    const auto ys = sample_stationary(cfg, s);
    double target = 0.0;
    for (double y : ys) target += bump(y);
    target /= static_cast<double>(ys.size());
    const std::vector<double> deltas{0.2, 0.1, 0.05};
    std::vector<double> errors;
    for (double d : deltas) errors.push_back(std::abs(abel_average(cfg, bump, d, 4000).mean - target));
    const double slope = log_log_slope(deltas, errors);
    EXPECT_GE(slope, 0.6);
    EXPECT_LE(slope, 1.4);
}

TEST(AbelAverage, ErrorEnvelopeInStartingPoint) {
    FastProcessConfig cfg = unit_rate(0.02, 12);
    StationarySampling s;
    s.n_samples = 200000;
    const auto ys = sample_stationary(cfg, s);
    double target = 0.0;
    for (double y : ys) target += bump(y);
    target /= static_cast<double>(ys.size());
    double e0 = 0.0;
    for (double y0 : {0.0, 2.0, 5.0}) {
        cfg.y0 = y0;
        const double err = std::abs(abel_average(cfg, bump, 0.1, 4000).mean - target);
        if (y0 == 0.0) e0 = err;
        EXPECT_LE(err, 3.0 * e0 * (1.0 + std::abs(y0))) << "y0 = " << y0;
    }
}

TEST(KsDistance, HandComputed) {
    EXPECT_DOUBLE_EQ(ks_distance(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5, 1.5}), 0.5);
    EXPECT_DOUBLE_EQ(ks_distance(InvariantMeasure::two_atom(0.0, 1.0), InvariantMeasure::two_atom(0.0, 1.0)), 0.0);
}
