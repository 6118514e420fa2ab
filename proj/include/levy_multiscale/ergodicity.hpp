// SPDX-License-Identifier: MIT
/**
 * @file ergodicity.hpp
 * @brief Invariant law of the Levy-driven OU factor: long-run estimation,
 *        characteristic-function oracle, and ergodic / Abel averages.
 *
 * For Y' = -Y + dZ the stationary law has log characteristic function
 * int_0^inf psi(u e^{-s}) ds, independent of the mean-reversion rate. For
 * stable drivers this is (psi(u) - i drift u) / alpha + i drift u, which
 * reduces to psi(u) / alpha for symmetric measures.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <vector>

#include "levy_multiscale/jump_processes.hpp"
#include "levy_multiscale/levy_measures.hpp"

namespace levy_multiscale {

enum class MeasureProvenance { EMPIRICAL_LONG_RUN, EXPLICIT_TWO_ATOM_TEST, IMPORTED };

/// Quadrature representation of a probability measure on R.
struct InvariantMeasure {
    std::vector<double> nodes;    ///< strictly ascending
    std::vector<double> weights;  ///< nonnegative, sum to 1
    MeasureProvenance provenance = MeasureProvenance::EMPIRICAL_LONG_RUN;
    std::size_t sample_count = 0;

    /// Mass 1/2 at y1 and at y2.
    static InvariantMeasure two_atom(double y1, double y2);

    /**
     * Collapses raw samples onto a quantile-based node grid: samples are
     * clamped to the [clip, 1 - clip] empirical quantiles, sorted, split into
     * n_nodes equal-count bins, and each bin becomes one node at its mean.
     */
    static InvariantMeasure from_samples(std::vector<double> samples, std::size_t n_nodes = 256,
                                         double clip = 1e-3);

    void validate() const;
    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }

    template <class F>
    [[nodiscard]] double expect(F&& f) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
        return sum;
    }

    [[nodiscard]] std::complex<double> characteristic_function(double u) const;
    [[nodiscard]] double cdf(double y) const;
    /// Smallest node whose cumulative weight reaches p.
    [[nodiscard]] double quantile(double p) const;
};

void write_measure_csv(const InvariantMeasure& mu, const std::filesystem::path& path);
[[nodiscard]] InvariantMeasure read_measure_csv(const std::filesystem::path& path);

struct StationarySampling {
    double burn_in = 10.0;
    std::size_t n_samples = 100000;
    /// Independent chains; 0 picks min(n_samples, 64).
    std::size_t n_chains = 0;
    /// Slow-time spacing between retained samples of a chain; 0 picks 2 / lambda.
    double stride = 0.0;
};

/**
 * Raw draws of Y after burn-in. Chain c runs on substream c and contributes
 * a contiguous block of the output, so the result is independent of the
 * worker count. Requires burn_in >= 5 / lambda, stride >= 1 / lambda and
 * n_samples >= 1000; subordinator drivers are refused.
 */
[[nodiscard]] std::vector<double> sample_stationary(const FastProcessConfig& cfg,
                                                    const StationarySampling& sampling);

[[nodiscard]] InvariantMeasure estimate_invariant_measure(const FastProcessConfig& cfg,
                                                          const StationarySampling& sampling,
                                                          std::size_t n_nodes = 256);

[[nodiscard]] InvariantMeasure estimate_invariant_measure(const FastProcessConfig& cfg, double burn_in,
                                                          std::size_t n_samples);

/// Closed-form stationary characteristic function for stable drivers.
[[nodiscard]] std::complex<double> stationary_cf_oracle(const LevyMeasureModel& model, double u);

/// exp(int_0^inf psi(u e^{-s}) ds) with psi from levy_exponent and the
/// s-integral done by adaptive quadrature (independent of the closed form).
[[nodiscard]] std::complex<double> stationary_cf_by_integration(const LevyMeasureModel& model, double u);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

using TestFunction = std::function<double(double)>;

/// Monte Carlo estimate of (1/t) int_0^t E f(Y(s)) ds, Y(0) = cfg.y0.
[[nodiscard]] McEstimate ergodic_time_average(const FastProcessConfig& cfg, const TestFunction& f,
                                              double t, std::size_t n_paths);

/**
 * Monte Carlo estimate of delta int_0^inf E f(Y(t)) e^{-delta t} dt.
 *
 * Paths run to 10 / delta; the remaining weight e^{-10} is assigned to the
 * terminal state so that constants are reproduced exactly.
 */
[[nodiscard]] McEstimate abel_average(const FastProcessConfig& cfg, const TestFunction& f, double delta,
                                      std::size_t n_paths);

/// Two-sample Kolmogorov-Smirnov statistic.
[[nodiscard]] double ks_distance(std::vector<double> a, std::vector<double> b);

/// Kolmogorov distance between two discrete measures.
[[nodiscard]] double ks_distance(const InvariantMeasure& a, const InvariantMeasure& b);

}  // namespace levy_multiscale
