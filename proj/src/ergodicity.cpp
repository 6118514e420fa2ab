// SPDX-License-Identifier: MIT
#include "levy_multiscale/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "io_util.hpp"
#include "levy_quadrature.hpp"
#include "monte_carlo.hpp"
#include "levy_multiscale/errors.hpp"
#include "levy_multiscale/random.hpp"

namespace levy_multiscale {

using detail::monte_carlo;

InvariantMeasure InvariantMeasure::two_atom(double y1, double y2) {
    InvariantMeasure mu;
    mu.provenance = MeasureProvenance::EXPLICIT_TWO_ATOM_TEST;
    mu.sample_count = 2;
    if (y1 == y2) {
        mu.nodes = {y1};
        mu.weights = {1.0};
    } else {
        mu.nodes = {std::min(y1, y2), std::max(y1, y2)};
        mu.weights = {0.5, 0.5};
    }
    return mu;
}

InvariantMeasure InvariantMeasure::from_samples(std::vector<double> samples, std::size_t n_nodes,
                                                double clip) {
    if (samples.empty()) throw UsageError("cannot build a measure from zero samples");
    if (n_nodes == 0) throw UsageError("measure needs at least one node");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    const auto at_quantile = [&](double p) {
        const auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(n - 1)));
        return samples[std::min(idx, n - 1)];
    };
    const double lo = at_quantile(clip);
    const double hi = at_quantile(1.0 - clip);
    for (double& s : samples) s = std::clamp(s, lo, hi);

    InvariantMeasure mu;
    mu.provenance = MeasureProvenance::EMPIRICAL_LONG_RUN;
    mu.sample_count = n;
    const std::size_t bins = std::min(n_nodes, n);
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t begin = b * n / bins;
        const std::size_t end = (b + 1) * n / bins;
        const double sum = std::accumulate(samples.begin() + begin, samples.begin() + end, 0.0);
        const double node = sum / static_cast<double>(end - begin);
        const double weight = static_cast<double>(end - begin) / static_cast<double>(n);
        if (!mu.nodes.empty() && node <= mu.nodes.back()) {
            mu.weights.back() += weight;  // merge ties
        } else {
            mu.nodes.push_back(node);
            mu.weights.push_back(weight);
        }
    }
    return mu;
}

void InvariantMeasure::validate() const {
    if (nodes.empty() || nodes.size() != weights.size()) {
        throw UsageError("invariant measure needs matching, nonempty node and weight vectors");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(weights[i] >= 0.0)) throw UsageError("invariant measure has a negative weight");
        if (i > 0 && !(nodes[i] > nodes[i - 1])) {
            throw UsageError("invariant measure nodes must be strictly ascending");
        }
        total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw UsageError(fmt::format("invariant measure weights sum to {}, not 1", total));
    }
}

std::complex<double> InvariantMeasure::characteristic_function(double u) const {
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * std::polar(1.0, u * nodes[i]);
    return sum;
}

double InvariantMeasure::cdf(double y) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size() && nodes[i] <= y; ++i) acc += weights[i];
    return std::min(acc, 1.0);
}

double InvariantMeasure::quantile(double p) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        acc += weights[i];
        if (acc >= p - 1e-15) return nodes[i];
    }
    return nodes.back();
}

void write_measure_csv(const InvariantMeasure& mu, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    out << "node,weight\n";
    for (std::size_t i = 0; i < mu.nodes.size(); ++i) {
        out << detail::num(mu.nodes[i]) << ',' << detail::num(mu.weights[i]) << '\n';
    }
    detail::finish_write(out, path);
}

InvariantMeasure read_measure_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    std::string line;
    if (!std::getline(in, line) || line.rfind("node,weight", 0) != 0) {
        throw UsageError(fmt::format("{}: expected header 'node,weight'", path.string()));
    }
    InvariantMeasure mu;
    mu.provenance = MeasureProvenance::IMPORTED;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        double node = 0.0;
        double weight = 0.0;
        char comma = 0;
        if (!(row >> node >> comma >> weight) || comma != ',') {
            throw UsageError(fmt::format("{}:{}: malformed row '{}'", path.string(), line_no, line));
        }
        mu.nodes.push_back(node);
        mu.weights.push_back(weight);
    }
    mu.sample_count = mu.nodes.size();
    mu.validate();
    return mu;
}

std::vector<double> sample_stationary(const FastProcessConfig& cfg, const StationarySampling& sampling) {
    cfg.validate();
    if (cfg.model.subordinator_mode) {
        throw AssumptionError("the invariant measure is only estimated for drivers satisfying A1-A3");
    }
    const double relax = 1.0 / cfg.lambda;
    if (sampling.burn_in < 5.0 * relax - 1e-12) {
        throw UsageError(fmt::format("burn-in {} is shorter than 5 / lambda = {}", sampling.burn_in, 5.0 * relax));
    }
    if (sampling.n_samples < 1000) {
        throw UsageError(fmt::format("need at least 1000 stationary samples, got {}", sampling.n_samples));
    }
    const double stride = sampling.stride > 0.0 ? sampling.stride : 2.0 * relax;
    if (stride < relax - 1e-12) {
        throw UsageError(fmt::format("sampling stride {} is shorter than 1 / lambda", stride));
    }
    const std::size_t n_chains =
        sampling.n_chains > 0 ? std::min(sampling.n_chains, sampling.n_samples)
                              : std::min<std::size_t>(sampling.n_samples, 64);
    const auto burn_steps = static_cast<std::size_t>(std::ceil(sampling.burn_in / cfg.dt - 1e-9));
    const auto stride_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(stride / cfg.dt)));

    const FastProcessStepper stepper(cfg);
    std::vector<double> out(sampling.n_samples);
    const std::size_t base = sampling.n_samples / n_chains;
    const std::size_t extra = sampling.n_samples % n_chains;
    parallel_for_blocks(n_chains, [&](std::size_t c) {
        const std::size_t begin = c * base + std::min(c, extra);
        const std::size_t count = base + (c < extra ? 1 : 0);
        RandomStream rng(cfg.seed, StreamKind::Jump, c);
        double y = cfg.y0;
        for (std::size_t k = 0; k < burn_steps; ++k) y = stepper.step(y, rng);
        for (std::size_t s = 0; s < count; ++s) {
            if (s > 0) {
                for (std::size_t k = 0; k < stride_steps; ++k) y = stepper.step(y, rng);
            }
            out[begin + s] = y;
        }
    });
    return out;
}

InvariantMeasure estimate_invariant_measure(const FastProcessConfig& cfg, const StationarySampling& sampling,
                                            std::size_t n_nodes) {
    return InvariantMeasure::from_samples(sample_stationary(cfg, sampling), n_nodes);
}

InvariantMeasure estimate_invariant_measure(const FastProcessConfig& cfg, double burn_in, std::size_t n_samples) {
    StationarySampling sampling;
    sampling.burn_in = burn_in;
    sampling.n_samples = n_samples;
    return estimate_invariant_measure(cfg, sampling);
}

std::complex<double> stationary_cf_oracle(const LevyMeasureModel& model, double u) {
    if (model.is_null() || u == 0.0) return {1.0, 0.0};
    const StableParameters p = stable_parameters(model);
    const std::complex<double> drift_part(0.0, p.drift * u);
    const std::complex<double> log_cf = (stable_exponent(model, u) - drift_part) / p.alpha + drift_part;
    return std::exp(log_cf);
}

std::complex<double> stationary_cf_by_integration(const LevyMeasureModel& model, double u) {
    if (model.is_null() || u == 0.0) return {1.0, 0.0};
    // Beyond s_max, |u| e^{-s} < 1e-9 and psi contributes below 1e-9 in total.
    const double s_max = std::log(std::abs(u) / 1e-9);
    const auto re = [&](double s) { return levy_exponent(model, u * std::exp(-s)).real(); };
    const auto im = [&](double s) { return levy_exponent(model, u * std::exp(-s)).imag(); };
    const double log_re = detail::gauss_kronrod_adaptive(re, 0.0, s_max, 1e-10, 10).value;
    const double log_im = detail::gauss_kronrod_adaptive(im, 0.0, s_max, 1e-10, 10).value;
    return std::exp(std::complex<double>(log_re, log_im));
}

McEstimate ergodic_time_average(const FastProcessConfig& cfg, const TestFunction& f, double t,
                                std::size_t n_paths) {
    cfg.validate();
    if (!(t > 0.0)) throw UsageError("ergodic average needs t > 0");
    const FastProcessStepper stepper(cfg);
    const auto n_steps = static_cast<std::size_t>(std::ceil(t / cfg.dt - 1e-9));
    const double h = t / static_cast<double>(n_steps);
    const double decay = std::exp(-cfg.lambda * h);
    const StableIncrementSampler sampler(cfg.model);
    return monte_carlo(n_paths, [&](std::size_t p) {
        RandomStream rng(cfg.seed, StreamKind::Jump, p);
        // trapezoid in time
        double y = cfg.y0;
        double acc = 0.5 * f(y);
        for (std::size_t k = 1; k <= n_steps; ++k) {
            y = decay * y + sampler(cfg.lambda * h, rng);
            acc += (k == n_steps ? 0.5 : 1.0) * f(y);
        }
        return acc / static_cast<double>(n_steps);
    });
}

McEstimate abel_average(const FastProcessConfig& cfg, const TestFunction& f, double delta,
                        std::size_t n_paths) {
    cfg.validate();
    if (!(delta > 0.0)) throw UsageError("Abel average needs delta > 0");
    const double horizon = 10.0 / delta;
    const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / cfg.dt - 1e-9));
    const double h = horizon / static_cast<double>(n_steps);
    const double decay = std::exp(-cfg.lambda * h);
    const double step_discount = std::exp(-delta * h);
    const StableIncrementSampler sampler(cfg.model);
    return monte_carlo(n_paths, [&](std::size_t p) {
        RandomStream rng(cfg.seed, StreamKind::Jump, p);
        double y = cfg.y0;
        double discount = 1.0;  // e^{-delta t_k}
        double acc = 0.0;
        double mass = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double w = discount * (1.0 - step_discount);
            acc += w * f(y);
            mass += w;
            discount *= step_discount;
            y = decay * y + sampler(cfg.lambda * h, rng);
        }
        acc += discount * f(y);
        mass += discount;
        return acc / mass;
    });
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw UsageError("KS distance needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_distance(const InvariantMeasure& a, const InvariantMeasure& b) {
    std::vector<double> points = a.nodes;
    points.insert(points.end(), b.nodes.begin(), b.nodes.end());
    std::sort(points.begin(), points.end());
    double d = 0.0;
    for (double x : points) d = std::max(d, std::abs(a.cdf(x) - b.cdf(x)));
    return d;
}

}  // namespace levy_multiscale
