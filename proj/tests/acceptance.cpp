// SPDX-License-Identifier: MIT
//
// End-to-end acceptance checks. Prints one line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "levy_multiscale/harness.hpp"

using namespace levy_multiscale;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path work_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "levy_multiscale_acceptance" / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

FastProcessConfig unit_rate_driver(double dt, std::uint64_t seed) {
    FastProcessConfig cfg;
    cfg.model = LevyMeasureModel::symmetric(1.5);
    cfg.lambda = 1.0;
    cfg.dt = dt;
    cfg.horizon = 1.0;
    cfg.seed = seed;
    return cfg;
}

InvariantMeasure reference_measure() {
    StationarySampling s;
    s.n_samples = 100000;
    return estimate_invariant_measure(unit_rate_driver(0.01, 5), s, 64);
}

// Stationary characteristic function from independent chains.
Outcome stationary_law() {
    const auto start = Clock::now();
    const FastProcessConfig cfg = unit_rate_driver(0.01, 1);
    StationarySampling s;
    s.burn_in = 10.0;
    s.n_samples = 100000;
    s.n_chains = 100000;
    const std::vector<double> ys = sample_stationary(cfg, s);
    double worst = 0.0;
    std::string gaps;
    for (double u : {0.5, 1.0, 2.0}) {
        std::complex<double> acc{0.0, 0.0};
        for (double y : ys) acc += std::polar(1.0, u * y);
        acc /= static_cast<double>(ys.size());
        const double gap = std::abs(acc - stationary_cf_oracle(cfg.model, u));
        worst = std::max(worst, gap);
        gaps += fmt::format("{}{:.4f}", gaps.empty() ? "" : ", ", gap);
    }
    const double elapsed = seconds_since(start);
    return {worst < 0.02 && elapsed < 60.0,
            fmt::format("cf gaps at u = 0.5, 1, 2: {} (limit 0.02), {:.1f} s (limit 60 s)", gaps, elapsed)};
}

Outcome rate_independence() {
    StationarySampling s;
    s.n_samples = 100000;
    const auto slow = sample_stationary(unit_rate_driver(0.002, 2), s);
    FastProcessConfig fast = unit_rate_driver(0.002, 3);
    fast.lambda = 10.0;
    s.burn_in = 1.0;
    const auto quick = sample_stationary(fast, s);
    const double ks = ks_distance(slow, quick);
    return {ks < 0.02, fmt::format("KS distance lambda = 1 vs 10: {:.4f} (limit 0.02)", ks)};
}

Outcome corrector_rate() {
    const auto start = Clock::now();
    ExperimentConfig cfg = parse_config("[experiment]\nkind = corrector_rate\n[problem]\nmodel = merton\n");
    cfg.output_dir = work_dir("corrector");
    const ConvergenceReport report = run_experiment(cfg);
    const double slope = fitted_slope(report);
    const double elapsed = seconds_since(start);
    std::string residuals;
    for (const auto& r : report.rows) residuals += fmt::format("{}{:.3e}", residuals.empty() ? "" : ", ", r.gap);
    const bool pass = report.monotone_flag && slope >= 0.6 && slope <= 1.4 && elapsed < 300.0;
    return {pass, fmt::format("residuals {} at delta = 0.1, 0.05, 0.025; slope {:.2f}; monotone {}; {:.0f} s",
                              residuals, slope, report.monotone_flag, elapsed)};
}

Outcome merton_closed_form() {
    const InvariantMeasure mu = reference_measure();
    MertonSpec spec;
    spec.sigma = tanh_volatility(0.22, 0.08);
    SolverGrids grids;
    grids.x_min = 1e-3;
    grids.x_max = 40.0;
    grids.n_x = 265;
    const ValueField field = effective_solve(merton_problem(spec), mu, grids);
    double worst = 0.0;
    for (std::size_t k = 0; k < field.t_grid.size(); ++k) {
        for (std::size_t i = 0; i < field.x_grid.size(); ++i) {
            const double w = field.x_grid[i];
            if (w < 0.5 || w > 2.0) continue;
            const double exact = merton_hara_closed_form(spec, mu, field.t_grid[k], w);
            worst = std::max(worst, std::abs(field.at(k, i) - exact) / exact);
        }
    }
    MertonSpec flat = spec;
    flat.sigma = constant_volatility(0.2);
    const double reference = merton_hara_closed_form(flat, mu, 0.0, 1.0);
    const bool pass = worst < 1e-3 && std::abs(reference - 2.08290) < 1e-4 * 2.08290;
    return {pass, fmt::format("max relative error {:.2e} on w in [0.5, 2] (limit 1e-3); closed form at "
                              "T - t = 1, w = 1 with sigma = 0.2: {:.6f}",
                              worst, reference)};
}

Outcome pricing_trend() {
    const auto start = Clock::now();
    ExperimentConfig cfg = parse_config("[experiment]\nkind = pricing_convergence\n");
    cfg.output_dir = work_dir("pricing");
    const ConvergenceReport report = run_experiment(cfg);
    const double elapsed = seconds_since(start);
    const ReportRow& last = report.rows.back();
    std::string gaps;
    for (const auto& r : report.rows) gaps += fmt::format("{}{:.4f}", gaps.empty() ? "" : ", ", r.gap);
    const bool pass = report.monotone_flag && last.gap <= 3.0 * last.std_error && elapsed < 600.0;
    return {pass, fmt::format("gaps {} (monotone {}); final gap {:.5f} vs 3 SE = {:.5f}; {:.0f} s", gaps,
                              report.monotone_flag, last.gap, 3.0 * last.std_error, elapsed)};
}

Outcome volatility_means() {
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t violations = 0;
    double tightest = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 200; ++trial) {
        const double base = 0.05 + 0.45 * unit(gen);
        const double amp = (2.0 * unit(gen) - 1.0) * 0.99 * base;
        const double slope = 0.2 + 3.0 * unit(gen);
        const double shift = 4.0 * unit(gen) - 2.0;
        const VolatilityFn sigma = [=](double y) { return base + amp * std::tanh(slope * y + shift); };
        const std::size_t n = 2 + static_cast<std::size_t>(unit(gen) * 30.0);
        InvariantMeasure mu;
        double total = 0.0;
        double y = -6.0 * unit(gen);
        for (std::size_t k = 0; k < n; ++k) {
            y += 0.01 + unit(gen);
            mu.nodes.push_back(y);
            mu.weights.push_back(0.01 + unit(gen));
            total += mu.weights.back();
        }
        for (double& w : mu.weights) w /= total;
        const double harmonic = effective_vol_harmonic(sigma, mu);
        const double quadratic = effective_vol_quadratic(sigma, mu);
        // Nearly constant sigma on the atoms makes the two means agree to rounding.
        if (harmonic > quadratic * (1.0 + 1e-12)) ++violations;
        tightest = std::min(tightest, quadratic - harmonic);
    }
    double worst_equal = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double s = 0.05 + 0.45 * unit(gen);
        const InvariantMeasure mu = InvariantMeasure::two_atom(-unit(gen), unit(gen) + 0.1);
        worst_equal = std::max(worst_equal, std::abs(effective_vol_harmonic(constant_volatility(s), mu) -
                                                     effective_vol_quadratic(constant_volatility(s), mu)));
    }
    return {violations == 0 && worst_equal <= 1e-12,
            fmt::format("{} of 200 pairs violate harmonic <= quadratic beyond 1e-12 relative (smallest margin {:.2e}); constant sigma "
                        "difference {:.1e} (limit 1e-12)",
                        violations, tightest, worst_equal)};
}

Outcome subordinator() {
    const auto result = subordinator_counterexample(GeneratorQuadrature(LevyMeasureModel::subordinator(0.5)));
    return {result.max_violation <= 1e-6 && result.y_grid.size() == 401,
            fmt::format("max of -I[y, f] over 401 points in [-10, 10]: {:.3e} (limit 1e-6), c = {}",
                        result.max_violation, result.c)};
}

Outcome lyapunov() {
    const auto check = lyapunov_drift_check(GeneratorQuadrature(LevyMeasureModel::symmetric(1.5)), 1.0, 5.0,
                                            {-20.0, -10.0, -5.0, 5.0, 10.0, 20.0});
    return {check.pass && check.a_witness > 0.0, fmt::format("a_witness = {:.4f}", check.a_witness)};
}

Outcome quadratic_growth() {
    MertonSpec spec;
    spec.sigma = tanh_volatility(0.2, 0.1);
    const ControlProblemSpec problem = merton_problem(spec);
    // A priori bound: E(1 + W^2) grows at most at the largest rate of the
    // generator on w^2 over the control set, 2 (r + (alpha - r) R) + 2 R^2 max sigma^2.
    const double sigma_max = 0.3;
    const double rate = 2.0 * (spec.r + (spec.alpha_drift - spec.r) * spec.R) + 2.0 * spec.R * spec.R * sigma_max * sigma_max;
    const double bound = problem.growth_constant * std::exp(rate * spec.horizon);
    std::vector<double> constants;
    std::string text;
    for (double eps : {1.0, 0.1, 0.01}) {
        const ValueField field = pide_solve(problem, LevyMeasureModel::symmetric(1.5), eps, SolverGrids{});
        double c = 0.0;
        for (std::size_t k = 0; k < field.t_grid.size(); ++k) {
            for (std::size_t i = 0; i < field.x_grid.size(); ++i) {
                const double x = field.x_grid[i];
                for (std::size_t j = 0; j < field.ny(); ++j) c = std::max(c, std::abs(field.at(k, i, j)) / (1.0 + x * x));
            }
        }
        constants.push_back(c);
        text += fmt::format("{}{:.4f}", text.empty() ? "" : ", ", c);
    }
    const double largest = *std::max_element(constants.begin(), constants.end());
    const double smallest = *std::min_element(constants.begin(), constants.end());
    const bool pass = largest <= bound && largest <= 1.1 * smallest;
    return {pass, fmt::format("max |V|/(1 + x^2) at eps = 1, 0.1, 0.01: {} (a priori C_T = {:.2f})", text, bound)};
}

bool same_csv_outputs(const fs::path& a, const fs::path& b, std::size_t& compared) {
    bool same = true;
    for (const auto& entry : fs::directory_iterator(a)) {
        if (entry.path().extension() != ".csv") continue;
        ++compared;
        if (slurp(entry.path()) != slurp(b / entry.path().filename())) same = false;
    }
    return same;
}

Outcome determinism() {
    const std::vector<std::string> configs{
        "[experiment]\nkind = ergodicity_check\nepsilons = 1, 0.1\nseeds = 11\n[fast]\nn_samples = 20000\n",
        "[experiment]\nkind = merton_convergence\nepsilons = 1, 0.1\n[problem]\nmodel = merton\n"
        "[fast]\nn_samples = 20000\n[grid]\nn_x = 60\nn_y = 33\n",
        "[experiment]\nkind = counterexample\n[levy]\nfamily = one_sided\nalpha = 0.5\nsubordinator = true\n"};
    std::size_t compared = 0;
    bool same = true;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        ExperimentConfig first = parse_config(configs[i]);
        ExperimentConfig second = first;
        first.output_dir = work_dir(fmt::format("repeat_{}_a", i));
        second.output_dir = work_dir(fmt::format("repeat_{}_b", i));
        (void)run_experiment(first);
        (void)run_experiment(second);
        same = same_csv_outputs(first.output_dir, second.output_dir, compared) && same;
    }
    return {same && compared > 0, fmt::format("{} CSV files from 3 experiments compared byte for byte", compared)};
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria{stationary_law,   rate_independence, corrector_rate,
                                                         merton_closed_form, pricing_trend,   volatility_means,
                                                         subordinator,     lyapunov,          quadratic_growth,
                                                         determinism};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i]();
        } catch (const std::exception& e) {
            outcome = {false, fmt::format("threw: {}", e.what())};
        }
        if (!outcome.pass) ++failures;
        fmt::print("criterion {}: {} ({})\n", i + 1, outcome.pass ? "PASS" : "FAIL", outcome.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
