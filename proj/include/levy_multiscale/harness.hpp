// SPDX-License-Identifier: MIT
/**
 * @file harness.hpp
 * @brief Experiment configuration, runners and report output.
 *
 * Configuration files are sectioned key/value text:
 *
 *   [experiment]
 *   kind = pricing_convergence
 *   epsilons = 1, 0.1, 0.01
 *
 *   [levy]
 *   alpha = 1.5
 *
 * '#' starts a comment. Unknown sections or keys, malformed values and
 * violated constraints are rejected with the offending key and line.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "levy_multiscale/ergodicity.hpp"
#include "levy_multiscale/errors.hpp"
#include "levy_multiscale/finance.hpp"
#include "levy_multiscale/hjb_solvers.hpp"
#include "levy_multiscale/levy_measures.hpp"
#include "levy_multiscale/nonlocal_generator.hpp"

namespace levy_multiscale {

/// Malformed or invalid configuration text.
class ConfigError : public UsageError {
public:
    using UsageError::UsageError;
};

enum class ExperimentKind { PRICING_CONVERGENCE, MERTON_CONVERGENCE, CORRECTOR_RATE, ERGODICITY_CHECK, COUNTEREXAMPLE };

[[nodiscard]] std::string to_string(ExperimentKind kind);

struct FastSettings {
    /// Step for the eps-dependent fast factor; 0 picks min(eps / 20, T / 2000).
    double dt = 0.0;
    double y0 = 0.0;
    /// Invariant-measure estimation (rate one).
    double burn_in = 10.0;
    std::size_t n_samples = 100000;
    std::size_t n_nodes = 128;
    double sample_dt = 0.01;
};

struct ProblemSettings {
    std::string model = "pricing";
    double r = 0.05;
    std::string sigma_kind = "tanh";
    double sigma_base = 0.2;
    double sigma_amp = 0.1;
    PayoffKind payoff = PayoffKind::Call;
    double strike = 1.0;
    double c = 0.05;
    double T = 1.0;
    double x0 = 1.0;
    double alpha_drift = 0.1;
    double gamma = 0.5;
    double a = 1.0;
    double R1 = 0.0;
    double R = 3.0;
    std::size_t n_controls = 41;
};

struct BoxSettings {
    std::vector<double> t_levels{0.0, 0.25, 0.5, 0.75};
    std::vector<double> x_levels{0.5, 1.0, 2.0};
    /// Quantiles of mu giving the y window (first and last) and the y levels.
    std::vector<double> y_quantiles{0.05, 0.5, 0.95};
};

struct CorrectorSettings {
    std::vector<double> deltas{0.1, 0.05, 0.025};
    std::vector<double> y_grid{-2.0, 0.0, 2.0};
    double w = 1.0;
    double p = 1.0;
    double X = -1.0;
    std::size_t n_paths = 10000;
    double dt = 0.02;
    std::size_t mu_samples = 1000000;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::PRICING_CONVERGENCE;
    std::vector<double> epsilons{1.0, 0.1, 0.01};
    std::vector<std::uint64_t> seeds{42};
    std::filesystem::path output_dir = "out";
    LevyMeasureModel levy;
    FastSettings fast;
    ProblemSettings problem;
    SolverGrids grid;
    std::size_t n_paths = 100000;
    BoxSettings box;
    CorrectorSettings corrector;

    /// Canonical text form (all keys, defaults applied); parses back to an equal config.
    [[nodiscard]] std::string echo() const;
};

[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

[[nodiscard]] VolatilityFn make_volatility(const ProblemSettings& problem);
[[nodiscard]] PricingSpec make_pricing_spec(const ExperimentConfig& cfg);
[[nodiscard]] MertonSpec make_merton_spec(const ExperimentConfig& cfg);

struct ReportRow {
    double epsilon = 0.0;
    double gap = 0.0;
    double std_error = 0.0;
    double grid_tol = 0.0;
};

struct ConvergenceReport {
    std::vector<ReportRow> rows;
    bool monotone_flag = false;
    double final_gap = 0.0;

    /// Recomputes monotone_flag and final_gap from the rows.
    void finalize();
};

void write_report_csv(const ConvergenceReport& report, const std::filesystem::path& path);

/// Log-log gap-versus-epsilon SVG with error bars and, for two or more rows, the fitted slope.
void emit_plot(const ConvergenceReport& report, const std::filesystem::path& path);

/// Least-squares slope of log(gap) against log(epsilon).
[[nodiscard]] double fitted_slope(const ConvergenceReport& report);

/**
 * Runs the configured experiment and writes report.csv, config.echo.ini and
 * gap_vs_epsilon.svg (plus experiment-specific tables) into output_dir.
 */
ConvergenceReport run_experiment(const ExperimentConfig& cfg);

/// Invariant measure of the configured driver at rate one.
[[nodiscard]] InvariantMeasure estimate_measure(const ExperimentConfig& cfg);

// Single-purpose runners behind the command-line subcommands. Each writes
// its CSV output into `out`.
InvariantMeasure run_invariant(const ExperimentConfig& cfg, const std::filesystem::path& out);
void run_corrector(const ExperimentConfig& cfg, const std::filesystem::path& out);
void run_solve_eps(const ExperimentConfig& cfg, const std::filesystem::path& out);
void run_solve_effective(const ExperimentConfig& cfg, const std::filesystem::path& out);
void run_price(const ExperimentConfig& cfg, const std::filesystem::path& out);
void run_merton(const ExperimentConfig& cfg, const std::filesystem::path& out);
AssumptionReport run_check_assumptions(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace levy_multiscale
