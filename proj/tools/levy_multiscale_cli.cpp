// SPDX-License-Identifier: MIT
// Command-line front end for the experiment harness.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "levy_multiscale/errors.hpp"
#include "levy_multiscale/harness.hpp"

namespace lm = levy_multiscale;

namespace {

struct Invocation {
    std::string config;
    std::string out;
};

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const lm::CflError& e) {
        fmt::print(stderr, "error: {} (suggested dt = {})\n", e.what(), e.suggested_dt());
        return static_cast<int>(lm::ExitCode::Usage);
    } catch (const lm::IoError& e) {
        fmt::print(stderr, "io error: {}\n", e.what());
        return static_cast<int>(lm::ExitCode::IoFailure);
    } catch (const lm::UsageError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(lm::ExitCode::Usage);
    } catch (const lm::AssumptionError& e) {
        fmt::print(stderr, "assumption violated: {}\n", e.what());
        return static_cast<int>(lm::ExitCode::AssumptionFailure);
    } catch (const lm::NumericalError& e) {
        fmt::print(stderr, "numerical failure: {} (partial = {}, error = {})\n", e.what(), e.partial_result(),
                   e.achieved_error());
        return static_cast<int>(lm::ExitCode::NumericalFailure);
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(lm::ExitCode::Usage);
    } catch (const std::domain_error& e) {
        fmt::print(stderr, "assumption violated: {}\n", e.what());
        return static_cast<int>(lm::ExitCode::AssumptionFailure);
    } catch (const std::exception& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return static_cast<int>(lm::ExitCode::NumericalFailure);
    }
}

lm::ExperimentConfig load(const Invocation& inv, std::filesystem::path& out) {
    lm::ExperimentConfig cfg = lm::load_config(inv.config);
    if (!inv.out.empty()) cfg.output_dir = inv.out;
    out = cfg.output_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale stochastic control with stable-driven fast factors"};
    app.require_subcommand(1);

    Invocation inv;
    std::function<int()> action;

    const auto add = [&](const std::string& name, const std::string& help, std::function<int()> body) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", inv.config, "Experiment configuration file")->required();
        sub->add_option("--out", inv.out, "Output directory (defaults to experiment.output_dir)");
        sub->callback([&action, body]() { action = body; });
    };

    add("invariant", "Estimate the invariant measure and write measure.csv", [&] {
        std::filesystem::path out;
        const auto cfg = load(inv, out);
        const auto mu = lm::run_invariant(cfg, out);
        fmt::print("wrote {} atoms to {}\n", mu.size(), (out / "measure.csv").string());
        return 0;
    });
    add("corrector", "Approximate the cell-problem corrector for each delta", [&] {
        std::filesystem::path out;
        const auto cfg = load(inv, out);
        lm::run_corrector(cfg, out);
        fmt::print("wrote corrector tables to {}\n", out.string());
        return 0;
    });
    add("solve-eps", "Solve the coupled PIDE for each epsilon", [&] {
        std::filesystem::path out;
        const auto cfg = load(inv, out);
        lm::run_solve_eps(cfg, out);
        fmt::print("wrote value fields to {}\n", out.string());
        return 0;
    });
    add("solve-effective", "Solve the averaged HJB equation", [&] {
        std::filesystem::path out;
        const auto cfg = load(inv, out);
        lm::run_solve_effective(cfg, out);
        fmt::print("wrote {}\n", (out / "field_effective.csv").string());
        return 0;
    });
    add("price", "Monte Carlo option prices against the effective price", [&] {
        std::filesystem::path out;
        const auto cfg = load(inv, out);
        lm::run_price(cfg, out);
        fmt::print("wrote {}\n", (out / "price.csv").string());
        return 0;
    });
    add("merton", "Merton values for each epsilon against the closed form", [&] {
        std::filesystem::path out;
        const auto cfg = load(inv, out);
        lm::run_merton(cfg, out);
        fmt::print("wrote {}\n", (out / "merton.csv").string());
        return 0;
    });
    add("converge", "Run the configured convergence experiment", [&] {
        std::filesystem::path out;
        const auto cfg = load(inv, out);
        const auto report = lm::run_experiment(cfg);
        for (const auto& row : report.rows) {
            fmt::print("epsilon {:<10g} gap {:<12.6g} std_error {:<12.6g} grid_tol {:g}\n", row.epsilon, row.gap,
                       row.std_error, row.grid_tol);
        }
        fmt::print("monotone {}  final gap {:g}\n", report.monotone_flag, report.final_gap);
        return 0;
    });
    add("check-assumptions", "Report the standing assumptions for the configured driver", [&] {
        std::filesystem::path out;
        const auto cfg = load(inv, out);
        const auto r = lm::run_check_assumptions(cfg, out);
        fmt::print("A1 {} (p = {:g}, C = {:g})\nA3 {} (q = {:g})\nA2 {} ({})\nsubordinator {}\n", r.a1_satisfied,
                   r.p_witness, r.C_witness, r.a3_satisfied, r.q_witness, r.a2_satisfied, lm::to_string(r.a2_reason),
                   r.is_subordinator);
        return r.all_satisfied() ? 0 : static_cast<int>(lm::ExitCode::AssumptionFailure);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(lm::ExitCode::Usage);
    }
    return run_guarded(action);
}
