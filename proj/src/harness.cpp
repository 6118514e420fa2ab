// SPDX-License-Identifier: MIT
#include "levy_multiscale/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "io_util.hpp"
#include "levy_multiscale/errors.hpp"

namespace levy_multiscale {

namespace {

// ---------------------------------------------------------------------------
// Parsing

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

const std::vector<std::string> kSections{"experiment", "levy", "fast", "problem", "grid", "mc", "box", "corrector"};

class KeyValues {
public:
    explicit KeyValues(const std::string& text) {
        std::istringstream in(text);
        std::string raw;
        std::string section;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (body.empty()) continue;
            if (body.front() == '[') {
                if (body.back() != ']') throw ConfigError(fmt::format("line {}: malformed section header '{}'", line, body));
                section = trim(body.substr(1, body.size() - 2));
                if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
                    throw ConfigError(fmt::format("line {}: unknown section [{}]", line, section));
                }
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line, body));
            }
            if (section.empty()) throw ConfigError(fmt::format("line {}: key outside of any [section]", line));
            const std::string key = section + "." + trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            if (value.empty()) throw ConfigError(fmt::format("line {}: key '{}' has an empty value", line, key));
            if (entries_.count(key) != 0) {
                throw ConfigError(fmt::format("line {}: key '{}' repeats line {}", line, key, entries_[key].line));
            }
            entries_[key] = {value, line, false};
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError(fmt::format("{}: {}", key, message));
        throw ConfigError(fmt::format("line {}: {} = {}: {}", it->second.line, key, it->second.value, message));
    }

    const std::string* find(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second.value;
    }

    void number(const std::string& key, double& target, const std::function<bool(double)>& ok = {},
                const char* constraint = "") {
        if (const std::string* v = find(key)) target = parse_double(key, *v);
        if (ok && !ok(target)) fail(key, constraint);
    }

    void count(const std::string& key, std::size_t& target, std::size_t minimum = 0) {
        if (const std::string* v = find(key)) {
            const double d = parse_double(key, *v);
            if (d < 0.0 || d != std::floor(d) || d > 1e15) fail(key, "expected a nonnegative integer");
            target = static_cast<std::size_t>(d);
        }
        if (target < minimum) fail(key, fmt::format("must be at least {}", minimum));
    }

    void flag(const std::string& key, bool& target) {
        if (const std::string* v = find(key)) {
            if (*v == "true") {
                target = true;
            } else if (*v == "false") {
                target = false;
            } else {
                fail(key, "expected true or false");
            }
        }
    }

    void text(const std::string& key, std::string& target, const std::vector<std::string>& allowed = {}) {
        if (const std::string* v = find(key)) target = *v;
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), target) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(key, fmt::format("expected one of {}", list));
        }
    }

    void numbers(const std::string& key, std::vector<double>& target) {
        const std::string* v = find(key);
        if (v == nullptr) return;
        target.clear();
        std::istringstream in(*v);
        std::string item;
        while (std::getline(in, item, ',')) target.push_back(parse_double(key, trim(item)));
        if (target.empty()) fail(key, "expected a comma-separated list of numbers");
    }

    void check_all_used() const {
        for (const auto& [key, e] : entries_) {
            if (!e.used) throw ConfigError(fmt::format("line {}: unknown key '{}'", e.line, key));
        }
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
        bool used = false;
    };

    double parse_double(const std::string& key, const std::string& s) const {
        try {
            std::size_t pos = 0;
            const double d = std::stod(s, &pos);
            if (pos != s.size() || !std::isfinite(d)) throw std::invalid_argument(s);
            return d;
        } catch (const std::exception&) {
            fail(key, fmt::format("expected a number, got '{}'", s));
        }
    }

    std::map<std::string, Entry> entries_;
};

const std::map<std::string, ExperimentKind> kKinds{
    {"pricing_convergence", ExperimentKind::PRICING_CONVERGENCE},
    {"merton_convergence", ExperimentKind::MERTON_CONVERGENCE},
    {"corrector_rate", ExperimentKind::CORRECTOR_RATE},
    {"ergodicity_check", ExperimentKind::ERGODICITY_CHECK},
    {"counterexample", ExperimentKind::COUNTEREXAMPLE},
};

bool strictly_descending(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (double d : v) out += (out.empty() ? "" : ", ") + detail::num(d);
    return out;
}

// ---------------------------------------------------------------------------
// Shared experiment helpers

std::uint64_t measure_seed(const ExperimentConfig& cfg) { return mix64(cfg.seeds.front() + 0x1d8e4e27c47d124fULL); }

FastProcessConfig fast_for_epsilon(const ExperimentConfig& cfg, double eps, std::uint64_t seed) {
    FastProcessConfig fast;
    fast.model = cfg.levy;
    fast.lambda = 1.0 / eps;
    fast.y0 = cfg.fast.y0;
    fast.horizon = cfg.problem.T;
    fast.dt = cfg.fast.dt > 0.0 ? cfg.fast.dt : FastProcessConfig::default_dt(eps, cfg.problem.T);
    fast.seed = seed;
    return fast;
}

std::vector<double> stationary_samples(const ExperimentConfig& cfg, double dt, std::size_t n, double lambda = 1.0) {
    FastProcessConfig fast;
    fast.model = cfg.levy;
    fast.lambda = lambda;
    fast.dt = dt;
    fast.horizon = std::max(1.0, 2.0 * dt);
    fast.seed = measure_seed(cfg);
    StationarySampling sampling;
    sampling.burn_in = cfg.fast.burn_in / lambda;
    sampling.n_samples = n;
    return sample_stationary(fast, sampling);
}

McEstimate pool(const std::vector<McEstimate>& parts) {
    McEstimate out;
    double var = 0.0;
    for (const auto& p : parts) {
        out.mean += static_cast<double>(p.n) * p.mean;
        var += static_cast<double>(p.n) * static_cast<double>(p.n) * p.std_error * p.std_error;
        out.n += p.n;
    }
    const double n = static_cast<double>(out.n);
    out.mean /= n;
    out.std_error = std::sqrt(var) / n;
    return out;
}

void require_assumptions(const ExperimentConfig& cfg) {
    const AssumptionReport r = check_assumptions(cfg.levy);
    if (!r.all_satisfied()) {
        throw AssumptionError(fmt::format(
            "Levy model fails the standing assumptions: A1 {} (p = {}), A3 {} (q = {}), A2 {} ({}), subordinator {}",
            r.a1_satisfied, r.p_witness, r.a3_satisfied, r.q_witness, r.a2_satisfied, to_string(r.a2_reason),
            r.is_subordinator));
    }
}

std::string file_tag(double v) { return detail::num(v); }

CompactBox merton_box(const ExperimentConfig& cfg, const InvariantMeasure& mu) {
    CompactBox box;
    const auto& b = cfg.box;
    box.t_lo = *std::min_element(b.t_levels.begin(), b.t_levels.end());
    box.t_hi = *std::max_element(b.t_levels.begin(), b.t_levels.end());
    box.x_lo = *std::min_element(b.x_levels.begin(), b.x_levels.end());
    box.x_hi = *std::max_element(b.x_levels.begin(), b.x_levels.end());
    box.y_lo = mu.quantile(b.y_quantiles.front());
    box.y_hi = mu.quantile(b.y_quantiles.back());
    return box;
}

// ---------------------------------------------------------------------------
// Experiments

ConvergenceReport pricing_convergence(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const PricingSpec spec = make_pricing_spec(cfg);
    const std::vector<double> samples = stationary_samples(cfg, cfg.fast.sample_dt, cfg.fast.n_samples);
    const InvariantMeasure mu = InvariantMeasure::from_samples(samples, cfg.fast.n_nodes);

    // sigma~ and its standard error from the raw stationary draws.
    double m1 = 0.0;
    double m2 = 0.0;
    for (double y : samples) {
        const double s2 = spec.sigma(y) * spec.sigma(y);
        m1 += s2;
        m2 += s2 * s2;
    }
    const double n = static_cast<double>(samples.size());
    m1 /= n;
    const double se_s2 = std::sqrt(std::max(0.0, m2 / n - m1 * m1) / n);
    const double sigma_tilde = std::sqrt(m1);
    const double se_sigma = se_s2 / (2.0 * sigma_tilde);

    std::vector<double> y_levels;
    for (double q : cfg.box.y_quantiles) y_levels.push_back(mu.quantile(q));

    ConvergenceReport report;
    auto table = detail::open_for_write(out / "price_grid.csv");
    table << "epsilon,t,x,y,estimate,std_error,effective_price,gap\n";
    for (double eps : cfg.epsilons) {
        std::vector<std::vector<PriceGridPoint>> batches;
        for (std::uint64_t seed : cfg.seeds) {
            batches.push_back(price_mc_grid(spec, eps, fast_for_epsilon(cfg, eps, seed), cfg.n_paths,
                                            cfg.box.t_levels, cfg.box.x_levels, y_levels));
        }
        ReportRow row;
        row.epsilon = eps;
        row.gap = -1.0;
        for (std::size_t q = 0; q < batches.front().size(); ++q) {
            std::vector<McEstimate> parts;
            for (const auto& b : batches) parts.push_back(b[q].estimate);
            const McEstimate est = pool(parts);
            const PriceGridPoint& pt = batches.front()[q];
            const double tau = spec.horizon - pt.t;
            const double effective = bs_oracle(spec, sigma_tilde, pt.x, tau);
            const double gap = std::abs(est.mean - effective);
            const double vega = bs_vega(spec, sigma_tilde, pt.x, tau);
            const double se = std::sqrt(est.std_error * est.std_error + vega * vega * se_sigma * se_sigma);
            table << fmt::format("{},{},{},{},{},{},{},{}\n", detail::num(eps), detail::num(pt.t), detail::num(pt.x),
                                 detail::num(pt.y), detail::num(est.mean), detail::num(est.std_error),
                                 detail::num(effective), detail::num(gap));
            if (gap > row.gap) {
                row.gap = gap;
                row.std_error = se;
            }
        }
        report.rows.push_back(row);
    }
    detail::finish_write(table, out / "price_grid.csv");
    return report;
}

// Prices at (0, x0, y0) for each epsilon against the effective price.
void price_summary(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const PricingSpec spec = make_pricing_spec(cfg);
    const InvariantMeasure mu = estimate_measure(cfg);
    const double sigma_tilde = effective_vol_quadratic(spec.sigma, mu);
    const double effective = bs_oracle(spec, sigma_tilde, spec.x0, spec.horizon);
    auto summary = detail::open_for_write(out / "price.csv");
    summary << "epsilon,estimate,std_error,effective_price,gap\n";
    for (double eps : cfg.epsilons) {
        std::vector<McEstimate> parts;
        for (std::uint64_t seed : cfg.seeds) {
            parts.push_back(price_mc(spec, eps, fast_for_epsilon(cfg, eps, seed), cfg.n_paths));
        }
        const McEstimate est = pool(parts);
        summary << fmt::format("{},{},{},{},{}\n", detail::num(eps), detail::num(est.mean), detail::num(est.std_error),
                               detail::num(effective), detail::num(std::abs(est.mean - effective)));
    }
    detail::finish_write(summary, out / "price.csv");
}

ConvergenceReport merton_convergence(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const MertonSpec mspec = make_merton_spec(cfg);
    const ControlProblemSpec problem = merton_problem(mspec);
    const InvariantMeasure mu = estimate_measure(cfg);
    const CompactBox box = merton_box(cfg, mu);
    const ValueField effective = effective_solve(problem, mu, cfg.grid);

    double grid_tol = 0.0;
    for (std::size_t k = 0; k < effective.t_grid.size(); ++k) {
        for (std::size_t i = 0; i < effective.x_grid.size(); ++i) {
            const double t = effective.t_grid[k];
            const double w = effective.x_grid[i];
            if (t < box.t_lo || t > box.t_hi || w < box.x_lo || w > box.x_hi) continue;
            grid_tol = std::max(grid_tol, std::abs(effective.at(k, i) - merton_hara_closed_form(mspec, mu, t, w)));
        }
    }

    ConvergenceReport report;
    auto summary = detail::open_for_write(out / "merton.csv");
    summary << "epsilon,estimate,std_error,effective_price,gap\n";
    const double closed = merton_hara_closed_form(mspec, mu, 0.0, mspec.w0);
    for (double eps : cfg.epsilons) {
        const ValueField field = pide_solve(problem, cfg.levy, eps, cfg.grid);
        report.rows.push_back({eps, sup_norm_gap(field, effective, box), 0.0, grid_tol});
        const double v = field.interpolate(0.0, mspec.w0, cfg.fast.y0);
        summary << fmt::format("{},{},{},{},{}\n", detail::num(eps), detail::num(v), detail::num(0.0),
                               detail::num(closed), detail::num(std::abs(v - closed)));
    }
    detail::finish_write(summary, out / "merton.csv");
    return report;
}

ControlProblemSpec corrector_problem(const ExperimentConfig& cfg) {
    return cfg.problem.model == "merton" ? merton_problem(make_merton_spec(cfg)) : pricing_problem(make_pricing_spec(cfg));
}

ConvergenceReport corrector_rate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const auto& cs = cfg.corrector;
    const HamiltonianFn H = cfg.problem.model == "merton" ? merton_hamiltonian(make_merton_spec(cfg))
                                                          : hamiltonian_handle(corrector_problem(cfg));

    // Hbar from raw stationary draws of the same discrete chain the corrector uses.
    const std::vector<double> samples = stationary_samples(cfg, cs.dt, cs.mu_samples);
    double m1 = 0.0;
    double m2 = 0.0;
    for (double y : samples) {
        const double h = H(cs.w, y, cs.p, cs.X);
        m1 += h;
        m2 += h * h;
    }
    const double n = static_cast<double>(samples.size());
    const double h_bar = m1 / n;
    const double se_h_bar = std::sqrt(std::max(0.0, m2 / n - h_bar * h_bar) / n);

    // One path set per seed serves every delta.
    std::vector<std::vector<std::vector<CorrectorPoint>>> batches;
    for (std::uint64_t seed : cfg.seeds) {
        CorrectorQuery q;
        q.x_bar = cs.w;
        q.p_bar = cs.p;
        q.X_bar = cs.X;
        q.y_grid = cs.y_grid;
        q.mc_paths = cs.n_paths;
        q.seed = seed;
        q.model = cfg.levy;
        q.dt = cs.dt;
        batches.push_back(approximate_corrector(q, cs.deltas, H));
    }

    ConvergenceReport report;
    for (std::size_t d = 0; d < cs.deltas.size(); ++d) {
        const double delta = cs.deltas[d];
        const auto path = out / fmt::format("corrector_delta_{}.csv", file_tag(delta));
        auto file = detail::open_for_write(path);
        file << "y,chi_delta,delta_chi_delta,H_bar,residual\n";
        ReportRow row;
        row.epsilon = delta;
        row.gap = -1.0;
        for (std::size_t j = 0; j < cs.y_grid.size(); ++j) {
            std::vector<McEstimate> parts;
            for (const auto& b : batches) parts.push_back({b[d][j].chi, b[d][j].std_error, cs.n_paths});
            const McEstimate chi = pool(parts);
            const double residual = delta * chi.mean + h_bar;
            file << fmt::format("{},{},{},{},{}\n", detail::num(cs.y_grid[j]), detail::num(chi.mean),
                                detail::num(delta * chi.mean), detail::num(h_bar), detail::num(residual));
            if (std::abs(residual) > row.gap) {
                row.gap = std::abs(residual);
                row.std_error = std::hypot(delta * chi.std_error, se_h_bar);
            }
        }
        detail::finish_write(file, path);
        report.rows.push_back(row);
    }
    return report;
}

ConvergenceReport ergodicity_check(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const std::vector<double> u_points{0.5, 1.0, 2.0};
    const double dt = cfg.fast.sample_dt * cfg.epsilons.back();
    ConvergenceReport report;
    std::vector<double> first;
    auto table = detail::open_for_write(out / "ergodicity.csv");
    table << "epsilon,lambda,cf_gap,ks_to_first\n";
    for (double eps : cfg.epsilons) {
        const std::vector<double> samples = stationary_samples(cfg, dt, cfg.fast.n_samples, 1.0 / eps);
        double gap = 0.0;
        for (double u : u_points) {
            std::complex<double> cf{0.0, 0.0};
            for (double y : samples) cf += std::polar(1.0, u * y);
            cf /= static_cast<double>(samples.size());
            gap = std::max(gap, std::abs(cf - stationary_cf_oracle(cfg.levy, u)));
        }
        if (first.empty()) first = samples;
        const double ks = ks_distance(first, samples);
        table << fmt::format("{},{},{},{}\n", detail::num(eps), detail::num(1.0 / eps), detail::num(gap), detail::num(ks));
        report.rows.push_back({eps, gap, 1.0 / std::sqrt(static_cast<double>(samples.size())), 0.0});
    }
    detail::finish_write(table, out / "ergodicity.csv");
    return report;
}

ConvergenceReport counterexample(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    GeneratorQuadrature q(cfg.levy);
    const CounterexampleResult result = subordinator_counterexample(q);
    auto table = detail::open_for_write(out / "counterexample.csv");
    table << "y,minus_generator\n";
    for (std::size_t i = 0; i < result.y_grid.size(); ++i) {
        table << detail::num(result.y_grid[i]) << ',' << detail::num(result.minus_generator[i]) << '\n';
    }
    detail::finish_write(table, out / "counterexample.csv");
    auto meta = detail::open_for_write(out / "counterexample_meta.csv");
    meta << "key,value\n"
         << "profile,-exp(-L/(-c-y)) for y<-c; 0 otherwise\n"
         << "c," << detail::num(result.c) << '\n'
         << "L," << detail::num(result.profile_scale) << '\n'
         << "max_violation," << detail::num(result.max_violation) << '\n';
    detail::finish_write(meta, out / "counterexample_meta.csv");
    ConvergenceReport report;
    report.rows.push_back({1.0, result.max_violation, 0.0, 1e-6});
    return report;
}

// ---------------------------------------------------------------------------
// Plot

std::string svg_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ExperimentKind kind) {
    for (const auto& [name, k] : kKinds) {
        if (k == kind) return name;
    }
    return "pricing_convergence";
}

ExperimentConfig parse_config(const std::string& text) {
    KeyValues kv(text);
    ExperimentConfig cfg;

    std::string kind = to_string(cfg.kind);
    std::vector<std::string> kinds;
    for (const auto& [name, k] : kKinds) kinds.push_back(name);
    kv.text("experiment.kind", kind, kinds);
    cfg.kind = kKinds.at(kind);
    kv.numbers("experiment.epsilons", cfg.epsilons);
    for (double e : cfg.epsilons) {
        if (!(e > 0.0)) kv.fail("experiment.epsilons", "every epsilon must be positive");
    }
    if (!strictly_descending(cfg.epsilons)) kv.fail("experiment.epsilons", "epsilons must be strictly descending");
    std::vector<double> seeds;
    kv.numbers("experiment.seeds", seeds);
    if (!seeds.empty()) {
        cfg.seeds.clear();
        for (double s : seeds) {
            if (s < 0.0 || s != std::floor(s) || s > 9.007199254740992e15) {
                kv.fail("experiment.seeds", "seeds must be nonnegative integers below 2^53");
            }
            cfg.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    std::string output_dir = cfg.output_dir.string();
    kv.text("experiment.output_dir", output_dir);
    cfg.output_dir = output_dir;

    std::string family = cfg.levy.two_sided() ? "symmetric" : "one_sided";
    kv.text("levy.family", family, {"symmetric", "one_sided"});
    cfg.levy.family = parse_levy_family(family);
    kv.number("levy.alpha", cfg.levy.alpha, [](double a) { return a > 0.0 && a < 2.0; }, "must lie in (0, 2)");
    kv.number("levy.intensity", cfg.levy.intensity, [](double c) { return c >= 0.0; }, "must be nonnegative");
    kv.flag("levy.subordinator", cfg.levy.subordinator_mode);
    try {
        cfg.levy.validate();
    } catch (const UsageError& e) {
        throw ConfigError(fmt::format("[levy]: {}", e.what()));
    }

    auto& f = cfg.fast;
    kv.number("fast.dt", f.dt, [](double v) { return v >= 0.0; }, "must be nonnegative (0 selects the default)");
    kv.number("fast.y0", f.y0);
    kv.number("fast.burn_in", f.burn_in, [](double v) { return v >= 5.0; }, "must be at least 5 relaxation times");
    kv.count("fast.n_samples", f.n_samples, 1000);
    kv.count("fast.n_nodes", f.n_nodes, 1);
    kv.number("fast.sample_dt", f.sample_dt, [](double v) { return v > 0.0 && v <= 0.5; }, "must lie in (0, 0.5]");

    auto& p = cfg.problem;
    const auto positive = [](double v) { return v > 0.0; };
    kv.text("problem.model", p.model, {"pricing", "merton"});
    kv.number("problem.r", p.r);
    kv.text("problem.sigma_kind", p.sigma_kind, {"constant", "tanh"});
    kv.number("problem.sigma_base", p.sigma_base, [](double v) { return v >= 0.0; }, "must be nonnegative");
    kv.number("problem.sigma_amp", p.sigma_amp);
    std::string payoff = to_string(p.payoff);
    kv.text("problem.payoff", payoff, {"call", "put", "identity"});
    p.payoff = parse_payoff_kind(payoff);
    kv.number("problem.strike", p.strike, [](double v) { return v >= 0.0; }, "must be nonnegative");
    kv.number("problem.c", p.c, [](double v) { return v >= 0.0; }, "must be nonnegative");
    kv.number("problem.T", p.T, positive, "must be positive");
    kv.number("problem.x0", p.x0, positive, "must be positive");
    kv.number("problem.alpha_drift", p.alpha_drift);
    kv.number("problem.gamma", p.gamma, [](double v) { return v > 0.0 && v < 1.0; }, "must lie in (0, 1)");
    kv.number("problem.a", p.a, positive, "must be positive");
    kv.number("problem.R1", p.R1, [](double v) { return v <= 0.0; }, "must be nonpositive");
    kv.number("problem.R", p.R, positive, "must be positive");
    kv.count("problem.n_controls", p.n_controls, 1);
    if (p.sigma_kind == "tanh" && !(std::abs(p.sigma_amp) < p.sigma_base)) {
        kv.fail("problem.sigma_amp", "tanh volatility needs |sigma_amp| < sigma_base");
    }
    if (p.R1 < -p.R) kv.fail("problem.R1", "must satisfy -R <= R1");
    if (p.model == "merton" && !(p.alpha_drift > p.r)) kv.fail("problem.alpha_drift", "must exceed problem.r");

    auto& g = cfg.grid;
    kv.number("grid.x_min", g.x_min, positive, "must be positive");
    kv.number("grid.x_max", g.x_max, positive, "must be positive");
    kv.count("grid.n_x", g.n_x, 4);
    kv.number("grid.y_min", g.y_min);
    kv.number("grid.y_max", g.y_max);
    kv.count("grid.n_y", g.n_y, 3);
    kv.count("grid.n_t_out", g.n_t_out, 2);
    kv.number("grid.dt", g.dt, [](double v) { return v >= 0.0; }, "must be nonnegative (0 selects the CFL step)");
    kv.number("grid.cfl_safety", g.cfl_safety, [](double v) { return v > 0.0 && v <= 1.0; }, "must lie in (0, 1]");
    try {
        g.validate(true);
    } catch (const UsageError& e) {
        throw ConfigError(fmt::format("[grid]: {}", e.what()));
    }

    kv.count("mc.n_paths", cfg.n_paths, 1000);

    auto& b = cfg.box;
    kv.numbers("box.t_levels", b.t_levels);
    kv.numbers("box.x_levels", b.x_levels);
    kv.numbers("box.y_quantiles", b.y_quantiles);
    for (double t : b.t_levels) {
        if (!(t >= 0.0 && t < p.T)) kv.fail("box.t_levels", "times must lie in [0, T)");
    }
    for (double x : b.x_levels) {
        if (!(x > 0.0)) kv.fail("box.x_levels", "levels must be positive");
        if (x > g.x_max) kv.fail("box.x_levels", "levels must lie inside the solver grid");
    }
    for (double q : b.y_quantiles) {
        if (!(q > 0.0 && q < 1.0)) kv.fail("box.y_quantiles", "quantiles must lie in (0, 1)");
    }
    if (!std::is_sorted(b.y_quantiles.begin(), b.y_quantiles.end())) kv.fail("box.y_quantiles", "must be ascending");

    auto& c = cfg.corrector;
    kv.numbers("corrector.deltas", c.deltas);
    for (double d : c.deltas) {
        if (!(d > 0.0)) kv.fail("corrector.deltas", "every delta must be positive");
    }
    if (!strictly_descending(c.deltas)) kv.fail("corrector.deltas", "deltas must be strictly descending");
    kv.numbers("corrector.y_grid", c.y_grid);
    kv.number("corrector.w", c.w, positive, "must be positive");
    kv.number("corrector.p", c.p);
    kv.number("corrector.X", c.X);
    kv.count("corrector.n_paths", c.n_paths, 1000);
    kv.number("corrector.dt", c.dt, [](double v) { return v > 0.0 && v <= 0.5; }, "must lie in (0, 0.5]");
    kv.count("corrector.mu_samples", c.mu_samples, 1000);

    kv.check_all_used();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open config {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string ExperimentConfig::echo() const {
    std::string seed_list;
    for (auto s : seeds) seed_list += (seed_list.empty() ? "" : ", ") + std::to_string(s);
    std::string out;
    out += fmt::format("[experiment]\nkind = {}\nepsilons = {}\nseeds = {}\noutput_dir = {}\n\n", to_string(kind),
                       join(epsilons), seed_list, output_dir.string());
    out += fmt::format("[levy]\nfamily = {}\nalpha = {}\nintensity = {}\nsubordinator = {}\n\n",
                       levy.two_sided() ? "symmetric" : "one_sided", detail::num(levy.alpha),
                       detail::num(levy.intensity), levy.subordinator_mode ? "true" : "false");
    out += fmt::format("[fast]\ndt = {}\ny0 = {}\nburn_in = {}\nn_samples = {}\nn_nodes = {}\nsample_dt = {}\n\n",
                       detail::num(fast.dt), detail::num(fast.y0), detail::num(fast.burn_in), fast.n_samples,
                       fast.n_nodes, detail::num(fast.sample_dt));
    const auto& p = problem;
    out += fmt::format(
        "[problem]\nmodel = {}\nr = {}\nsigma_kind = {}\nsigma_base = {}\nsigma_amp = {}\npayoff = {}\nstrike = {}\n"
        "c = {}\nT = {}\nx0 = {}\nalpha_drift = {}\ngamma = {}\na = {}\nR1 = {}\nR = {}\nn_controls = {}\n\n",
        p.model, detail::num(p.r), p.sigma_kind, detail::num(p.sigma_base), detail::num(p.sigma_amp),
        to_string(p.payoff), detail::num(p.strike), detail::num(p.c), detail::num(p.T), detail::num(p.x0),
        detail::num(p.alpha_drift), detail::num(p.gamma), detail::num(p.a), detail::num(p.R1), detail::num(p.R),
        p.n_controls);
    out += fmt::format(
        "[grid]\nx_min = {}\nx_max = {}\nn_x = {}\ny_min = {}\ny_max = {}\nn_y = {}\nn_t_out = {}\ndt = {}\n"
        "cfl_safety = {}\n\n",
        detail::num(grid.x_min), detail::num(grid.x_max), grid.n_x, detail::num(grid.y_min), detail::num(grid.y_max),
        grid.n_y, grid.n_t_out, detail::num(grid.dt), detail::num(grid.cfl_safety));
    out += fmt::format("[mc]\nn_paths = {}\n\n", n_paths);
    out += fmt::format("[box]\nt_levels = {}\nx_levels = {}\ny_quantiles = {}\n\n", join(box.t_levels),
                       join(box.x_levels), join(box.y_quantiles));
    const auto& c = corrector;
    out += fmt::format(
        "[corrector]\ndeltas = {}\ny_grid = {}\nw = {}\np = {}\nX = {}\nn_paths = {}\ndt = {}\nmu_samples = {}\n",
        join(c.deltas), join(c.y_grid), detail::num(c.w), detail::num(c.p), detail::num(c.X), c.n_paths,
        detail::num(c.dt), c.mu_samples);
    return out;
}

VolatilityFn make_volatility(const ProblemSettings& p) {
    if (p.sigma_kind == "constant") return constant_volatility(p.sigma_base);
    return tanh_volatility(p.sigma_base, p.sigma_amp);
}

PricingSpec make_pricing_spec(const ExperimentConfig& cfg) {
    const auto& p = cfg.problem;
    PricingSpec s;
    s.r = p.r;
    s.sigma = make_volatility(p);
    s.payoff_kind = p.payoff;
    s.strike = p.strike;
    s.discount = p.c;
    s.horizon = p.T;
    s.x0 = p.x0;
    s.validate();
    return s;
}

MertonSpec make_merton_spec(const ExperimentConfig& cfg) {
    const auto& p = cfg.problem;
    MertonSpec s;
    s.r = p.r;
    s.alpha_drift = p.alpha_drift;
    s.sigma = make_volatility(p);
    s.R1 = p.R1;
    s.R = p.R;
    s.a = p.a;
    s.gamma = p.gamma;
    s.horizon = p.T;
    s.w0 = p.x0;
    s.n_controls = p.n_controls;
    s.validate();
    return s;
}

void ConvergenceReport::finalize() {
    monotone_flag = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].gap > rows[i - 1].gap) monotone_flag = false;
    }
    final_gap = rows.empty() ? 0.0 : rows.back().gap;
}

void write_report_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    out << "epsilon,gap,std_error,grid_tol\n";
    for (const auto& r : report.rows) {
        out << fmt::format("{},{},{},{}\n", detail::num(r.epsilon), detail::num(r.gap), detail::num(r.std_error),
                           detail::num(r.grid_tol));
    }
    detail::finish_write(out, path);
}

double fitted_slope(const ConvergenceReport& report) {
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    double n = 0.0;
    for (const auto& r : report.rows) {
        if (!(r.gap > 0.0)) continue;
        const double x = std::log(r.epsilon);
        const double y = std::log(r.gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1.0;
    }
    const double denom = n * sxx - sx * sx;
    if (n < 2.0 || denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / denom;
}

void emit_plot(const ConvergenceReport& report, const std::filesystem::path& path) {
    if (report.rows.empty()) throw UsageError("cannot plot an empty report");
    constexpr double W = 640.0;
    constexpr double Hh = 420.0;
    constexpr double left = 80.0;
    constexpr double right = 30.0;
    constexpr double top = 40.0;
    constexpr double bottom = 60.0;

    double floor_gap = std::numeric_limits<double>::infinity();
    for (const auto& r : report.rows) {
        if (r.gap > 0.0) floor_gap = std::min(floor_gap, r.gap);
    }
    if (!std::isfinite(floor_gap)) floor_gap = 1e-12;
    const auto clamp_gap = [&](double g) { return std::max(g, 0.1 * floor_gap); };

    double ex_lo = std::numeric_limits<double>::infinity();
    double ex_hi = -ex_lo;
    double gy_lo = ex_lo;
    double gy_hi = -ex_lo;
    for (const auto& r : report.rows) {
        ex_lo = std::min(ex_lo, std::log10(r.epsilon));
        ex_hi = std::max(ex_hi, std::log10(r.epsilon));
        gy_lo = std::min(gy_lo, std::log10(clamp_gap(r.gap - r.std_error)));
        gy_hi = std::max(gy_hi, std::log10(clamp_gap(r.gap + r.std_error)));
    }
    ex_lo = std::floor(ex_lo - 0.1);
    ex_hi = std::ceil(ex_hi + 0.1);
    gy_lo = std::floor(gy_lo - 0.1);
    gy_hi = std::ceil(gy_hi + 0.1);
    const auto px = [&](double eps) { return left + (std::log10(eps) - ex_lo) / (ex_hi - ex_lo) * (W - left - right); };
    const auto py = [&](double g) {
        return Hh - bottom - (std::log10(clamp_gap(g)) - gy_lo) / (gy_hi - gy_lo) * (Hh - top - bottom);
    };

    std::string svg;
    svg += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n", W, Hh);
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                       top, W - left - right, Hh - top - bottom);
    for (double e = ex_lo; e <= ex_hi + 1e-9; e += 1.0) {
        const double x = left + (e - ex_lo) / (ex_hi - ex_lo) * (W - left - right);
        svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1}\" x2=\"{0:.1f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", x, top,
                           Hh - bottom);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">1e{:.0f}</text>\n", x,
                           Hh - bottom + 18, e);
    }
    for (double g = gy_lo; g <= gy_hi + 1e-9; g += 1.0) {
        const double y = Hh - bottom - (g - gy_lo) / (gy_hi - gy_lo) * (Hh - top - bottom);
        svg += fmt::format("<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>\n", left, y,
                           W - right);
        svg += fmt::format("<text x=\"{}\" y=\"{:.1f}\" font-size=\"12\" text-anchor=\"end\">1e{:.0f}</text>\n",
                           left - 6, y + 4, g);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">epsilon</text>\n",
                       left + 0.5 * (W - left - right), Hh - 15);
    svg += fmt::format(
        "<text x=\"20\" y=\"{0}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">gap</text>\n",
        top + 0.5 * (Hh - top - bottom));

    for (const auto& r : report.rows) {
        const double x = px(r.epsilon);
        if (r.std_error > 0.0) {
            svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"#555\"/>\n",
                               x, py(r.gap - r.std_error), py(r.gap + r.std_error));
        }
        svg += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"4\" fill=\"#1f77b4\"/>\n", x, py(r.gap));
    }
    if (report.rows.size() >= 2) {
        const double slope = fitted_slope(report);
        if (std::isfinite(slope)) {
            double mx = 0.0;
            double my = 0.0;
            double n = 0.0;
            for (const auto& r : report.rows) {
                if (!(r.gap > 0.0)) continue;
                mx += std::log10(r.epsilon);
                my += std::log10(r.gap);
                n += 1.0;
            }
            mx /= n;
            my /= n;
            const double e0 = report.rows.back().epsilon;
            const double e1 = report.rows.front().epsilon;
            const auto fit = [&](double e) { return std::pow(10.0, my + slope * (std::log10(e) - mx)); };
            svg += fmt::format(
                "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#d62728\" stroke-dasharray=\"5,4\"/>\n",
                px(e0), py(fit(e0)), px(e1), py(fit(e1)));
            svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"13\" fill=\"#d62728\">{}</text>\n", left + 10,
                               top + 18, svg_escape(fmt::format("fitted slope = {:.2f}", slope)));
        }
    }
    svg += "</svg>\n";

    auto out = detail::open_for_write(path);
    out << svg;
    detail::finish_write(out, path);
}

InvariantMeasure estimate_measure(const ExperimentConfig& cfg) {
    return InvariantMeasure::from_samples(stationary_samples(cfg, cfg.fast.sample_dt, cfg.fast.n_samples),
                                          cfg.fast.n_nodes);
}

ConvergenceReport run_experiment(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::COUNTEREXAMPLE) require_assumptions(cfg);
    const std::filesystem::path& out = cfg.output_dir;
    ConvergenceReport report;
    switch (cfg.kind) {
        case ExperimentKind::PRICING_CONVERGENCE: report = pricing_convergence(cfg, out); break;
        case ExperimentKind::MERTON_CONVERGENCE: report = merton_convergence(cfg, out); break;
        case ExperimentKind::CORRECTOR_RATE: report = corrector_rate(cfg, out); break;
        case ExperimentKind::ERGODICITY_CHECK: report = ergodicity_check(cfg, out); break;
        case ExperimentKind::COUNTEREXAMPLE: report = counterexample(cfg, out); break;
    }
    report.finalize();
    write_report_csv(report, out / "report.csv");
    {
        auto echo = detail::open_for_write(out / "config.echo.ini");
        echo << cfg.echo();
        detail::finish_write(echo, out / "config.echo.ini");
    }
    emit_plot(report, out / "gap_vs_epsilon.svg");
    return report;
}

InvariantMeasure run_invariant(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    require_assumptions(cfg);
    const InvariantMeasure mu = estimate_measure(cfg);
    write_measure_csv(mu, out / "measure.csv");
    return mu;
}

void run_corrector(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    require_assumptions(cfg);
    (void)corrector_rate(cfg, out);
}

void run_solve_eps(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    require_assumptions(cfg);
    const ControlProblemSpec problem = corrector_problem(cfg);
    for (double eps : cfg.epsilons) {
        const ValueField field = pide_solve(problem, cfg.levy, eps, cfg.grid);
        write_field_csv(field, out / fmt::format("field_eps_{}.csv", file_tag(eps)));
    }
}

void run_solve_effective(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    require_assumptions(cfg);
    const ControlProblemSpec problem = corrector_problem(cfg);
    const InvariantMeasure mu = estimate_measure(cfg);
    write_field_csv(effective_solve(problem, mu, cfg.grid), out / "field_effective.csv");
}

void run_price(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    require_assumptions(cfg);
    price_summary(cfg, out);
}

void run_merton(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    require_assumptions(cfg);
    (void)merton_convergence(cfg, out);
}

AssumptionReport run_check_assumptions(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const AssumptionReport r = check_assumptions(cfg.levy);
    auto file = detail::open_for_write(out / "assumptions.csv");
    file << "key,value\n"
         << "family," << (cfg.levy.two_sided() ? "symmetric" : "one_sided") << '\n'
         << "alpha," << detail::num(cfg.levy.alpha) << '\n'
         << "p_witness," << detail::num(r.p_witness) << '\n'
         << "C_witness," << detail::num(r.C_witness) << '\n'
         << "q_witness," << detail::num(r.q_witness) << '\n'
         << "a1_satisfied," << (r.a1_satisfied ? "true" : "false") << '\n'
         << "a3_satisfied," << (r.a3_satisfied ? "true" : "false") << '\n'
         << "a2_satisfied," << (r.a2_satisfied ? "true" : "false") << '\n'
         << "a2_reason," << to_string(r.a2_reason) << '\n'
         << "is_subordinator," << (r.is_subordinator ? "true" : "false") << '\n';
    detail::finish_write(file, out / "assumptions.csv");
    return r;
}

}  // namespace levy_multiscale
