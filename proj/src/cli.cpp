#include "relaywait/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "relaywait/baseline.hpp"
#include "relaywait/contention.hpp"
#include "relaywait/protocol_sim.hpp"
#include "relaywait/stopping_solver.hpp"

namespace relaywait::cli {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text, std::string_view what)
{
    text = trim(text);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw ConfigError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
    return value;
}

std::uint64_t parse_count(std::string_view text, std::string_view what)
{
    text = trim(text);
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
    return value;
}

std::string format_real(double v)
{
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

}  // namespace

std::vector<double> RunConfig::default_sweep()
{
    std::vector<double> rho;
    for (int r = 2; r <= 20; ++r) rho.push_back(r);
    return rho;
}

std::vector<double> RunConfig::single_mode_rho_g() const
{
    return sweep_given ? sweep : std::vector<double>{params.mean_snr_hop2};
}

void RunConfig::validate() const
{
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (mode == Mode::Sweep && sweep.empty()) throw ConfigError("sweep needs at least one rho_g");
    for (double r : sweep)
        if (!(r > 0.0)) throw ConfigError("rho_g values must be positive");
    if ((mode == Mode::Simulate || mode == Mode::Sweep || mode == Mode::Verify) && cycles < 1000)
        throw ConfigError("cycles must be >= 1000");
    if (tol < 0.0) throw ConfigError("tol must be positive");
}

double parse_duration(std::string_view text)
{
    text = trim(text);
    double scale = 1e-6;
    if (text.ends_with("us")) {
        text.remove_suffix(2);
    } else if (text.ends_with("ms")) {
        scale = 1e-3;
        text.remove_suffix(2);
    } else if (text.ends_with("s")) {
        scale = 1.0;
        text.remove_suffix(1);
    }
    return parse_real(text, "duration") * scale;
}

std::vector<double> parse_rho_list(std::string_view text)
{
    text = trim(text);
    std::vector<double> out;
    if (const auto colon = text.find(':'); colon != std::string_view::npos) {
        const auto lo = parse_count(text.substr(0, colon), "rho_g range");
        const auto hi = parse_count(text.substr(colon + 1), "rho_g range");
        if (lo > hi) throw ConfigError("empty rho_g range");
        for (auto r = lo; r <= hi; ++r) out.push_back(static_cast<double>(r));
        return out;
    }
    while (!text.empty()) {
        const auto comma = text.find(',');
        out.push_back(parse_real(text.substr(0, comma), "rho_g"));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    if (out.empty()) throw ConfigError("empty rho_g list");
    return out;
}

void apply_config_text(RunConfig& config, std::string_view text)
{
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));

        auto& p = config.params;
        if (key == "num_sources") {
            p.num_sources = static_cast<int>(parse_count(value, key));
        } else if (key == "tx_prob") {
            p.tx_prob = parse_real(value, key);
        } else if (key == "minislot") {
            p.minislot = parse_duration(value);
        } else if (key == "rts") {
            p.rts = parse_duration(value);
        } else if (key == "cts") {
            p.cts = parse_duration(value);
        } else if (key == "timeout") {
            p.timeout = parse_duration(value);
        } else if (key == "coherence") {
            p.coherence = parse_duration(value);
        } else if (key == "mean_snr_hop1" || key == "rho_f") {
            p.mean_snr_hop1 = parse_real(value, key);
        } else if (key == "mean_snr_hop2") {
            p.mean_snr_hop2 = parse_real(value, key);
        } else if (key == "rho_g") {
            config.sweep = parse_rho_list(value);
            config.sweep_given = true;
        } else if (key == "cycles") {
            config.cycles = parse_count(value, key);
        } else if (key == "seed") {
            config.seed = parse_count(value, key);
        } else if (key == "tol") {
            config.tol = parse_real(value, key);
        } else if (key == "out") {
            config.output_path = std::string(value);
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                              std::string(key) + "'");
        }
    }
}

void apply_config_file(RunConfig& config, const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str());
}

namespace {

SolverOptions solver_options(const RunConfig& config)
{
    SolverOptions opt;
    opt.gap_tol = config.tol;
    return opt;
}

void print_policy(std::ostream& out, const SystemParams& params, const StoppingPolicy& policy)
{
    const auto& d = policy.diagnostics;
    out << "rho_g            " << format_real(params.mean_snr_hop2) << '\n'
        << "tau1             " << format_real(mean_observation_duration(params) * 1e6) << " us\n"
        << "lambda_star      " << format_real(policy.lambda_star) << " bits/s/Hz\n"
        << "x_star           " << format_real(policy.rate_cap_snr) << '\n'
        << "r_hat_f          " << format_real(policy.hop1_threshold) << '\n'
        << "rate_cap_resid   " << format_real(d.rate_cap_residual) << '\n'
        << "gap_resid        " << format_real(d.gap_residual) << '\n'
        << "threshold_resid  " << format_real(d.threshold_residual) << '\n'
        << "bisection_iters  " << d.lambda_iterations << '\n';
}

int run_solve(const RunConfig& config, std::ostream& out)
{
    bool first = true;
    for (double rho : config.single_mode_rho_g()) {
        const SystemParams params = config.params.with_mean_snr_hop2(rho);
        if (!first) out << '\n';
        first = false;
        print_policy(out, params, solve_policy(params, solver_options(config)));
    }
    return kSuccess;
}

int run_simulate(const RunConfig& config, std::ostream& out)
{
    bool first = true;
    for (double rho : config.single_mode_rho_g()) {
        const SystemParams params = config.params.with_mean_snr_hop2(rho);
        const auto policy = solve_policy(params, solver_options(config));
        const auto est = estimate_throughput(policy, params, config.cycles, config.seed);
        if (!first) out << '\n';
        first = false;
        out << "rho_g            " << format_real(rho) << '\n'
            << "lambda_star      " << format_real(policy.lambda_star) << " bits/s/Hz\n"
            << "sim_mean         " << format_real(est.mean) << " bits/s/Hz\n"
            << "sim_stderr       " << format_real(est.std_error) << '\n'
            << "cycles           " << est.cycles << '\n'
            << "relative_error   "
            << format_real((est.mean - policy.lambda_star) / policy.lambda_star) << '\n';
    }
    return kSuccess;
}

}  // namespace

void write_sweep_csv(const RunConfig& config, std::ostream& csv)
{
    csv << "rho_g,lambda_star,x_star,r_hat_f,sim_mean,sim_stderr,"
           "baseline_lambda_star,baseline_sim_mean,baseline_sim_stderr\n";
    for (double rho : config.sweep) {
        const SystemParams params = config.params.with_mean_snr_hop2(rho);
        const auto policy = solve_policy(params, solver_options(config));
        const auto sim = estimate_throughput(policy, params, config.cycles, config.seed);
        const auto base = solve_probe_once_policy(params, solver_options(config));
        const auto base_sim =
            estimate_probe_once_throughput(base, params, config.cycles, config.seed);
        csv << format_real(rho) << ',' << format_real(policy.lambda_star) << ','
            << format_real(policy.rate_cap_snr) << ',' << format_real(policy.hop1_threshold)
            << ',' << format_real(sim.mean) << ',' << format_real(sim.std_error) << ','
            << format_real(base.lambda_star) << ',' << format_real(base_sim.mean) << ','
            << format_real(base_sim.std_error) << '\n';
    }
}

namespace {

int run_sweep(const RunConfig& config, std::ostream& out)
{
    if (config.output_path.empty()) {
        write_sweep_csv(config, out);
        return kSuccess;
    }
    std::ofstream file(config.output_path, std::ios::binary | std::ios::trunc);
    if (!file) throw ConfigError("cannot open output file '" + config.output_path + "'");
    write_sweep_csv(config, file);
    file.flush();
    if (!file) throw ConfigError("failed writing '" + config.output_path + "'");
    out << "wrote " << config.sweep.size() << " rows to " << config.output_path << '\n';
    return kSuccess;
}

class Checker {
public:
    explicit Checker(std::ostream& out) : out_(out) {}

    // Passes when achieved <= tol.
    void check(const std::string& name, double achieved, double tol)
    {
        const bool ok = achieved <= tol;
        failures_ += ok ? 0 : 1;
        out_ << (ok ? "PASS " : "FAIL ") << name << ": achieved=" << format_real(achieved)
             << " tol=" << format_real(tol) << '\n';
    }

    int failures() const { return failures_; }

private:
    std::ostream& out_;
    int failures_ = 0;
};

void verify_one(const RunConfig& config, const SystemParams& params, Checker& checker)
{
    const std::string tag = " [rho_g=" + format_real(params.mean_snr_hop2) + "]";
    const double lambdas[] = {0.05, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0};
    const double snrs[] = {0.0, 0.25, 1.0, 3.0, 5.0, 10.0, 25.0};

    double eq5 = 0.0;
    double eq7 = 0.0;
    double dichotomy_violations = 0.0;
    for (double lambda : lambdas) {
        for (double r : snrs) {
            const double vinf = expected_v_inf(lambda, r, params);
            const double v1 = expected_v1(lambda, r, params);
            const double f = params.hop2().cdf(r);
            const double anchor = lambda * params.coherence;
            eq5 = std::max(eq5, std::abs((vinf - v1) - f * (vinf - anchor)));
            for (unsigned l : {1u, 2u, 5u, 20u}) {
                const double vl = expected_v_l(lambda, r, l, params);
                eq7 = std::max(eq7, std::abs((vinf - vl) - std::pow(f, l) * (vinf - anchor)));
            }
            double best = -INFINITY;
            for (unsigned l = 1; l <= 50; ++l) best = std::max(best, expected_v_l(lambda, r, l, params));
            if (vinf >= anchor && vinf < best - 1e-15) dichotomy_violations += 1.0;
            if (vinf < anchor && v1 < best - 1e-15) dichotomy_violations += 1.0;
        }
    }
    checker.check("probe-once vs keep-probing identity" + tag, eq5, 1e-12);
    checker.check("l-probe vs keep-probing identity" + tag, eq7, 1e-12);
    checker.check("second-hop dichotomy violations" + tag, dichotomy_violations, 0.0);

    const SolverOptions opt = solver_options(config);
    const auto policy = solve_policy(params, opt);
    checker.check("rate-cap residual" + tag, std::abs(policy.diagnostics.rate_cap_residual),
                  1e-10);
    checker.check("optimality gap |G(lambda*)|" + tag,
                  std::abs(optimality_gap(policy.lambda_star, params, opt)),
                  opt.resolved_gap_tol(params));

    Rng rng = Rng::stream(config.seed, 0x7e57);
    const ChannelDist hop1 = params.hop1();
    double disagreements = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double r_f = (i % 2 == 0) ? hop1.sample(rng)
                                        : 3.0 * policy.rate_cap_snr * uniform_open_closed(rng);
        const bool by_reward =
            net_stop_reward(policy.lambda_star, r_f, policy.rate_cap_snr, params) >=
            -policy.lambda_star * params.cts;
        if (by_reward != should_stop(policy.hop1_threshold, r_f)) disagreements += 1.0;
    }
    checker.check("threshold equivalence disagreements" + tag, disagreements, 0.0);

    const ContentionSampler contention(params);
    Rng obs_rng = Rng::stream(config.seed, 0xc0de);
    const std::uint64_t n_obs = std::min<std::uint64_t>(config.cycles, 1'000'000);
    double total = 0.0;
    for (std::uint64_t i = 0; i < n_obs; ++i) total += contention.observe(obs_rng, hop1).duration;
    const double tau1 = mean_observation_duration(params);
    checker.check("observation duration relative error" + tag,
                  std::abs(total / static_cast<double>(n_obs) - tau1) / tau1, 0.005);

    const auto est = estimate_throughput(policy, params, config.cycles, config.seed);
    checker.check("renewal-reward relative error" + tag,
                  std::abs(est.mean - policy.lambda_star) / policy.lambda_star, 0.01);

    const auto base = solve_probe_once_policy(params, opt);
    checker.check("probe-once dominance excess" + tag,
                  std::max(0.0, base.lambda_star - policy.lambda_star), 0.0);
}

int run_verify(const RunConfig& config, std::ostream& out)
{
    Checker checker(out);
    for (double rho : config.single_mode_rho_g())
        verify_one(config, config.params.with_mean_snr_hop2(rho), checker);
    out << (checker.failures() == 0 ? "all checks passed\n"
                                    : std::to_string(checker.failures()) + " check(s) failed\n");
    return checker.failures() == 0 ? kSuccess : kVerificationFailure;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    try {
        config.validate();
        switch (config.mode) {
        case Mode::Solve: return run_solve(config, out);
        case Mode::Simulate: return run_simulate(config, out);
        case Mode::Sweep: return run_sweep(config, out);
        case Mode::Verify: return run_verify(config, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const std::domain_error& e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    }
    return kUsageError;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Relay-waiting opportunistic channel access: policy solver and simulator"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::string rho_list;
    std::uint64_t cycles = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::string out_path;
    auto* config_opt = app.add_option("--config", config_path, "key = value configuration file");
    auto* rho_opt = app.add_option("--rho-g", rho_list, "second-hop mean SNRs, e.g. 2,5,10 or 2:20");
    auto* cycles_opt = app.add_option("--cycles", cycles, "Monte Carlo renewal cycles");
    auto* seed_opt = app.add_option("--seed", seed, "base random seed");
    auto* tol_opt = app.add_option("--tol", tol, "|G(lambda*)| tolerance in bits/Hz");
    auto* out_opt = app.add_option("--out", out_path, "CSV output path (sweep)");

    auto* solve = app.add_subcommand("solve", "solve the optimal policy");
    auto* simulate = app.add_subcommand("simulate", "solve, then estimate throughput by simulation");
    auto* sweep = app.add_subcommand("sweep", "solve and simulate across rho_g, emit CSV");
    auto* verify = app.add_subcommand("verify", "run the invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    RunConfig config;
    if (solve->parsed()) config.mode = Mode::Solve;
    if (simulate->parsed()) config.mode = Mode::Simulate;
    if (sweep->parsed()) config.mode = Mode::Sweep;
    if (verify->parsed()) config.mode = Mode::Verify;

    try {
        if (config_opt->count() > 0) apply_config_file(config, config_path);
        if (rho_opt->count() > 0) {
            config.sweep = parse_rho_list(rho_list);
            config.sweep_given = true;
        }
        if (cycles_opt->count() > 0) config.cycles = cycles;
        if (seed_opt->count() > 0) config.seed = seed;
        if (tol_opt->count() > 0) config.tol = tol;
        if (out_opt->count() > 0) config.output_path = out_path;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return run(config, out, err);
}

}  // namespace relaywait::cli
