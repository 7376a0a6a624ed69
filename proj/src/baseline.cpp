#include "relaywait/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "fixed_point.hpp"
#include "relaywait/numerics.hpp"

namespace relaywait {

double probe_once_stop_reward_at(double lambda, double r_n, const SystemParams& params)
{
    return expected_v1(lambda, r_n, params) - lambda * (params.cts + params.coherence);
}

double probe_once_net_stop_reward(double lambda, double r_f, double rate_cap,
                                  const SystemParams& params)
{
    if (!(r_f >= 0.0)) throw std::domain_error("first-hop SNR must be nonnegative");
    return probe_once_stop_reward_at(lambda, std::min(r_f, rate_cap), params);
}

namespace {

constexpr int kUnimodalityGrid = 256;

// Rises then falls on the grid, up to a small absolute slack for rounding.
bool unimodal_on_grid(const auto& f, double lo, double hi)
{
    const double slack = 1e-15;
    bool falling = false;
    double prev = f(lo);
    for (int i = 1; i <= kUnimodalityGrid; ++i) {
        const double cur = f(lo + (hi - lo) * i / kUnimodalityGrid);
        if (cur < prev - slack)
            falling = true;
        else if (falling && cur > prev + slack)
            return false;
        prev = cur;
    }
    return true;
}

}  // namespace

RateCap solve_probe_once_rate_cap(double lambda, const SystemParams& params, double tol)
{
    if (!(lambda >= 0.0)) throw std::domain_error("lambda must be nonnegative");
    auto reward = [&](double r) { return probe_once_stop_reward_at(lambda, r, params); };

    double hi = 1.0;
    while (reward(hi) >= reward(0.5 * hi)) {
        hi *= 2.0;
        if (!std::isfinite(reward(hi)) || hi > 1e12)
            throw SolverError(SolverError::Kind::Numerical, "probe-once rate cap bracket diverged");
    }
    if (!unimodal_on_grid(reward, 0.0, hi))
        throw SolverError(SolverError::Kind::Numerical, "probe-once stop reward is not unimodal");

    const auto best = numerics::golden_section_max(reward, 0.0, hi, tol);
    return {best.arg, best.bracket_width, best.iterations, best.arg <= 0.0};
}

namespace {

struct ProbeOnceModel {
    const SystemParams& params;

    RateCap cap(double lambda) const { return solve_probe_once_rate_cap(lambda, params); }
    double reward(double lambda, double r) const
    {
        return probe_once_stop_reward_at(lambda, r, params);
    }
};

}  // namespace

double probe_once_optimality_gap(double lambda, const SystemParams& params,
                                 const SolverOptions& options)
{
    if (!(lambda > 0.0)) throw std::domain_error("lambda must be positive");
    params.validate();
    return detail::gap(ProbeOnceModel{params}, lambda, params, options);
}

ProbeOncePolicy solve_probe_once_policy(const SystemParams& params, const SolverOptions& options)
{
    const auto fp = detail::solve_fixed_point(ProbeOnceModel{params}, params, options);
    ProbeOncePolicy policy;
    policy.lambda_star = fp.lambda;
    policy.rate_cap_snr = fp.cap.snr;
    policy.hop1_threshold = fp.threshold;
    policy.diagnostics.rate_cap_residual = fp.cap.residual;
    policy.diagnostics.gap_residual = fp.gap_residual;
    policy.diagnostics.threshold_residual = fp.threshold_residual;
    policy.diagnostics.lambda_iterations = fp.iterations;
    policy.diagnostics.rate_cap_iterations = fp.cap.iterations;
    return policy;
}

ProbeOncePolicy solve_probe_once_policy(const SystemParams& params, double tol)
{
    SolverOptions options;
    options.gap_tol = tol;
    return solve_probe_once_policy(params, options);
}

ThroughputEstimate estimate_probe_once_throughput(const ProbeOncePolicy& policy,
                                                  const SystemParams& params,
                                                  std::uint64_t cycles, std::uint64_t seed,
                                                  unsigned threads)
{
    params.validate();
    const ContentionSampler contention(params);
    return estimate_renewal(
        cycles, seed,
        [&](Rng& rng) {
            RandomEnvironment<Rng> env(contention, params, rng);
            return run_probe_once_cycle(policy, params, env);
        },
        threads);
}

}  // namespace relaywait
