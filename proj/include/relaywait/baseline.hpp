#pragma once

#include <cstdint>

#include "relaywait/model.hpp"
#include "relaywait/protocol_sim.hpp"
#include "relaywait/stopping_solver.hpp"

namespace relaywait {

/// Comparator policy: the relay probes the second hop exactly once and drops
/// the packet if the channel does not support the rate. Its rate cap and
/// first-hop threshold are optimized for that restriction.
///
/// This is a stand-in comparator, not the joint two-hop give-up scheme with
/// direct links from the earlier literature.
struct ProbeOncePolicy {
    double lambda_star = 0.0;
    double rate_cap_snr = 0.0;
    double hop1_threshold = 0.0;
    SolverDiagnostics diagnostics;
};

/// E[V1(lambda, r_n)] - lambda (cts + coherence): first-hop stop reward when
/// the relay probes once.
double probe_once_stop_reward_at(double lambda, double r_n, const SystemParams& params);

double probe_once_net_stop_reward(double lambda, double r_f, double rate_cap,
                                  const SystemParams& params);

/// Maximizer of the probe-once stop reward over r_n, by golden-section
/// search. Throws SolverError(Numerical) if a grid scan finds the reward is
/// not unimodal on the search bracket. `residual` holds the final bracket
/// width.
RateCap solve_probe_once_rate_cap(double lambda, const SystemParams& params, double tol = 1e-8);

double probe_once_optimality_gap(double lambda, const SystemParams& params,
                                 const SolverOptions& options = {});

ProbeOncePolicy solve_probe_once_policy(const SystemParams& params,
                                        const SolverOptions& options = {});
ProbeOncePolicy solve_probe_once_policy(const SystemParams& params, double tol);

/// One probe-once cycle: contention until a winner stops, hop-1 transmission,
/// one hop-2 probe. On success the probe is followed by the coherence-time
/// data slot; on failure the cycle ends with nothing delivered after RTS + CTS.
template <CycleEnvironment Env>
CycleResult run_probe_once_cycle(const ProbeOncePolicy& policy, const SystemParams& params,
                                 Env& env)
{
    CycleResult cycle;
    const double r_f = detail::contend_until_stop(policy.hop1_threshold, params, env, cycle);
    const double rate = rate_for_cap(std::min(r_f, policy.rate_cap_snr));

    const double r_g = env.probe_hop2();
    cycle.hop2_probes = 1;
    cycle.hop2_time += params.rts + params.cts;
    cycle.elapsed += params.rts + params.cts;
    if (rate_for_cap(r_g) >= rate) {
        cycle.hop2_time += params.coherence;
        cycle.elapsed += params.coherence;
        cycle.delivered = rate * params.coherence;
    }
    return cycle;
}

ThroughputEstimate estimate_probe_once_throughput(const ProbeOncePolicy& policy,
                                                  const SystemParams& params,
                                                  std::uint64_t cycles, std::uint64_t seed,
                                                  unsigned threads = 0);

}  // namespace relaywait
