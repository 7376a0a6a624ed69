#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>

#include "relaywait/contention.hpp"
#include "relaywait/model.hpp"
#include "relaywait/rng.hpp"
#include "relaywait/stopping_solver.hpp"

namespace relaywait {

/// One renewal cycle: every observation up to and including the one whose
/// winner stops, plus both hops of that winner's transmission.
struct CycleResult {
    double delivered = 0.0;  // bits/Hz
    double elapsed = 0.0;    // seconds
    std::uint64_t observations = 0;
    std::uint64_t hop2_probes = 0;

    // Itemized time; these sum to `elapsed`.
    double contention_time = 0.0;
    double give_up_time = 0.0;
    double hop1_time = 0.0;
    double hop2_time = 0.0;

    double itemized_total() const noexcept
    {
        return contention_time + give_up_time + hop1_time + hop2_time;
    }
};

/// Renewal-reward throughput estimate: sum(delivered) / sum(elapsed) with a
/// delta-method standard error.
struct ThroughputEstimate {
    double mean = 0.0;       // bits/s/Hz
    double std_error = 0.0;  // bits/s/Hz
    std::uint64_t cycles = 0;
    double total_time = 0.0;  // seconds

    friend bool operator==(const ThroughputEstimate&, const ThroughputEstimate&) = default;
};

/// Source of the random events a cycle consumes. Production code uses
/// RandomEnvironment; tests substitute scripted sequences.
template <class E>
concept CycleEnvironment = requires(E& env) {
    { env.observe() } -> std::same_as<ObservationOutcome>;
    { env.probe_hop2() } -> std::convertible_to<double>;
};

template <class URBG>
class RandomEnvironment {
public:
    RandomEnvironment(const ContentionSampler& contention, const SystemParams& params, URBG& gen)
        : contention_(contention), hop1_(params.hop1()), hop2_(params.hop2()), gen_(gen)
    {
    }

    ObservationOutcome observe() { return contention_.observe(gen_, hop1_); }
    double probe_hop2() { return hop2_.sample(gen_); }

private:
    const ContentionSampler& contention_;
    ChannelDist hop1_;
    ChannelDist hop2_;
    URBG& gen_;
};

namespace detail {

/// Contention until a winner with first-hop SNR >= threshold, charging a CTS
/// for each give-up; then the hop-1 CTS and data slot. Returns the stopping
/// winner's SNR.
template <CycleEnvironment Env>
double contend_until_stop(double threshold, const SystemParams& params, Env& env,
                          CycleResult& cycle)
{
    for (;;) {
        const ObservationOutcome obs = env.observe();
        ++cycle.observations;
        cycle.contention_time += obs.duration;
        cycle.elapsed += obs.duration;
        if (should_stop(threshold, obs.winner_snr_hop1)) {
            cycle.hop1_time += params.cts + params.coherence;
            cycle.elapsed += params.cts + params.coherence;
            return obs.winner_snr_hop1;
        }
        cycle.give_up_time += params.cts;
        cycle.elapsed += params.cts;
    }
}

}  // namespace detail

/// Simulates one cycle of the relay-waiting protocol. Each hop-2 probe costs
/// RTS + CTS; a failed probe is followed by a coherence-time wait and the
/// successful one by the coherence-time data slot, so k probes cost k * tau2.
template <CycleEnvironment Env>
CycleResult run_cycle(const StoppingPolicy& policy, const SystemParams& params, Env& env)
{
    CycleResult cycle;
    const double r_f = detail::contend_until_stop(policy.hop1_threshold, params, env, cycle);
    const double rate = rate_for_cap(std::min(r_f, policy.rate_cap_snr));

    const double probe_cost = params.rts + params.cts;
    for (;;) {
        const double r_g = env.probe_hop2();
        ++cycle.hop2_probes;
        cycle.hop2_time += probe_cost;
        cycle.elapsed += probe_cost;
        cycle.hop2_time += params.coherence;
        cycle.elapsed += params.coherence;
        if (rate_for_cap(r_g) >= rate) {
            cycle.delivered = rate * params.coherence;
            return cycle;
        }
    }
}

template <class URBG>
    requires(!CycleEnvironment<URBG>)
CycleResult run_cycle(const StoppingPolicy& policy, const SystemParams& params, URBG& gen)
{
    const ContentionSampler contention(params);
    RandomEnvironment<URBG> env(contention, params, gen);
    return run_cycle(policy, params, env);
}

/// Runs `cycles` independent cycles, cycle i drawing from Rng::stream(seed, i),
/// and reduces them in a fixed block order. The result depends only on
/// (cycles, seed), not on the thread count.
ThroughputEstimate estimate_renewal(std::uint64_t cycles, std::uint64_t seed,
                                    const std::function<CycleResult(Rng&)>& run_one,
                                    unsigned threads = 0);

ThroughputEstimate estimate_throughput(const StoppingPolicy& policy, const SystemParams& params,
                                       std::uint64_t cycles, std::uint64_t seed,
                                       unsigned threads = 0);

}  // namespace relaywait
