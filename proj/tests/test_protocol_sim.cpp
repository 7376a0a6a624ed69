#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "relaywait/protocol_sim.hpp"
#include "scripted_env.hpp"

using namespace relaywait;

namespace {

const StoppingPolicy& reference_policy()
{
    static const StoppingPolicy policy = solve_policy(SystemParams{});
    return policy;
}

}  // namespace

TEST_CASE("single-observation trace")
{
    const SystemParams p;
    const auto& policy = reference_policy();
    const auto obs = scripted_observation(p, 1e6, 3, 2);
    ScriptedEnvironment env({obs}, {1e6});

    const auto cycle = run_cycle(policy, p, env);
    CHECK(cycle.observations == 1);
    CHECK(cycle.hop2_probes == 1);
    CHECK(cycle.delivered == std::log2(1.0 + policy.rate_cap_snr) * p.coherence);
    const double expected = obs.duration + p.cts + p.coherence + (p.rts + p.cts) + p.coherence;
    CHECK(cycle.elapsed == doctest::Approx(expected).epsilon(1e-14));
    CHECK(cycle.give_up_time == 0.0);
}

TEST_CASE("give-up then stop trace")
{
    const SystemParams p;
    const auto& policy = reference_policy();
    const double low = 0.5 * policy.hop1_threshold;
    const double high = 0.5 * (policy.hop1_threshold + policy.rate_cap_snr);
    const auto first = scripted_observation(p, low, 1, 0);
    const auto second = scripted_observation(p, high, 0, 1);
    ScriptedEnvironment env({first, second}, {1e6});

    const auto cycle = run_cycle(policy, p, env);
    CHECK(cycle.observations == 2);
    CHECK(cycle.give_up_time == doctest::Approx(p.cts));
    CHECK(cycle.delivered == std::log2(1.0 + high) * p.coherence);
    const double expected = first.duration + p.cts + second.duration + p.cts + p.coherence +
                            (p.rts + p.cts) + p.coherence;
    CHECK(cycle.elapsed == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("failed probes each cost tau2")
{
    const SystemParams p;
    const auto& policy = reference_policy();
    const double r_f = 1.0;
    const auto obs = scripted_observation(p, r_f);
    // The first two probes cannot support log2(1 + r_f); the third can.
    ScriptedEnvironment env({obs}, {0.0, 0.5 * r_f, r_f});

    const auto cycle = run_cycle(policy, p, env);
    CHECK(cycle.hop2_probes == 3);
    CHECK(cycle.hop2_time == doctest::Approx(3.0 * p.tau2()).epsilon(1e-14));
    CHECK(cycle.delivered == std::log2(2.0) * p.coherence);
}

TEST_CASE("random cycles satisfy the accounting identity and invariants")
{
    const SystemParams p;
    const auto& policy = reference_policy();
    for (std::uint64_t i = 0; i < 100000; ++i) {
        Rng rng = Rng::stream(17, i);
        const auto c = run_cycle(policy, p, rng);
        REQUIRE(c.elapsed == doctest::Approx(c.itemized_total()).epsilon(1e-12));
        REQUIRE(c.observations >= 1);
        REQUIRE(c.hop2_probes >= 1);
        REQUIRE(c.elapsed > 0.0);
        REQUIRE(c.delivered > 0.0);
        REQUIRE(c.delivered <= std::log2(1.0 + policy.rate_cap_snr) * p.coherence);
    }
}

TEST_CASE("hop-2 probe counts are geometric given the stopping rate")
{
    const SystemParams p = SystemParams{}.with_mean_snr_hop2(2.0);
    const auto policy = solve_policy(p);
    const ChannelDist hop2 = p.hop2();

    struct Bucket {
        double sum = 0.0;
        double sum_sq = 0.0;
        int n = 0;
    };
    std::map<int, Bucket> buckets;
    for (std::uint64_t i = 0; i < 1'000'000; ++i) {
        Rng rng = Rng::stream(2718, i);
        const auto c = run_cycle(policy, p, rng);
        const double r_n = std::exp2(c.delivered / p.coherence) - 1.0;
        // Probe count minus its conditional mean 1 / (1 - F_g(r_n)).
        const double d = static_cast<double>(c.hop2_probes) - 1.0 / hop2.survival(r_n);
        auto& b = buckets[static_cast<int>(r_n / 0.5)];
        b.sum += d;
        b.sum_sq += d * d;
        ++b.n;
    }
    int tested = 0;
    for (const auto& [key, b] : buckets) {
        if (b.n < 1000) continue;
        CAPTURE(key);
        const double mean = b.sum / b.n;
        const double se = std::sqrt((b.sum_sq / b.n - mean * mean) / (b.n - 1));
        CHECK(std::abs(mean) < 3.0 * se);
        ++tested;
    }
    CHECK(tested >= 3);
}

TEST_CASE("estimate_throughput is deterministic and thread-count independent")
{
    const SystemParams p;
    const auto& policy = reference_policy();
    const auto a = estimate_throughput(policy, p, 50000, 9, 1);
    const auto b = estimate_throughput(policy, p, 50000, 9, 1);
    const auto c = estimate_throughput(policy, p, 50000, 9, 4);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a.cycles == 50000);
    CHECK(a.std_error > 0.0);
    CHECK(a.mean * a.total_time > 0.0);

    const auto other = estimate_throughput(policy, p, 50000, 10, 1);
    CHECK(other.mean != a.mean);
    CHECK_THROWS_AS(estimate_throughput(policy, p, 999, 1), std::invalid_argument);
}

TEST_CASE("simulated throughput matches lambda* within 1% (1e6 cycles)")
{
    const SystemParams p;
    const auto& policy = reference_policy();
    const auto est = estimate_throughput(policy, p, 1'000'000, 20261017);
    CHECK(std::abs(est.mean - policy.lambda_star) / policy.lambda_star < 0.01);
    CHECK(std::abs(est.mean - policy.lambda_star) < 4.0 * est.std_error);
}

TEST_CASE("perturbed thresholds and rate caps are not significantly better")
{
    const SystemParams p;
    const auto& policy = reference_policy();
    const std::uint64_t cycles = 400000;
    const std::uint64_t seed = 555;
    const auto best = estimate_throughput(policy, p, cycles, seed);

    auto not_better = [&](const StoppingPolicy& perturbed) {
        const auto est = estimate_throughput(perturbed, p, cycles, seed);
        const double se = std::hypot(est.std_error, best.std_error);
        return est.mean <= best.mean + 3.0 * se;
    };
    for (double f : {0.5, 0.8, 1.2, 2.0}) {
        CAPTURE(f);
        auto perturbed = policy;
        perturbed.hop1_threshold *= f;
        CHECK(not_better(perturbed));
    }
    for (double f : {0.5, 0.8, 1.2, 1.5}) {
        CAPTURE(f);
        auto perturbed = policy;
        perturbed.rate_cap_snr *= f;
        CHECK(not_better(perturbed));
    }
}
