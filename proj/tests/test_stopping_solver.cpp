#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "relaywait/stopping_solver.hpp"

using namespace relaywait;

namespace {

SystemParams ref_params(double rho_g = 10.0)
{
    return SystemParams{}.with_mean_snr_hop2(rho_g);
}

}  // namespace

TEST_CASE("rate_for_cap")
{
    CHECK(rate_for_cap(0.0) == 0.0);
    CHECK(rate_for_cap(1.0) == 1.0);
    CHECK(rate_for_cap(3.0) == 2.0);
}

TEST_CASE("expected_v1 closed-form corners")
{
    const auto p = ref_params();
    for (double lambda : {0.0, 0.3, 100.0})
        CHECK(expected_v1(lambda, 0.0, p) == doctest::Approx(-lambda * p.tau2()).epsilon(1e-15));
    for (double r : {0.5, 5.0, 30.0}) {
        const double expected = std::exp(-r / 10.0) * std::log2(1.0 + r) * p.coherence;
        CHECK(expected_v1(0.0, r, p) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("expected_v_inf closed-form corners")
{
    const auto p = ref_params();
    for (double lambda : {0.0, 0.3, 100.0})
        CHECK(expected_v_inf(lambda, 0.0, p) == doctest::Approx(-lambda * p.tau2()).epsilon(1e-15));
    for (double r : {0.5, 5.0, 30.0})
        CHECK(expected_v_inf(0.0, r, p) ==
              doctest::Approx(std::log2(1.0 + r) * p.coherence).epsilon(1e-15));
    CHECK_THROWS_AS(expected_v_inf(1.0, 1e5, p), SolverError);
}

TEST_CASE("second-hop closed forms match simulated episodes (1e6 each)")
{
    const auto p = ref_params(10.0);
    const double lambda = 100.0;
    const double r_n = 5.0;
    Rng rng(31337);

    SUBCASE("probe once")
    {
        const auto mc =
            oracle::sample_mean(1'000'000, [&] { return oracle::episode_reward(lambda, r_n, 1, p, rng); });
        CHECK(mc.within(expected_v1(lambda, r_n, p)));
    }
    SUBCASE("keep probing")
    {
        const auto mc =
            oracle::sample_mean(1'000'000, [&] { return oracle::episode_reward(lambda, r_n, 0, p, rng); });
        CHECK(mc.within(expected_v_inf(lambda, r_n, p)));
    }
    SUBCASE("at most three probes")
    {
        const auto mc =
            oracle::sample_mean(1'000'000, [&] { return oracle::episode_reward(lambda, r_n, 3, p, rng); });
        CHECK(mc.within(expected_v_l(lambda, r_n, 3, p)));
    }
}

TEST_CASE("expected_v_l: l = 1 reduces to expected_v1")
{
    const auto p = ref_params();
    for (double lambda : {0.0, 0.5, 100.0})
        for (double r : {0.0, 1.0, 5.0, 20.0})
            CHECK(expected_v_l(lambda, r, 1, p) == doctest::Approx(expected_v1(lambda, r, p)).epsilon(1e-14));
    CHECK_THROWS_AS(expected_v_l(1.0, 1.0, 0, p), std::invalid_argument);
}

TEST_CASE("l-probe identity: V_inf - V_l = F^l (V_inf - lambda tau_d)")
{
    const auto p = ref_params(10.0);
    const double lambda = 100.0;
    const double r_n = 5.0;
    const double f = p.hop2().cdf(r_n);
    const double vinf = expected_v_inf(lambda, r_n, p);
    for (unsigned l : {1u, 2u, 5u, 20u}) {
        const double lhs = vinf - expected_v_l(lambda, r_n, l, p);
        const double rhs = std::pow(f, l) * (vinf - lambda * p.coherence);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("V_l converges to V_inf")
{
    const auto p = ref_params(10.0);
    const double r_n = -10.0 * std::log(1.0 - 0.39);  // F_g(r_n) = 0.39
    CHECK(p.hop2().cdf(r_n) == doctest::Approx(0.39).epsilon(1e-14));
    for (double lambda : {0.1, 1.0, 100.0})
        CHECK(std::abs(expected_v_l(lambda, r_n, 1000, p) - expected_v_inf(lambda, r_n, p)) < 1e-9);
}

TEST_CASE("probe-once identity holds on random (lambda, r_n)")
{
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const double rho = 1.0 + 30.0 * uniform_open_closed(rng);
        const auto p = ref_params(rho);
        const double lambda = 50.0 * uniform_open_closed(rng);
        const double r_n = 3.0 * rho * uniform_open_closed(rng);
        const double vinf = expected_v_inf(lambda, r_n, p);
        const double lhs = vinf - expected_v1(lambda, r_n, p);
        const double rhs = p.hop2().cdf(r_n) * (vinf - lambda * p.coherence);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("second-hop dichotomy and first-hop give-up lemma")
{
    int keep_probing_cases = 0;
    int probe_once_cases = 0;
    for (double rho : {2.0, 5.0, 10.0, 20.0}) {
        const auto p = ref_params(rho);
        for (double lambda : {0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 50.0}) {
            for (double r : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
                const double vinf = expected_v_inf(lambda, r, p);
                const double v1 = expected_v1(lambda, r, p);
                if (vinf >= lambda * p.coherence) {
                    ++keep_probing_cases;
                    for (unsigned l = 1; l <= 50; ++l)
                        CHECK(vinf >= expected_v_l(lambda, r, l, p) - 1e-15);
                } else {
                    ++probe_once_cases;
                    // Strict only when a probe can fail; at F_g = 0 all S_l coincide.
                    for (unsigned l = 2; l <= 50; ++l) {
                        if (p.hop2().cdf(r) > 0.0)
                            CHECK(v1 > expected_v_l(lambda, r, l, p));
                        else
                            CHECK(v1 == expected_v_l(lambda, r, l, p));
                    }
                    CHECK(v1 - lambda * (p.cts + p.coherence) < -lambda * p.cts);
                }
            }
        }
    }
    CHECK(keep_probing_cases > 0);
    CHECK(probe_once_cases > 0);
}

TEST_CASE("rate cap: degenerate when phi'(0) <= 0")
{
    const auto p = ref_params(10.0);
    const auto cap = solve_rate_cap(200.0, p);
    CHECK(cap.degenerate);
    CHECK(cap.snr == 0.0);
    CHECK_THROWS_AS(solve_rate_cap(0.0, p), std::domain_error);
}

TEST_CASE("rate cap: residual, local maximum, and dense-grid oracle")
{
    const auto p = ref_params(10.0);
    for (double lambda : {0.05, 0.34, 2.0, 8.0}) {
        CAPTURE(lambda);
        const auto cap = solve_rate_cap(lambda, p);
        REQUIRE_FALSE(cap.degenerate);
        CHECK(std::abs(rate_cap_residual(lambda, cap.snr, p)) < 1e-10);
        const double at = stop_reward_at(lambda, cap.snr, p);
        CHECK(at >= stop_reward_at(lambda, cap.snr + 1e-3, p));
        CHECK(at >= stop_reward_at(lambda, cap.snr - 1e-3, p));
        CHECK(std::abs(cap.snr - oracle::grid_argmax_phi(lambda, p)) < 1e-4);
    }
}

TEST_CASE("rate cap is strictly decreasing in lambda")
{
    const auto p = ref_params(7.0);
    double prev = INFINITY;
    for (double lambda = 0.01; lambda < 11.0; lambda *= 1.3) {
        const double x = solve_rate_cap(lambda, p).snr;
        CHECK(x < prev);
        prev = x;
    }
}

TEST_CASE("net stop reward")
{
    const auto p = ref_params(10.0);
    const double lambda = 0.4;
    const double x_star = solve_rate_cap(lambda, p).snr;

    CHECK(net_stop_reward(lambda, 0.0, x_star, p) ==
          doctest::Approx(-lambda * (p.cts + p.coherence + p.tau2())).epsilon(1e-14));
    CHECK(net_stop_reward(lambda, x_star, x_star, p) == net_stop_reward(lambda, 10 * x_star, x_star, p));
    CHECK_THROWS_AS(net_stop_reward(lambda, -1.0, x_star, p), std::domain_error);

    double prev = -INFINITY;
    for (double r = 0.0; r < 3 * x_star; r += 0.01) {
        const double v = net_stop_reward(lambda, r, x_star, p);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("net stop reward equals keep-probing reward minus first-hop cost")
{
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
        const auto p = ref_params(2.0 + 18.0 * uniform_open_closed(rng));
        const double lambda = 5.0 * uniform_open_closed(rng);
        const double r_f = 30.0 * uniform_open_closed(rng);
        const double x_star = solve_rate_cap(lambda, p).snr;
        const double lhs = net_stop_reward(lambda, r_f, x_star, p);
        const double rhs =
            expected_v_inf(lambda, std::min(r_f, x_star), p) - lambda * (p.cts + p.coherence);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("optimality gap: sign, monotonicity, quadrature vs oracles")
{
    const auto p = ref_params(10.0);

    // Large lambda: x* = 0, only giving up is worthwhile.
    CHECK(solve_rate_cap(50.0, p).degenerate);
    CHECK(optimality_gap(50.0, p) < 0.0);

    std::vector<double> gs;
    for (int i = 0; i < 100; ++i) gs.push_back(optimality_gap(0.01 + 0.02 * i, p));
    for (std::size_t i = 1; i < gs.size(); ++i) CHECK(gs[i - 1] > gs[i]);

    for (double lambda : {0.05, 0.2, 0.337, 0.6, 2.0}) {
        const double x_star = solve_rate_cap(lambda, p).snr;
        CHECK(std::abs(optimality_gap(lambda, p) - oracle::gap_by_simpson(lambda, x_star, p, 6'000'000)) <
              1e-10 * p.coherence);
    }
}

TEST_CASE("optimality gap matches a 1e7-sample Monte Carlo average at lambda*/2")
{
    const auto p = ref_params(10.0);
    const auto policy = solve_policy(p);
    const double lambda = 0.5 * policy.lambda_star;
    const double x_star = solve_rate_cap(lambda, p).snr;
    const double tau1 = 495.72741541175685e-6;

    Rng rng(8);
    const ChannelDist hop1 = p.hop1();
    const auto mc = oracle::sample_mean(10'000'000, [&] {
        const double r = std::min(hop1.sample(rng), x_star);
        return std::max(oracle::phi(lambda, r, p), -lambda * p.cts);
    });
    CHECK(oracle::MeanAndError{mc.mean - lambda * tau1, mc.std_error}.within(optimality_gap(lambda, p)));
}

TEST_CASE("solve_policy: residuals, positivity, grid oracle")
{
    for (double rho : {2.0, 10.0}) {
        CAPTURE(rho);
        const auto p = ref_params(rho);
        const auto policy = solve_policy(p);
        CHECK(policy.lambda_star > 0.0);
        CHECK(policy.rate_cap_snr > 0.0);
        CHECK(policy.hop1_threshold > 0.0);
        CHECK(std::abs(policy.diagnostics.gap_residual) <= 1e-9 * p.coherence);
        CHECK(std::abs(optimality_gap(policy.lambda_star, p)) <= 1e-9 * p.coherence);
        CHECK(std::abs(policy.diagnostics.rate_cap_residual) < 1e-10);
        CHECK(policy.rate_cap_snr == solve_rate_cap(policy.lambda_star, p).snr);

        const double coarse = oracle::grid_root(
            [&](double lambda) {
                return oracle::gap_by_quantiles(lambda, solve_rate_cap(lambda, p).snr, p);
            },
            0.01, 20.0, 1e-3);
        CHECK(std::abs(policy.lambda_star - coarse) < 2e-3);
    }
}

TEST_CASE("threshold rule reproduces the stop/give-up comparison exactly")
{
    const auto p = ref_params(10.0);
    const auto policy = solve_policy(p);
    Rng rng(4242);
    int disagreements = 0;
    for (int i = 0; i < 10000; ++i) {
        const double r_f = 3.0 * policy.rate_cap_snr * uniform_open_closed(rng);
        const bool by_reward = net_stop_reward(policy.lambda_star, r_f, policy.rate_cap_snr, p) >=
                               -policy.lambda_star * p.cts;
        disagreements += by_reward != should_stop(policy.hop1_threshold, r_f);
    }
    CHECK(disagreements == 0);
    // The threshold is the indifference point.
    CHECK(std::abs(policy.diagnostics.threshold_residual) < 1e-15);
}

TEST_CASE("solve_policy rejects invalid parameters and honours tol")
{
    auto p = ref_params();
    p.tx_prob = 0.0;
    CHECK_THROWS_AS(solve_policy(p), std::invalid_argument);

    const auto loose = solve_policy(ref_params(), 1e-6);
    CHECK(std::abs(loose.diagnostics.gap_residual) <= 1e-6);
}
