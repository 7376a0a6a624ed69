#pragma once

// Shared lambda-transform machinery for first-hop threshold policies. A
// reward model supplies the rate cap for a given lambda and the net stop
// reward for a (capped) first-hop SNR; everything else is common to the
// relay-waiting policy and the probe-once baseline.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>
#include <string>

#include "relaywait/contention.hpp"
#include "relaywait/model.hpp"
#include "relaywait/numerics.hpp"
#include "relaywait/stopping_solver.hpp"

namespace relaywait::detail {

template <class M>
concept RewardModel = requires(const M& m, double lambda, double r) {
    { m.cap(lambda) } -> std::same_as<RateCap>;
    { m.reward(lambda, r) } -> std::convertible_to<double>;
};

/// Threshold for given lambda and cap; nullopt when stopping never beats
/// give-up. Returns the smallest double r with reward(min(r, cap)) >= -lambda cts,
/// so comparison against the threshold reproduces the reward comparison.
template <RewardModel M>
std::optional<double> threshold_for(const M& model, double lambda, const RateCap& cap,
                                    const SystemParams& params)
{
    const double give_up = -lambda * params.cts;
    auto stops = [&](double r) { return model.reward(lambda, std::min(r, cap.snr)) >= give_up; };
    if (stops(0.0)) return 0.0;
    if (cap.snr <= 0.0 || !stops(cap.snr)) return std::nullopt;
    return numerics::first_true(stops, 0.0, cap.snr);
}

template <RewardModel M>
double gap(const M& model, double lambda, const SystemParams& params, const SolverOptions& opt)
{
    const double tau1 = mean_observation_duration(params);
    const double give_up = -lambda * params.cts;
    const RateCap cap = model.cap(lambda);
    const auto threshold = threshold_for(model, lambda, cap, params);
    if (!threshold) return give_up - lambda * tau1;

    const ChannelDist hop1 = params.hop1();
    const double rho_f = hop1.mean_snr();
    const double lo = *threshold;
    const double hi = cap.snr;

    double expectation = give_up * hop1.cdf(lo);
    expectation += model.reward(lambda, hi) * hop1.survival(hi);
    auto integrand = [&](double r) { return model.reward(lambda, r) * std::exp(-r / rho_f) / rho_f; };
    // Pieces no wider than rho_f: on a long interval the first Simpson
    // samples can all land where the density has already vanished.
    const double width = hi - lo;
    const int pieces = std::max(1, static_cast<int>(std::ceil(width / rho_f)));
    const double abs_tol = opt.quad_rel_tol * params.coherence;
    try {
        for (int k = 0; k < pieces; ++k) {
            const double a = lo + width * k / pieces;
            const double b = k + 1 == pieces ? hi : lo + width * (k + 1) / pieces;
            expectation += numerics::adaptive_simpson(integrand, a, b, abs_tol / pieces);
        }
    } catch (const numerics::QuadratureError& e) {
        throw SolverError(SolverError::Kind::Numerical, e.what());
    }
    return expectation - lambda * tau1;
}

struct FixedPoint {
    double lambda;
    RateCap cap;
    double threshold;
    double threshold_residual;
    double gap_residual;
    int iterations;
};

template <RewardModel M>
FixedPoint solve_fixed_point(const M& model, const SystemParams& params, const SolverOptions& opt)
{
    params.validate();
    const double tol = opt.resolved_gap_tol(params);
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    auto g = [&](double lambda) { return gap(model, lambda, params, opt); };

    const double lambda_lo = 1e-9;
    if (!(g(lambda_lo) > 0.0))
        throw SolverError(SolverError::Kind::NoPositiveThroughput, "no positive-throughput policy");
    double lambda_hi = 1.0;
    int doublings = 0;
    while (g(lambda_hi) >= 0.0) {
        if (++doublings > 200)
            throw SolverError(SolverError::Kind::NoPositiveThroughput,
                              "no positive-throughput policy: bracket search failed");
        lambda_hi *= 2.0;
    }

    const auto root = numerics::bisect(g, lambda_lo, lambda_hi, tol);
    if (!(std::abs(root.residual) <= tol))
        throw SolverError(SolverError::Kind::Numerical,
                          "fixed-point bisection stalled with |G| = " +
                              std::to_string(std::abs(root.residual)));
    const double lambda = root.root;
    const RateCap cap = model.cap(lambda);
    if (cap.degenerate || cap.snr <= 0.0)
        throw SolverError(SolverError::Kind::NeverTransmit,
                          "rate cap is zero at lambda*: policy would never transmit");
    const auto threshold = threshold_for(model, lambda, cap, params);
    if (!threshold)
        throw SolverError(SolverError::Kind::NeverTransmit,
                          "stop reward never reaches give-up reward at lambda*");

    const double residual =
        model.reward(lambda, std::min(*threshold, cap.snr)) + lambda * params.cts;
    return {lambda, cap, *threshold, residual, root.residual, root.iterations};
}

}  // namespace relaywait::detail
