#include "relaywait/stopping_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fixed_point.hpp"
#include "relaywait/numerics.hpp"

namespace relaywait {

double rate_for_cap(double r_n)
{
    return std::log2(1.0 + r_n);
}

double expected_v1(double lambda, double r_n, const SystemParams& params)
{
    const ChannelDist hop2 = params.hop2();
    const double success = hop2.survival(r_n);
    const double fail = hop2.cdf(r_n);
    return success * (rate_for_cap(r_n) * params.coherence - lambda * params.tau2()) +
           fail * (-lambda * (params.rts + params.cts));
}

double expected_v_inf(double lambda, double r_n, const SystemParams& params)
{
    const double success = params.hop2().survival(r_n);
    if (!(success > 0.0))
        throw SolverError(SolverError::Kind::ProbingNeverTerminates, "probing never terminates");
    return rate_for_cap(r_n) * params.coherence - lambda * params.tau2() / success;
}

double expected_v_l(double lambda, double r_n, unsigned max_probes, const SystemParams& params)
{
    if (max_probes < 1) throw std::invalid_argument("max_probes must be >= 1");
    const ChannelDist hop2 = params.hop2();
    const double fail = hop2.cdf(r_n);
    const double success = hop2.survival(r_n);
    const double payload = rate_for_cap(r_n) * params.coherence;
    const double tau2 = params.tau2();

    // Success on probe k has probability fail^{k-1} * success.
    double sum = 0.0;
    double fail_pow = 1.0;
    for (unsigned k = 1; k <= max_probes; ++k) {
        sum += fail_pow * success * (payload - k * lambda * tau2);
        fail_pow *= fail;
    }
    const double exhausted = -(static_cast<double>(max_probes) - 1.0) * lambda * tau2 -
                             lambda * (params.rts + params.cts);
    return sum + fail_pow * exhausted;
}

double rate_cap_residual(double lambda, double x, const SystemParams& params)
{
    const double rho_g = params.mean_snr_hop2;
    return params.coherence / ((1.0 + x) * std::numbers::ln2) -
           lambda / rho_g * std::exp(x / rho_g) * params.tau2();
}

double stop_reward_at(double lambda, double x, const SystemParams& params)
{
    return std::log2(1.0 + x) * params.coherence - lambda * params.cts -
           lambda * params.coherence -
           lambda * std::exp(x / params.mean_snr_hop2) * params.tau2();
}

RateCap solve_rate_cap(double lambda, const SystemParams& params, double tol)
{
    if (!(lambda > 0.0)) throw std::domain_error("solve_rate_cap requires lambda > 0");
    auto slope = [&](double x) { return rate_cap_residual(lambda, x, params); };

    if (slope(0.0) <= 0.0) return {0.0, slope(0.0), 0, true};

    double hi = 1.0;
    while (slope(hi) >= 0.0) {
        hi *= 2.0;
        if (!std::isfinite(hi))
            throw SolverError(SolverError::Kind::Numerical, "rate cap bracket diverged");
    }
    const auto root = numerics::bisect(slope, 0.0, hi, tol);
    return {root.root, root.residual, root.iterations, false};
}

double net_stop_reward(double lambda, double r_f, double x_star, const SystemParams& params)
{
    if (!(r_f >= 0.0)) throw std::domain_error("first-hop SNR must be nonnegative");
    return stop_reward_at(lambda, std::min(r_f, x_star), params);
}

namespace {

struct RelayWaitingModel {
    const SystemParams& params;
    double rate_cap_tol;

    RateCap cap(double lambda) const { return solve_rate_cap(lambda, params, rate_cap_tol); }
    double reward(double lambda, double r) const { return stop_reward_at(lambda, r, params); }
};

}  // namespace

double optimality_gap(double lambda, const SystemParams& params, const SolverOptions& options)
{
    if (!(lambda > 0.0)) throw std::domain_error("optimality_gap requires lambda > 0");
    params.validate();
    return detail::gap(RelayWaitingModel{params, options.rate_cap_tol}, lambda, params, options);
}

StoppingPolicy solve_policy(const SystemParams& params, const SolverOptions& options)
{
    const auto fp =
        detail::solve_fixed_point(RelayWaitingModel{params, options.rate_cap_tol}, params, options);
    StoppingPolicy policy;
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

StoppingPolicy solve_policy(const SystemParams& params, double tol)
{
    SolverOptions options;
    options.gap_tol = tol;
    return solve_policy(params, options);
}

}  // namespace relaywait
