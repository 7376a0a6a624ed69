#pragma once

#include <stdexcept>
#include <string>

#include "relaywait/model.hpp"

namespace relaywait {

// Units: lambda (throughput) in bits/s/Hz, durations in seconds, so every net
// reward below is in bits/Hz.

class SolverError : public std::runtime_error {
public:
    enum class Kind { NoPositiveThroughput, NeverTransmit, ProbingNeverTerminates, Numerical };

    SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct SolverDiagnostics {
    double rate_cap_residual = 0.0;   // optimality condition for the rate cap at the solution
    double gap_residual = 0.0;        // G(lambda*)
    double threshold_residual = 0.0;  // stop reward minus give-up reward at the threshold
    int lambda_iterations = 0;
    int rate_cap_iterations = 0;
};

/// Solved relay-waiting policy: stop iff the winner's first-hop SNR is at
/// least hop1_threshold, transmit at log2(1 + min(snr, rate_cap_snr)), then
/// keep probing the second hop until the rate is supported.
struct StoppingPolicy {
    double lambda_star = 0.0;
    double rate_cap_snr = 0.0;
    double hop1_threshold = 0.0;
    SolverDiagnostics diagnostics;
};

struct SolverOptions {
    /// |G(lambda*)| target in bits/Hz; <= 0 selects 1e-9 * coherence.
    double gap_tol = 0.0;
    /// Absolute residual target for the rate-cap equation.
    double rate_cap_tol = 1e-12;
    /// Quadrature tolerance relative to the coherence time.
    double quad_rel_tol = 1e-10;

    double resolved_gap_tol(const SystemParams& params) const
    {
        return gap_tol > 0.0 ? gap_tol : 1e-9 * params.coherence;
    }
};

/// R = log2(1 + r).
double rate_for_cap(double r_n);

/// Net reward of probing the second hop once and giving up on failure.
double expected_v1(double lambda, double r_n, const SystemParams& params);

/// Net reward of probing the second hop until log2(1 + r_g) >= R. Throws
/// SolverError(ProbingNeverTerminates) if the success probability underflows.
double expected_v_inf(double lambda, double r_n, const SystemParams& params);

/// Net reward of at most max_probes second-hop probes (finite sum).
double expected_v_l(double lambda, double r_n, unsigned max_probes, const SystemParams& params);

struct RateCap {
    double snr = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool degenerate = false;  // phi'(0) <= 0: no positive rate is worth sending
};

/// Left minus right side of the stationarity condition
///   coherence / ((1 + x) ln 2) = (lambda / rho_g) e^{x / rho_g} tau2,
/// i.e. d phi / dx.
double rate_cap_residual(double lambda, double x, const SystemParams& params);

/// phi(x) = log2(1 + x) tau_d - lambda (cts + tau_d) - lambda e^{x / rho_g} tau2.
double stop_reward_at(double lambda, double x, const SystemParams& params);

/// Maximizer x* of phi. Bisection on phi' over [0, x_hi], x_hi doubling from 1.
RateCap solve_rate_cap(double lambda, const SystemParams& params, double tol = 1e-12);

/// First-hop stop reward phi(min(r_f, x*)). Nondecreasing in r_f, flat above x*.
double net_stop_reward(double lambda, double r_f, double x_star, const SystemParams& params);

/// G(lambda) = E[max(stop reward, -lambda cts)] - lambda tau1 over the hop-1
/// SNR law. Continuous and strictly decreasing; zero at lambda*.
double optimality_gap(double lambda, const SystemParams& params,
                      const SolverOptions& options = {});

StoppingPolicy solve_policy(const SystemParams& params, const SolverOptions& options = {});
StoppingPolicy solve_policy(const SystemParams& params, double tol);

/// True iff the policy's threshold rule says "stop" for this first-hop SNR.
inline bool should_stop(double hop1_threshold, double r_f) { return r_f >= hop1_threshold; }

}  // namespace relaywait
