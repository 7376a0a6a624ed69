#pragma once

#include <cmath>
#include <stdexcept>

#include "relaywait/rng.hpp"

namespace relaywait {

/// Exponential SNR law of a Rayleigh-fading hop, parameterized by its mean
/// linear SNR.
class ChannelDist {
public:
    explicit ChannelDist(double mean_snr);

    double mean_snr() const noexcept { return mean_snr_; }

    /// Pr[snr' <= snr] = 1 - exp(-snr / mean). Throws std::domain_error for
    /// negative arguments.
    double cdf(double snr) const;

    /// 1 - cdf(snr), computed directly to keep precision in the upper tail.
    double survival(double snr) const;

    /// Inverse-CDF map from u in (0, 1] to an SNR: -mean * ln(u).
    double from_uniform(double u) const noexcept { return -mean_snr_ * std::log(u); }

    template <class URBG>
    double sample(URBG& gen) const
    {
        return from_uniform(uniform_open_closed(gen));
    }

private:
    double mean_snr_;
};

inline double cdf(const ChannelDist& dist, double snr) { return dist.cdf(snr); }

template <class URBG>
double sample_snr(const ChannelDist& dist, URBG& gen)
{
    return dist.sample(gen);
}

/// Protocol timings (seconds), contention parameters and mean channel SNRs
/// (linear). Default member values are the reference network of 18
/// source-destination pairs.
struct SystemParams {
    int num_sources = 18;
    double tx_prob = 0.1;
    double minislot = 20e-6;
    double rts = 103e-6;
    double cts = 106e-6;
    double timeout = 106e-6;
    double coherence = 0.8e-3;
    double mean_snr_hop1 = 1.0;
    double mean_snr_hop2 = 10.0;

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;

    /// Cost of one second-hop probe followed by a coherence interval:
    /// RTS + CTS + coherence.
    double tau2() const noexcept { return rts + cts + coherence; }

    ChannelDist hop1() const { return ChannelDist(mean_snr_hop1); }
    ChannelDist hop2() const { return ChannelDist(mean_snr_hop2); }

    SystemParams with_mean_snr_hop2(double rho_g) const
    {
        SystemParams copy = *this;
        copy.mean_snr_hop2 = rho_g;
        return copy;
    }
};

}  // namespace relaywait
