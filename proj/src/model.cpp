#include "relaywait/model.hpp"

#include <string>

namespace relaywait {

ChannelDist::ChannelDist(double mean_snr) : mean_snr_(mean_snr)
{
    if (!(mean_snr > 0.0) || !std::isfinite(mean_snr))
        throw std::invalid_argument("mean SNR must be positive and finite");
}

double ChannelDist::cdf(double snr) const
{
    if (!(snr >= 0.0))
        throw std::domain_error("SNR must be nonnegative, got " + std::to_string(snr));
    return -std::expm1(-snr / mean_snr_);
}

double ChannelDist::survival(double snr) const
{
    if (!(snr >= 0.0))
        throw std::domain_error("SNR must be nonnegative, got " + std::to_string(snr));
    return std::exp(-snr / mean_snr_);
}

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value))
        throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

}  // namespace

void SystemParams::validate() const
{
    if (num_sources < 1)
        throw std::invalid_argument("num_sources must be >= 1");
    if (!(tx_prob > 0.0 && tx_prob <= 1.0))
        throw std::invalid_argument("tx_prob must lie in (0, 1]");
    require_positive(minislot, "minislot");
    require_positive(rts, "rts");
    require_positive(cts, "cts");
    require_positive(timeout, "timeout");
    require_positive(coherence, "coherence");
    require_positive(mean_snr_hop1, "mean_snr_hop1");
    require_positive(mean_snr_hop2, "mean_snr_hop2");
}

}  // namespace relaywait
