#include "relaywait/contention.hpp"

#include <algorithm>
#include <cmath>

namespace relaywait {

SlotProbabilities slot_probabilities(const SystemParams& params)
{
    params.validate();
    const double m = params.num_sources;
    const double p = params.tx_prob;
    const double idle = std::pow(1.0 - p, m);
    const double success = m * p * std::pow(1.0 - p, m - 1.0);
    const double collision = std::max(0.0, 1.0 - idle - success);
    return {idle, success, collision};
}

double mean_observation_duration(const SystemParams& params)
{
    const auto probs = slot_probabilities(params);
    if (!(probs.success > 0.0))
        throw std::domain_error("contention never resolves");
    return probs.idle / probs.success * params.minislot +
           probs.collision / probs.success * (params.rts + params.timeout) + params.rts;
}

ContentionSampler::ContentionSampler(const SystemParams& params)
    : minislot_(params.minislot),
      collision_cost_(params.rts + params.timeout),
      rts_(params.rts)
{
    const auto probs = slot_probabilities(params);
    if (!(probs.success > 0.0))
        throw std::domain_error("contention never resolves");
    idle_ = probs.idle;
    idle_or_success_ = probs.idle + probs.success;
}

}  // namespace relaywait
