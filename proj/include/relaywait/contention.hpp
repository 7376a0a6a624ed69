#pragma once

#include <cstdint>
#include <stdexcept>

#include "relaywait/model.hpp"
#include "relaywait/rng.hpp"

namespace relaywait {

/// Probabilities of the three minislot outcomes: nobody transmits, exactly one
/// source transmits (a winner), two or more collide.
struct SlotProbabilities {
    double idle;
    double success;
    double collision;
};

SlotProbabilities slot_probabilities(const SystemParams& params);

/// Mean time from the start of contention until a winner's RTS is received.
/// Throws std::domain_error("contention never resolves") when the per-slot
/// success probability is zero.
double mean_observation_duration(const SystemParams& params);

/// One observation: the contention round that ends with a single winner.
struct ObservationOutcome {
    double duration = 0.0;
    double winner_snr_hop1 = 0.0;
    std::uint64_t minislots_idle = 0;
    std::uint64_t collisions = 0;

    friend bool operator==(const ObservationOutcome&, const ObservationOutcome&) = default;
};

/// Monte Carlo generator of observations. The number of RTS senders in a
/// minislot is Binomial(M, p); only its class (0, 1, >= 2) affects timing, so
/// one uniform per minislot is inverted against the cumulative class
/// probabilities.
class ContentionSampler {
public:
    static constexpr std::uint64_t kMaxMinislots = 1'000'000'000;

    explicit ContentionSampler(const SystemParams& params);

    template <class URBG>
    ObservationOutcome observe(URBG& gen, const ChannelDist& hop1) const
    {
        ObservationOutcome out;
        for (std::uint64_t slot = 0;; ++slot) {
            if (slot >= kMaxMinislots)
                throw std::runtime_error("contention exceeded minislot cap");
            const double u = uniform_open_closed(gen);
            if (u <= idle_) {
                ++out.minislots_idle;
            } else if (u <= idle_or_success_) {
                break;
            } else {
                ++out.collisions;
            }
        }
        out.duration = static_cast<double>(out.minislots_idle) * minislot_ +
                       static_cast<double>(out.collisions) * collision_cost_ + rts_;
        out.winner_snr_hop1 = hop1.sample(gen);
        return out;
    }

private:
    double idle_;
    double idle_or_success_;
    double minislot_;
    double collision_cost_;
    double rts_;
};

template <class URBG>
ObservationOutcome simulate_observation(const SystemParams& params, const ChannelDist& hop1,
                                        URBG& gen)
{
    return ContentionSampler(params).observe(gen, hop1);
}

}  // namespace relaywait
