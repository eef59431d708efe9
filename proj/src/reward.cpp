#include "leo_madrl/reward.hpp"

#include <stdexcept>

namespace leo {

void RewardConfig::validate() const {
    if (!(distance_ref_km > 0.0)) throw std::invalid_argument("distance_ref_km must be > 0");
    if (!(queue_time_ref_s > 0.0)) throw std::invalid_argument("queue_time_ref_s must be > 0");
    if (!(queue_weight >= 0.0)) throw std::invalid_argument("queue_weight must be >= 0");
}

double compute_reward(double d_before_km, double d_after_km, double queue_time_at_receiver_s, const RewardConfig& cfg) {
    return (d_before_km - d_after_km) / cfg.distance_ref_km -
           cfg.queue_weight * (queue_time_at_receiver_s / cfg.queue_time_ref_s);
}

}  // namespace leo
