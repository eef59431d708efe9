#pragma once

namespace leo {

struct RewardConfig {
    double distance_ref_km = 1000.0;
    double queue_time_ref_s = 0.010;
    double queue_weight = 1.0;

    void validate() const;
};

// Slant-range progress toward the destination minus the weighted queueing
// time the packet spent at the receiving satellite.
double compute_reward(double d_before_km, double d_after_km, double queue_time_at_receiver_s, const RewardConfig& cfg);

}  // namespace leo
