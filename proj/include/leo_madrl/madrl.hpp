#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "leo_madrl/mlp.hpp"
#include "leo_madrl/reward.hpp"
#include "leo_madrl/sim.hpp"

namespace leo {

// Flattened layout: own position (3), four neighbour positions (4 x 3),
// destination position (3), neighbour congestion (4).
inline constexpr int kObservationSize = 22;

struct Observation {
    std::array<double, kObservationSize> features{};
    std::array<bool, kNumActions> mask{};

    static constexpr int kOwn = 0;
    static constexpr int kNeighbors = 3;
    static constexpr int kDest = 15;
    static constexpr int kCongestion = 18;

    std::array<double, 3> own_pos() const { return triple(kOwn); }
    std::array<double, 3> neighbor_pos(int k) const { return triple(kNeighbors + 3 * k); }
    std::array<double, 3> dest_pos() const { return triple(kDest); }
    double congestion(int k) const { return features[kCongestion + k]; }
    bool any_feasible() const { return mask[0] || mask[1] || mask[2] || mask[3]; }
    bool operator==(const Observation&) const = default;

private:
    std::array<double, 3> triple(int at) const { return {features[at], features[at + 1], features[at + 2]}; }
};

enum class CongestionMetric { Occupancy, QueueDelay };

// Per-neighbour congestion summary: the most loaded of the neighbour's ISL
// queues, as an occupancy fraction or as backlog delay / queue_time_ref
// clipped to 1.
Observation observe(int sat, int dst_gateway, const NetworkGraph& graph, const QueueMonitor& queues,
                    CongestionMetric metric = CongestionMetric::Occupancy, double queue_time_ref_s = 0.010);

struct Experience {
    Observation s;
    int action = 0;
    double reward = 0.0;
    Observation s_next;  // all-zero when terminal
    bool terminal = false;

    // audit trail
    std::int64_t packet = -1;
    int sender = -1;
    int receiver = -1;
};

// Fixed-capacity ring; once full the oldest experience is overwritten.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Experience e);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    // i-th oldest stored experience.
    const Experience& at(std::size_t i) const;
    // Uniform draw with replacement.
    std::vector<const Experience*> sample(std::size_t n, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // index of the oldest element once full
    std::vector<Experience> items_;
};

std::vector<Transition> as_transitions(const std::vector<const Experience*>& batch);

// Epsilon-greedy over feasible actions; ties to the lowest index. Returns -1
// when no action is feasible.
int select_action(const MlpParams& dnn, const Observation& obs, double epsilon, std::mt19937_64& rng);

// What the sender keeps after forwarding a packet.
struct PendingDecision {
    int sender = -1;
    Observation s;
    int action = 0;
    double sender_distance_km = 0.0;
};

// What the receiving satellite reports back.
struct FeedbackMessage {
    int receiver = -1;
    Observation s_next;
    double receiver_distance_km = 0.0;
    double queue_time_s = 0.0;
    bool terminal = false;
};

// Receiver side of the exchange: its observation of the packet on arrival
// together with the queueing delay the packet then incurred there.
FeedbackMessage exchange_feedback(int receiver, const Observation& receiver_obs, double receiver_distance_km,
                                  const HopFeedback& fb);

Experience assemble_experience(const PendingDecision& d, const FeedbackMessage& f, const RewardConfig& reward,
                               std::int64_t packet);

enum class Phase { OfflineExploration, OnlineExploitation };

struct PhaseConfig {
    Phase mode = Phase::OfflineExploration;
    double epsilon_start = 1.0;
    double epsilon_end = 0.01;
    double epsilon_decay_per_step = 0.002;
    double train_every_s = 0.010;
    std::size_t buffer_capacity = 100000;
    std::size_t local_buffer_capacity = 10000;
    bool online_learning_enabled = false;
    CongestionMetric congestion_metric = CongestionMetric::Occupancy;

    void validate() const;
};

// A Q-network with its target copy, optimizer state and replay memory.
struct Agent {
    MlpParams online;
    MlpParams target;
    AdamState optimizer;
    ReplayBuffer buffer;
    std::int64_t train_steps = 0;
};

// Multi-agent deep Q routing. In offline exploration every satellite acts
// through one shared network fed by one global buffer; online, each
// satellite owns a copy of the pretrained network and a private buffer.
class MadrlRouter final : public Router {
public:
    MadrlRouter(PhaseConfig phase, TrainConfig train, RewardConfig reward, int num_satellites, std::uint64_t seed,
                std::optional<MlpParams> pretrained = std::nullopt);

    std::string name() const override { return "madrl"; }
    void on_arrival(const RoutingContext& ctx) override;
    Decision decide(const RoutingContext& ctx) override;
    void on_feedback(const HopFeedback& fb, SimTime now) override;
    void on_packet_finished(const Packet& p, SimTime now) override;
    std::optional<SimTime> tick_interval() const override { return from_seconds(phase_.train_every_s); }
    void on_tick(SimTime now) override;

    double epsilon() const { return epsilon_; }
    const std::vector<Agent>& agents() const { return agents_; }
    const Agent& agent_for(int sat) const { return agents_[agent_index(sat)]; }
    const std::vector<TrainingLogRow>& training_log() const { return log_; }
    // Called with (storing agent index, experience) for every stored tuple.
    std::function<void(int, const Experience&)> on_experience;

private:
    struct Pending {
        PendingDecision decision;
        std::optional<std::pair<Observation, double>> receiver;  // s_next, distance
        int receiver_sat = -1;
        bool terminal = false;
    };

    std::size_t agent_index(int sat) const { return phase_.mode == Phase::OfflineExploration ? 0 : sat; }
    double train_agent(Agent& agent);

    PhaseConfig phase_;
    TrainConfig train_;
    RewardConfig reward_;
    std::vector<Agent> agents_;
    double epsilon_;
    std::mt19937_64 action_rng_;
    std::mt19937_64 sample_rng_;
    std::map<std::pair<std::int64_t, int>, Pending> pending_;
    std::vector<TrainingLogRow> log_;
    std::int64_t ticks_ = 0;
    SimTime window_latency_sum_{};
    std::int64_t window_delivered_ = 0;
};

struct OfflineResult {
    MlpParams weights;
    std::vector<TrainingLogRow> log;
    SimReport report;
};

struct OnlineResult {
    SimReport report;
    std::vector<MlpParams> agent_weights;  // indexed by satellite
    std::vector<TrainingLogRow> log;
};

std::vector<int> network_dims(const TrainConfig& train);

OfflineResult offline_explore(const Scenario& scenario, const PhaseConfig& phase, const TrainConfig& train,
                              const RewardConfig& reward);
OnlineResult online_exploit(const Scenario& scenario, const MlpParams& pretrained, const PhaseConfig& phase,
                            const TrainConfig& train, const RewardConfig& reward);

}  // namespace leo
