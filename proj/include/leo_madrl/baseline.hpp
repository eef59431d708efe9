#pragma once

#include <array>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "leo_madrl/reward.hpp"
#include "leo_madrl/sim.hpp"

namespace leo {

// Undirected weighted graph for shortest-path computations.
struct WeightedGraph {
    std::vector<std::vector<std::pair<int, double>>> adj;

    explicit WeightedGraph(int n = 0) : adj(n) {}
    int size() const { return static_cast<int>(adj.size()); }
    void add_edge(int a, int b, double w) {
        adj[a].emplace_back(b, w);
        adj[b].emplace_back(a, w);
    }
};

// Distances from `source` to every node (infinity when unreachable).
std::vector<double> dijkstra_distances(const WeightedGraph& g, int source);

// Next hop from every node toward `target` along a minimum-cost path, ties to
// the smallest neighbour index; -1 for the target itself and unreachable nodes.
std::vector<int> next_hops_toward(const WeightedGraph& g, int target);

// ISL graph of a snapshot weighted by slant range.
WeightedGraph isl_weighted_graph(const NetworkGraph& graph);

struct RoutingTable {
    double snapshot_time_s = 0.0;
    int num_gateways = 0;
    std::vector<int> next_hop;  // [satellite * num_gateways + gateway], -1 = serving/unreachable

    int at(int satellite, int gateway) const { return next_hop[satellite * num_gateways + gateway]; }
};

RoutingTable dijkstra_tables(const NetworkGraph& graph);

// Antenna slot of `sat` whose link lands on `neighbor`, or -1.
int antenna_toward(const NetworkGraph& graph, int sat, int neighbor);

// Slant-range shortest-path benchmark with global, per-snapshot knowledge.
class DijkstraRouter final : public Router {
public:
    std::string name() const override { return "dijkstra"; }
    void on_topology(const NetworkGraph& graph) override { table_ = dijkstra_tables(graph); }
    Decision decide(const RoutingContext& ctx) override;
    const RoutingTable& table() const { return table_; }

private:
    RoutingTable table_;
};

struct QRoutingConfig {
    double alpha = 0.5;
    double discount = 0.9;
    double epsilon_start = 1.0;
    double epsilon_end = 0.0;
    double epsilon_decay_per_step = 0.01;
    double step_every_s = 0.01;

    void validate() const;
};

// Per-satellite table over (destination gateway, ISL antenna).
class QTable {
public:
    QTable(int num_satellites, int num_gateways, double alpha, double discount);

    double q(int sat, int dest, int action) const { return values_[index(sat, dest, action)]; }
    double& q(int sat, int dest, int action) { return values_[index(sat, dest, action)]; }
    double alpha() const { return alpha_; }
    double discount() const { return discount_; }
    // Largest value over the feasible actions; 0 when none is feasible.
    double best(int sat, int dest, const std::array<bool, kIslSlots>& mask) const;

private:
    std::size_t index(int sat, int dest, int action) const {
        return (static_cast<std::size_t>(sat) * num_gateways_ + dest) * kIslSlots + action;
    }
    int num_gateways_;
    double alpha_;
    double discount_;
    std::vector<double> values_;
};

struct QExperience {
    int dest = 0;
    int action = 0;
    double reward = 0.0;
    double neighbor_best = 0.0;
    bool terminal = false;
};

// Q(d,a) += alpha * (r + gamma * neighbor_best * (1 - terminal) - Q(d,a)); returns the new value.
double q_routing_update(QTable& table, int sat, const QExperience& e);

std::array<bool, kIslSlots> feasibility_mask(const NetworkGraph& graph, int sat);

// Epsilon-greedy over feasible actions, ties to the lowest index; -1 if none.
int q_routing_next_hop(const QTable& table, int sat, int dest, const std::array<bool, kIslSlots>& mask, double epsilon,
                       std::mt19937_64& rng);

// Tabular Q-routing keyed by destination only (no positional state).
class QRoutingRouter final : public Router {
public:
    QRoutingRouter(int num_satellites, int num_gateways, QRoutingConfig cfg, RewardConfig reward, std::uint64_t seed);

    std::string name() const override { return "qrouting"; }
    void on_arrival(const RoutingContext& ctx) override;
    Decision decide(const RoutingContext& ctx) override;
    void on_feedback(const HopFeedback& fb, SimTime now) override;
    void on_packet_finished(const Packet& p, SimTime now) override;
    std::optional<SimTime> tick_interval() const override { return from_seconds(cfg_.step_every_s); }
    void on_tick(SimTime now) override;

    const QTable& table() const { return table_; }
    double epsilon() const { return epsilon_; }
    std::int64_t updates() const { return updates_; }
    const std::vector<TrainingLogRow>& training_log() const { return log_; }

private:
    struct Pending {
        int sender = -1;
        int dest = 0;
        int action = 0;
        double d_before = 0.0;
        bool received = false;
        double d_after = 0.0;
        double neighbor_best = 0.0;
        bool terminal = false;
    };

    QRoutingConfig cfg_;
    RewardConfig reward_;
    QTable table_;
    double epsilon_;
    std::mt19937_64 rng_;
    std::map<std::pair<std::int64_t, int>, Pending> pending_;
    std::int64_t updates_ = 0;
    std::vector<TrainingLogRow> log_;
    double td_sq_sum_ = 0.0;
    std::int64_t td_count_ = 0;
    SimTime window_latency_sum_{};
    std::int64_t window_delivered_ = 0;
};

}  // namespace leo
