#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "leo_madrl/topology.hpp"

namespace leo {

// Simulation clock. Integer nanoseconds keep every latency sum exact.
using SimTime = std::chrono::duration<std::int64_t, std::nano>;

inline constexpr double kSpeedOfLightKmS = 299792.458;

SimTime from_seconds(double s);
inline double to_seconds(SimTime t) { return static_cast<double>(t.count()) * 1e-9; }
// Fixed nine-decimal rendering of an exact nanosecond count.
std::string format_seconds(SimTime t);

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

struct HopLatency {
    double tx_delay_s = 0.0;
    double prop_delay_s = 0.0;
    double total_s = 0.0;
};

class InfeasibleLinkError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Throws InfeasibleLinkError when rate <= 0.
HopLatency hop_latency(double queue_delay_s, double size_bits, double rate_bps, double distance_km);

enum class DropReason { None, QueueFull, TtlExpired, NoFeasibleAction, Unreachable };
const char* to_string(DropReason r);

struct HopRecord {
    NodeRef node;
    SimTime enqueue_time{};
    SimTime queue_delay{};
    SimTime tx_delay{};
    SimTime prop_delay{};

    SimTime total() const { return queue_delay + tx_delay + prop_delay; }
};

struct Packet {
    std::int64_t id = 0;
    int src_gateway = 0;
    int dst_gateway = 0;
    double size_bits = 12000.0;
    SimTime created_at{};
    std::vector<HopRecord> hop_log;
    std::optional<SimTime> delivered_at;
    DropReason drop_reason = DropReason::None;

    bool delivered() const { return delivered_at.has_value(); }
    bool dropped() const { return drop_reason != DropReason::None; }
    int hops() const { return static_cast<int>(hop_log.size()); }
    // Sum of every logged hop component.
    SimTime logged_latency() const;
};

struct TrafficConfig {
    double per_gateway_rate = 20.0;  // packets/s
    double packet_size_bits = 1500.0 * 8.0;
    double duration_s = 10.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct PacketSpawn {
    SimTime time{};
    int src = 0;
    int dst = 0;
};

// Poisson arrivals per gateway with destinations uniform over the other
// gateways, merged by (time, source). Throws std::invalid_argument for fewer
// than two gateways.
std::vector<PacketSpawn> generate_traffic(const TrafficConfig& cfg, int num_gateways);

struct QueueEntry {
    std::int64_t packet = 0;
    SimTime enqueued{};
    SimTime ready{};      // earliest start; later than enqueued behind background load
    int decision = -1;    // decision index at the owner, -1 for automatic hops
    int target_gateway = -1;
};

// FIFO output queue of one antenna. `reserved` slots are occupied by a
// persistent background backlog.
class TransmitQueue {
public:
    TransmitQueue(NodeRef owner, int slot, int capacity, int reserved = 0);

    // False (and no change) when the queue is full.
    bool enqueue(const QueueEntry& entry);
    const QueueEntry& front() const { return contents_.front(); }
    QueueEntry pop();

    NodeRef owner() const { return owner_; }
    int slot() const { return slot_; }
    int capacity() const { return capacity_; }
    int reserved() const { return reserved_; }
    int length() const { return static_cast<int>(contents_.size()); }
    bool empty() const { return contents_.empty(); }
    double occupancy() const;

    bool busy = false;
    SimTime busy_until{};

private:
    NodeRef owner_;
    int slot_;
    int capacity_;
    int reserved_;
    std::deque<QueueEntry> contents_;
};

enum class EventKind { PacketCreated, TxComplete, ArrivalAtNode, TopologyRefresh, FeedbackDelivered, TrainStep };

// What the receiving satellite reports back to the sender once the packet's
// queue delay at the receiver is known.
struct HopFeedback {
    std::int64_t packet = 0;
    int decision = 0;  // decision index at the sender
    int sender = 0;
    int receiver = 0;
    int action = 0;
    SimTime queue_time{};
    bool terminal = false;
};

struct Event {
    SimTime time{};
    std::uint64_t sequence = 0;
    EventKind kind = EventKind::PacketCreated;
    std::int64_t packet = -1;
    int queue = -1;
    NodeRef node;
    HopFeedback feedback;
};

struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.sequence > b.sequence;
    }
};

// Read access to queue state for routers building observations.
class QueueMonitor {
public:
    virtual ~QueueMonitor() = default;
    virtual double occupancy(int satellite, int slot) const = 0;
    // Time to drain the current backlog of the queue at its present rate.
    virtual SimTime backlog_delay(int satellite, int slot) const = 0;
};

struct RoutingContext {
    SimTime now{};
    int satellite = 0;
    const Packet& packet;
    int previous_satellite = -1;  // -1 when the packet came up from the ground
    int decision = 0;             // index of this decision for the packet
    const NetworkGraph& graph;
    const QueueMonitor& queues;
    bool serves_destination = false;
};

struct Decision {
    int action = -1;
    DropReason drop = DropReason::None;

    static Decision forward(int a) { return {a, DropReason::None}; }
    static Decision discard(DropReason r) { return {-1, r}; }
};

class RoutingContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Interface every routing engine implements. All hooks run synchronously on
// the event loop.
class Router {
public:
    virtual ~Router() = default;
    virtual std::string name() const = 0;
    virtual void on_topology(const NetworkGraph&) {}
    // Called for every arrival at a satellite, before any decision.
    virtual void on_arrival(const RoutingContext&) {}
    // Next-hop antenna among the four ISL slots.
    virtual Decision decide(const RoutingContext& ctx) = 0;
    virtual void on_feedback(const HopFeedback&, SimTime) {}
    virtual void on_packet_finished(const Packet&, SimTime) {}
    virtual std::optional<SimTime> tick_interval() const { return std::nullopt; }
    virtual void on_tick(SimTime) {}
};

// Sustained background load on every ISL queue of one plane.
struct Corridor {
    int plane = 0;
    double fill_fraction = 0.9;
};

struct SimConfig {
    int queue_capacity = 100;
    int ttl_hops = 64;
    double topology_refresh_s = 1.0;
    double drain_s = 1.0;  // extra simulated time after the last creation
    double start_time_s = 0.0;  // orbital epoch of simulated time zero
    std::optional<Corridor> corridor;
    bool feedback_consumes_bandwidth = false;
    double feedback_bits = 512.0;

    void validate() const;
};

struct Scenario {
    TopologyInputs topology;
    TrafficConfig traffic;
    SimConfig sim;

    void validate() const;
};

struct SimCounters {
    std::int64_t created = 0;
    std::int64_t delivered = 0;
    std::int64_t dropped_queue_full = 0;
    std::int64_t dropped_ttl = 0;
    std::int64_t dropped_no_action = 0;
    std::int64_t dropped_unreachable = 0;
    std::int64_t in_flight = 0;
    std::int64_t events = 0;

    std::int64_t dropped() const {
        return dropped_queue_full + dropped_ttl + dropped_no_action + dropped_unreachable;
    }
};

// One row per learning tick: the state of exploration and training, plus the
// mean latency of packets delivered since the previous tick.
struct TrainingLogRow {
    std::int64_t step = 0;
    SimTime sim_time{};
    double epsilon = 0.0;
    std::optional<double> loss;
    std::optional<double> window_mean_latency_s;
    std::size_t buffer_size = 0;
};

struct SimReport {
    std::string router;
    std::uint64_t seed = 0;
    std::vector<Packet> packets;  // ordered by id
    SimCounters counters;
};

class Simulator final : public QueueMonitor {
public:
    Simulator(Scenario scenario, Router& router);

    // Dispatches every event with time <= until.
    SimReport run(SimTime until);

    double occupancy(int satellite, int slot) const override;
    SimTime backlog_delay(int satellite, int slot) const override;

    const NetworkGraph& graph() const { return graph_; }
    // Optional observer called after every dispatched event (time, kind).
    std::function<void(const Event&)> on_event;

private:
    struct InFlight {
        int sender = -1;
        int decision = -1;
        int action = -1;
        SimTime prop_delay{};
        double rate_bps = 0.0;
    };
    struct PacketState {
        SimTime arrived_at_node{};
        std::optional<InFlight> pending;  // feedback owed to the previous satellite
        int decisions = 0;
    };

    void schedule(Event e);
    int queue_index(NodeRef owner, int slot) const;
    void handle_created(const PacketSpawn& spawn, SimTime now);
    void handle_arrival(std::int64_t id, NodeRef node, SimTime now);
    void route_at_satellite(std::int64_t id, int sat, SimTime now);
    void enqueue(std::int64_t id, int queue, SimTime now, int decision, int target_gateway);
    void try_start(int queue, SimTime now);
    void finish(std::int64_t id, SimTime now, DropReason reason);
    void refresh(SimTime now);

    Scenario scenario_;
    Router& router_;
    NetworkGraph graph_;
    std::vector<PacketSpawn> traffic_;
    std::vector<TransmitQueue> queues_;
    std::vector<Packet> packets_;
    std::vector<PacketState> states_;
    std::priority_queue<Event, std::vector<Event>, EventOrder> events_;
    std::uint64_t sequence_ = 0;
    SimTime now_{};
    SimCounters counters_;
};

SimReport run_simulation(const Scenario& scenario, Router& router, SimTime until);

}  // namespace leo
