#include "leo_madrl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace leo {

namespace {

Event timer_event(SimTime t, EventKind kind) {
    Event e;
    e.time = t;
    e.kind = kind;
    return e;
}

}  // namespace

SimTime from_seconds(double s) { return SimTime{std::llround(s * 1e9)}; }

std::string format_seconds(SimTime t) {
    const std::int64_t ns = t.count();
    const std::int64_t mag = ns < 0 ? -ns : ns;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%lld.%09lld", ns < 0 ? "-" : "", static_cast<long long>(mag / 1000000000),
                  static_cast<long long>(mag % 1000000000));
    return buf;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

HopLatency hop_latency(double queue_delay_s, double size_bits, double rate_bps, double distance_km) {
    if (!(rate_bps > 0.0)) throw InfeasibleLinkError("hop over a link with non-positive data rate");
    HopLatency h;
    h.tx_delay_s = size_bits / rate_bps;
    h.prop_delay_s = distance_km / kSpeedOfLightKmS;
    h.total_s = queue_delay_s + h.tx_delay_s + h.prop_delay_s;
    return h;
}

const char* to_string(DropReason r) {
    switch (r) {
        case DropReason::None: return "none";
        case DropReason::QueueFull: return "queue_full";
        case DropReason::TtlExpired: return "ttl_expired";
        case DropReason::NoFeasibleAction: return "no_feasible_action";
        case DropReason::Unreachable: return "unreachable";
    }
    return "unknown";
}

SimTime Packet::logged_latency() const {
    SimTime sum{};
    for (const auto& h : hop_log) sum += h.total();
    return sum;
}

void TrafficConfig::validate() const {
    if (!(per_gateway_rate >= 0.0)) throw std::invalid_argument("per_gateway_rate must be >= 0");
    if (!(packet_size_bits > 0.0)) throw std::invalid_argument("packet_size must be > 0");
    if (!(duration_s >= 0.0)) throw std::invalid_argument("duration must be >= 0");
}

std::vector<PacketSpawn> generate_traffic(const TrafficConfig& cfg, int num_gateways) {
    if (num_gateways < 2) throw std::invalid_argument("traffic needs at least two gateways");
    cfg.validate();
    std::vector<PacketSpawn> out;
    if (cfg.per_gateway_rate == 0.0) return out;

    for (int g = 0; g < num_gateways; ++g) {
        auto rng = make_rng(cfg.seed, 0x7aff1c00ULL + static_cast<std::uint64_t>(g));
        std::exponential_distribution<double> gap(cfg.per_gateway_rate);
        std::uniform_int_distribution<int> other(0, num_gateways - 2);
        double t = 0.0;
        while (true) {
            t += gap(rng);
            if (t > cfg.duration_s) break;
            const int k = other(rng);
            out.push_back({from_seconds(t), g, k < g ? k : k + 1});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const PacketSpawn& a, const PacketSpawn& b) {
        return a.time != b.time ? a.time < b.time : a.src < b.src;
    });
    return out;
}

TransmitQueue::TransmitQueue(NodeRef owner, int slot, int capacity, int reserved)
    : owner_(owner), slot_(slot), capacity_(capacity), reserved_(std::clamp(reserved, 0, capacity)) {
    if (capacity <= 0) throw std::invalid_argument("queue capacity must be > 0");
}

bool TransmitQueue::enqueue(const QueueEntry& entry) {
    if (length() + reserved_ >= capacity_) return false;
    contents_.push_back(entry);
    return true;
}

QueueEntry TransmitQueue::pop() {
    QueueEntry e = contents_.front();
    contents_.pop_front();
    return e;
}

double TransmitQueue::occupancy() const {
    return std::min(1.0, static_cast<double>(length() + reserved_) / capacity_);
}

void SimConfig::validate() const {
    if (queue_capacity <= 0) throw std::invalid_argument("queue_capacity must be > 0");
    if (ttl_hops <= 0) throw std::invalid_argument("ttl_hops must be > 0");
    if (!(topology_refresh_s > 0.0)) throw std::invalid_argument("topology_refresh_s must be > 0");
    if (!(drain_s >= 0.0)) throw std::invalid_argument("drain_s must be >= 0");
    if (!(start_time_s >= 0.0)) throw std::invalid_argument("start_time_s must be >= 0");
    if (corridor && !(corridor->fill_fraction >= 0.0 && corridor->fill_fraction < 1.0))
        throw std::invalid_argument("corridor fill_fraction must be in [0, 1)");
}

void Scenario::validate() const {
    topology.shell.validate();
    topology.isl_params.validate();
    topology.gsl_params.validate();
    traffic.validate();
    sim.validate();
    if (sim.corridor && (sim.corridor->plane < 0 || sim.corridor->plane >= topology.shell.num_planes))
        throw std::invalid_argument("corridor plane outside shell");
}

Simulator::Simulator(Scenario scenario, Router& router) : scenario_(std::move(scenario)), router_(router) {
    scenario_.validate();
    graph_ = refresh_topology(scenario_.topology, scenario_.sim.start_time_s);
    traffic_ = generate_traffic(scenario_.traffic, graph_.num_gateways());

    const int sats = graph_.num_satellites();
    const int spp = scenario_.topology.shell.sats_per_plane;
    const int cap = scenario_.sim.queue_capacity;
    queues_.reserve(sats * kSlotsPerSatellite + graph_.num_gateways());
    for (int i = 0; i < sats; ++i) {
        for (int slot = 0; slot < kSlotsPerSatellite; ++slot) {
            int reserved = 0;
            const auto& corridor = scenario_.sim.corridor;
            if (corridor && slot < kIslSlots && i / spp == corridor->plane)
                reserved = static_cast<int>(std::lround(corridor->fill_fraction * cap));
            queues_.emplace_back(NodeRef{NodeKind::Satellite, i}, slot, cap, reserved);
        }
    }
    for (int g = 0; g < graph_.num_gateways(); ++g) queues_.emplace_back(NodeRef{NodeKind::Gateway, g}, kGslSlot, cap);
}

int Simulator::queue_index(NodeRef owner, int slot) const {
    if (owner.kind == NodeKind::Satellite) return owner.index * kSlotsPerSatellite + slot;
    return graph_.num_satellites() * kSlotsPerSatellite + owner.index;
}

double Simulator::occupancy(int satellite, int slot) const {
    return queues_.at(queue_index({NodeKind::Satellite, satellite}, slot)).occupancy();
}

SimTime Simulator::backlog_delay(int satellite, int slot) const {
    const auto& q = queues_.at(queue_index({NodeKind::Satellite, satellite}, slot));
    double rate = 0.0;
    if (slot < kIslSlots) rate = graph_.isl[satellite][slot].rate_bps;
    if (!(rate > 0.0)) return SimTime{};
    return from_seconds((q.length() + q.reserved()) * scenario_.traffic.packet_size_bits / rate);
}

void Simulator::schedule(Event e) {
    if (e.time < now_) throw std::logic_error("event scheduled in the past");
    e.sequence = sequence_++;
    events_.push(e);
}

SimReport Simulator::run(SimTime until) {
    for (const auto& spawn : traffic_) {
        if (spawn.time > until) break;
        Event e;
        e.time = spawn.time;
        e.kind = EventKind::PacketCreated;
        e.packet = static_cast<std::int64_t>(&spawn - traffic_.data());
        schedule(e);
    }
    const SimTime refresh_step = from_seconds(scenario_.sim.topology_refresh_s);
    if (refresh_step + now_ <= until) schedule(timer_event(now_ + refresh_step, EventKind::TopologyRefresh));
    if (auto tick = router_.tick_interval(); tick && tick->count() > 0 && *tick <= until)
        schedule(timer_event(*tick, EventKind::TrainStep));

    router_.on_topology(graph_);

    while (!events_.empty() && events_.top().time <= until) {
        Event e = events_.top();
        events_.pop();
        now_ = e.time;
        ++counters_.events;
        switch (e.kind) {
            case EventKind::PacketCreated:
                handle_created(traffic_[static_cast<std::size_t>(e.packet)], now_);
                break;
            case EventKind::TxComplete:
                queues_[e.queue].busy = false;
                try_start(e.queue, now_);
                break;
            case EventKind::ArrivalAtNode:
                handle_arrival(e.packet, e.node, now_);
                break;
            case EventKind::TopologyRefresh:
                refresh(now_);
                if (now_ + refresh_step <= until) schedule(timer_event(now_ + refresh_step, EventKind::TopologyRefresh));
                break;
            case EventKind::FeedbackDelivered:
                router_.on_feedback(e.feedback, now_);
                break;
            case EventKind::TrainStep: {
                router_.on_tick(now_);
                const SimTime tick = *router_.tick_interval();
                if (now_ + tick <= until) schedule(timer_event(now_ + tick, EventKind::TrainStep));
                break;
            }
        }
        if (on_event) on_event(e);
    }

    SimReport report;
    report.router = router_.name();
    report.seed = scenario_.traffic.seed;
    counters_.in_flight = counters_.created - counters_.delivered - counters_.dropped();
    report.counters = counters_;
    report.packets = packets_;
    return report;
}

void Simulator::refresh(SimTime now) {
    graph_ = refresh_topology(scenario_.topology, scenario_.sim.start_time_s + to_seconds(now));
    router_.on_topology(graph_);
}

void Simulator::handle_created(const PacketSpawn& spawn, SimTime now) {
    Packet p;
    p.id = static_cast<std::int64_t>(packets_.size());
    p.src_gateway = spawn.src;
    p.dst_gateway = spawn.dst;
    p.size_bits = scenario_.traffic.packet_size_bits;
    p.created_at = now;
    packets_.push_back(std::move(p));
    states_.emplace_back();
    ++counters_.created;
    enqueue(packets_.back().id, queue_index({NodeKind::Gateway, spawn.src}, kGslSlot), now, -1, -1);
}

void Simulator::handle_arrival(std::int64_t id, NodeRef node, SimTime now) {
    Packet& p = packets_[id];
    if (node.kind == NodeKind::Gateway) {
        if (node.index != p.dst_gateway) throw std::logic_error("packet delivered to the wrong gateway");
        p.delivered_at = now;
        ++counters_.delivered;
        router_.on_packet_finished(p, now);
        return;
    }
    states_[id].arrived_at_node = now;
    route_at_satellite(id, node.index, now);
}

void Simulator::route_at_satellite(std::int64_t id, int sat, SimTime now) {
    Packet& p = packets_[id];
    PacketState& st = states_[id];
    if (p.hops() >= scenario_.sim.ttl_hops) {
        finish(id, now, DropReason::TtlExpired);
        return;
    }
    const int prev = st.pending ? st.pending->sender : -1;
    const bool serves = graph_.serves(sat, p.dst_gateway);
    const RoutingContext ctx{now, sat, p, prev, st.decisions, graph_, *this, serves};
    router_.on_arrival(ctx);

    if (serves) {
        enqueue(id, queue_index({NodeKind::Satellite, sat}, kGslSlot), now, -1, p.dst_gateway);
        return;
    }
    const Decision d = router_.decide(ctx);
    if (d.action < 0) {
        finish(id, now, d.drop == DropReason::None ? DropReason::NoFeasibleAction : d.drop);
        return;
    }
    if (d.action >= kIslSlots || !graph_.isl[sat][d.action].present())
        throw RoutingContractViolation(router_.name() + " chose antenna " + std::to_string(d.action) +
                                       " with no link at satellite " + std::to_string(sat));
    const int decision = st.decisions++;
    enqueue(id, queue_index({NodeKind::Satellite, sat}, d.action), now, decision, -1);
}

void Simulator::enqueue(std::int64_t id, int qi, SimTime now, int decision, int target_gateway) {
    TransmitQueue& q = queues_[qi];
    QueueEntry entry{id, now, now, decision, target_gateway};
    if (q.reserved() > 0 && q.owner().kind == NodeKind::Satellite) {
        const double rate = graph_.isl[q.owner().index][q.slot()].rate_bps;
        if (rate > 0.0) entry.ready = now + from_seconds(q.reserved() * packets_[id].size_bits / rate);
    }
    if (!q.enqueue(entry)) {
        finish(id, now, DropReason::QueueFull);
        return;
    }
    try_start(qi, now);
}

void Simulator::try_start(int qi, SimTime now) {
    TransmitQueue& q = queues_[qi];
    while (!q.busy && !q.empty()) {
        if (q.front().ready > now) {
            // link is serving the background backlog until the head is due
            q.busy = true;
            q.busy_until = q.front().ready;
            Event e;
            e.time = q.busy_until;
            e.kind = EventKind::TxComplete;
            e.queue = qi;
            schedule(e);
            return;
        }
        const QueueEntry entry = q.pop();
        Packet& p = packets_[entry.packet];
        PacketState& st = states_[entry.packet];

        const NodeRef owner = q.owner();
        LinkState link;
        NodeRef receiver;
        if (owner.kind == NodeKind::Gateway) {
            link = graph_.gsl[owner.index];
            receiver = {NodeKind::Satellite, link.neighbor};
        } else if (q.slot() == kGslSlot) {
            if (graph_.serves(owner.index, entry.target_gateway)) link = graph_.gsl[entry.target_gateway];
            receiver = {NodeKind::Gateway, entry.target_gateway};
        } else {
            link = graph_.isl[owner.index][q.slot()];
            receiver = {NodeKind::Satellite, link.neighbor};
        }

        if (!link.present()) {
            // Link vanished while queued (handover or re-pointing): the wait is
            // logged and the packet is routed again from the same satellite.
            p.hop_log.push_back({owner, entry.enqueued, now - entry.enqueued, SimTime{}, SimTime{}});
            route_at_satellite(entry.packet, owner.index, now);
            continue;
        }

        const HopLatency h = hop_latency(0.0, p.size_bits, link.rate_bps, link.distance_km);
        const SimTime tx = from_seconds(h.tx_delay_s);
        const SimTime prop = from_seconds(h.prop_delay_s);
        p.hop_log.push_back({owner, entry.enqueued, now - entry.enqueued, tx, prop});

        if (owner.kind == NodeKind::Satellite && st.pending) {
            const InFlight& in = *st.pending;
            SimTime delay = in.prop_delay;
            if (scenario_.sim.feedback_consumes_bandwidth && in.rate_bps > 0.0)
                delay += from_seconds(scenario_.sim.feedback_bits / in.rate_bps);
            Event fb;
            fb.time = now + delay;
            fb.kind = EventKind::FeedbackDelivered;
            fb.packet = entry.packet;
            fb.feedback = {entry.packet, in.decision, in.sender, owner.index, in.action, now - st.arrived_at_node,
                           q.slot() == kGslSlot};
            schedule(fb);
            st.pending.reset();
        }
        if (owner.kind == NodeKind::Satellite && q.slot() < kIslSlots)
            st.pending = InFlight{owner.index, entry.decision, q.slot(), prop, link.rate_bps};

        q.busy = true;
        q.busy_until = now + tx;
        Event done;
        done.time = now + tx;
        done.kind = EventKind::TxComplete;
        done.queue = qi;
        schedule(done);

        Event arrive;
        arrive.time = now + tx + prop;
        arrive.kind = EventKind::ArrivalAtNode;
        arrive.packet = entry.packet;
        arrive.node = receiver;
        schedule(arrive);
    }
}

void Simulator::finish(std::int64_t id, SimTime now, DropReason reason) {
    Packet& p = packets_[id];
    p.drop_reason = reason;
    states_[id].pending.reset();
    switch (reason) {
        case DropReason::QueueFull: ++counters_.dropped_queue_full; break;
        case DropReason::TtlExpired: ++counters_.dropped_ttl; break;
        case DropReason::NoFeasibleAction: ++counters_.dropped_no_action; break;
        case DropReason::Unreachable: ++counters_.dropped_unreachable; break;
        case DropReason::None: throw std::logic_error("finish without a drop reason");
    }
    router_.on_packet_finished(p, now);
}

SimReport run_simulation(const Scenario& scenario, Router& router, SimTime until) {
    Simulator sim(scenario, router);
    return sim.run(until);
}

}  // namespace leo
