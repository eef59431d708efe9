#include "leo_madrl/baseline.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>

namespace leo {

std::vector<double> dijkstra_distances(const WeightedGraph& g, int source) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.size(), inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
    dist[source] = 0.0;
    frontier.emplace(0.0, source);
    while (!frontier.empty()) {
        const auto [d, u] = frontier.top();
        frontier.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, w] : g.adj[u]) {
            if (d + w < dist[v]) {
                dist[v] = d + w;
                frontier.emplace(dist[v], v);
            }
        }
    }
    return dist;
}

std::vector<int> next_hops_toward(const WeightedGraph& g, int target) {
    const auto dist = dijkstra_distances(g, target);
    std::vector<int> next(g.size(), -1);
    for (int u = 0; u < g.size(); ++u) {
        if (u == target || dist[u] == std::numeric_limits<double>::infinity()) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [v, w] : g.adj[u]) {
            const double via = w + dist[v];
            if (via < best || (via == best && v < next[u])) {
                best = via;
                next[u] = v;
            }
        }
    }
    return next;
}

WeightedGraph isl_weighted_graph(const NetworkGraph& graph) {
    WeightedGraph g(graph.num_satellites());
    for (int i = 0; i < graph.num_satellites(); ++i)
        for (const auto& l : graph.isl[i])
            if (l.present()) g.adj[i].emplace_back(l.neighbor, l.distance_km);
    return g;
}

RoutingTable dijkstra_tables(const NetworkGraph& graph) {
    RoutingTable t;
    t.snapshot_time_s = graph.snapshot_time_s;
    t.num_gateways = graph.num_gateways();
    t.next_hop.assign(static_cast<std::size_t>(graph.num_satellites()) * graph.num_gateways(), -1);
    const WeightedGraph g = isl_weighted_graph(graph);
    for (int gw = 0; gw < graph.num_gateways(); ++gw) {
        const auto next = next_hops_toward(g, graph.serving_satellite(gw));
        for (int s = 0; s < graph.num_satellites(); ++s) t.next_hop[s * t.num_gateways + gw] = next[s];
    }
    return t;
}

int antenna_toward(const NetworkGraph& graph, int sat, int neighbor) {
    for (int slot = 0; slot < kIslSlots; ++slot)
        if (graph.isl[sat][slot].neighbor == neighbor) return slot;
    return -1;
}

Decision DijkstraRouter::decide(const RoutingContext& ctx) {
    const int next = table_.at(ctx.satellite, ctx.packet.dst_gateway);
    if (next < 0) return Decision::discard(DropReason::Unreachable);
    return Decision::forward(antenna_toward(ctx.graph, ctx.satellite, next));
}

void QRoutingConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must be in (0, 1]");
    if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0))
        throw std::invalid_argument("need 0 <= epsilon_end <= epsilon_start <= 1");
    if (!(epsilon_decay_per_step > 0.0 && epsilon_decay_per_step < 1.0))
        throw std::invalid_argument("epsilon_decay_per_step must be in (0, 1)");
    if (!(step_every_s > 0.0)) throw std::invalid_argument("step_every_s must be > 0");
}

QTable::QTable(int num_satellites, int num_gateways, double alpha, double discount)
    : num_gateways_(num_gateways),
      alpha_(alpha),
      discount_(discount),
      values_(static_cast<std::size_t>(num_satellites) * num_gateways * kIslSlots, 0.0) {}

double QTable::best(int sat, int dest, const std::array<bool, kIslSlots>& mask) const {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kIslSlots; ++a)
        if (mask[a]) best = std::max(best, q(sat, dest, a));
    return best == -std::numeric_limits<double>::infinity() ? 0.0 : best;
}

double q_routing_update(QTable& table, int sat, const QExperience& e) {
    double& q = table.q(sat, e.dest, e.action);
    const double bootstrap = e.terminal ? 0.0 : table.discount() * e.neighbor_best;
    q += table.alpha() * (e.reward + bootstrap - q);
    return q;
}

std::array<bool, kIslSlots> feasibility_mask(const NetworkGraph& graph, int sat) {
    std::array<bool, kIslSlots> mask{};
    for (int a = 0; a < kIslSlots; ++a) mask[a] = graph.isl[sat][a].present();
    return mask;
}

namespace {

int uniform_feasible(const std::array<bool, kIslSlots>& mask, std::mt19937_64& rng) {
    const int n = static_cast<int>(std::count(mask.begin(), mask.end(), true));
    int pick = std::uniform_int_distribution<int>(0, n - 1)(rng);
    for (int a = 0; a < kIslSlots; ++a)
        if (mask[a] && pick-- == 0) return a;
    return -1;
}

}  // namespace

int q_routing_next_hop(const QTable& table, int sat, int dest, const std::array<bool, kIslSlots>& mask, double epsilon,
                       std::mt19937_64& rng) {
    if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) return -1;
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) return uniform_feasible(mask, rng);
    int best = -1;
    for (int a = 0; a < kIslSlots; ++a)
        if (mask[a] && (best < 0 || table.q(sat, dest, a) > table.q(sat, dest, best))) best = a;
    return best;
}

QRoutingRouter::QRoutingRouter(int num_satellites, int num_gateways, QRoutingConfig cfg, RewardConfig reward,
                               std::uint64_t seed)
    : cfg_(cfg),
      reward_(reward),
      table_(num_satellites, num_gateways, cfg.alpha, cfg.discount),
      epsilon_(cfg.epsilon_start),
      rng_(make_rng(seed, 0x9a0be7ULL)) {
    cfg_.validate();
    reward_.validate();
}

void QRoutingRouter::on_arrival(const RoutingContext& ctx) {
    if (ctx.previous_satellite < 0) return;
    auto it = pending_.find({ctx.packet.id, ctx.decision - 1});
    if (it == pending_.end()) return;
    Pending& p = it->second;
    const int dest = ctx.packet.dst_gateway;
    p.received = true;
    p.terminal = ctx.serves_destination;
    p.d_after = slant_range(ctx.graph.satellite_positions[ctx.satellite], ctx.graph.gateway_positions[dest]);
    p.neighbor_best = p.terminal ? 0.0 : table_.best(ctx.satellite, dest, feasibility_mask(ctx.graph, ctx.satellite));
}

Decision QRoutingRouter::decide(const RoutingContext& ctx) {
    const int dest = ctx.packet.dst_gateway;
    const int action =
        q_routing_next_hop(table_, ctx.satellite, dest, feasibility_mask(ctx.graph, ctx.satellite), epsilon_, rng_);
    if (action < 0) return Decision::discard(DropReason::NoFeasibleAction);
    Pending p;
    p.sender = ctx.satellite;
    p.dest = dest;
    p.action = action;
    p.d_before = slant_range(ctx.graph.satellite_positions[ctx.satellite], ctx.graph.gateway_positions[dest]);
    pending_[{ctx.packet.id, ctx.decision}] = p;
    return Decision::forward(action);
}

void QRoutingRouter::on_feedback(const HopFeedback& fb, SimTime) {
    auto it = pending_.find({fb.packet, fb.decision});
    if (it == pending_.end()) return;
    const Pending& p = it->second;
    if (p.received) {
        const double r = compute_reward(p.d_before, p.d_after, to_seconds(fb.queue_time), reward_);
        const double before = table_.q(p.sender, p.dest, p.action);
        const double target = r + (fb.terminal ? 0.0 : table_.discount() * p.neighbor_best);
        q_routing_update(table_, p.sender, {p.dest, p.action, r, p.neighbor_best, fb.terminal});
        td_sq_sum_ += (target - before) * (target - before);
        ++td_count_;
        ++updates_;
    }
    pending_.erase(it);
}

void QRoutingRouter::on_packet_finished(const Packet& p, SimTime) {
    if (p.delivered()) {
        window_latency_sum_ += *p.delivered_at - p.created_at;
        ++window_delivered_;
    }
    // A delivered packet may still owe feedback for its last satellite hop.
    const auto end = pending_.lower_bound({p.id + 1, 0});
    for (auto it = pending_.lower_bound({p.id, 0}); it != end;) {
        if (p.dropped() || !it->second.received) it = pending_.erase(it);
        else ++it;
    }
}

void QRoutingRouter::on_tick(SimTime now) {
    TrainingLogRow row;
    row.step = static_cast<std::int64_t>(log_.size()) + 1;
    row.sim_time = now;
    row.epsilon = epsilon_;
    // mean squared TD error over the updates since the previous tick
    if (td_count_ > 0) row.loss = td_sq_sum_ / static_cast<double>(td_count_);
    if (window_delivered_ > 0)
        row.window_mean_latency_s = to_seconds(window_latency_sum_) / static_cast<double>(window_delivered_);
    log_.push_back(row);
    td_sq_sum_ = 0.0;
    td_count_ = 0;
    window_latency_sum_ = SimTime{};
    window_delivered_ = 0;
    epsilon_ = std::max(cfg_.epsilon_end, epsilon_ * (1.0 - cfg_.epsilon_decay_per_step));
}

}  // namespace leo
