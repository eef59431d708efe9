#include "leo_madrl/madrl.hpp"

#include <algorithm>
#include <stdexcept>

#include "leo_madrl/baseline.hpp"

namespace leo {

namespace {

void put_unit(std::array<double, kObservationSize>& f, int at, const EcefVector& v) {
    const EcefVector u = v.unit();
    f[at] = u.x;
    f[at + 1] = u.y;
    f[at + 2] = u.z;
}

}  // namespace

Observation observe(int sat, int dst_gateway, const NetworkGraph& graph, const QueueMonitor& queues,
                    CongestionMetric metric, double queue_time_ref_s) {
    Observation obs;
    put_unit(obs.features, Observation::kOwn, graph.satellite_positions.at(sat));
    put_unit(obs.features, Observation::kDest, graph.gateway_positions.at(dst_gateway));
    for (int k = 0; k < kNumActions; ++k) {
        const LinkState& l = graph.isl[sat][k];
        if (!l.present()) continue;
        obs.mask[k] = true;
        put_unit(obs.features, Observation::kNeighbors + 3 * k, graph.satellite_positions[l.neighbor]);
        double load = 0.0;
        for (int slot = 0; slot < kIslSlots; ++slot) {
            const double c = metric == CongestionMetric::Occupancy
                                 ? queues.occupancy(l.neighbor, slot)
                                 : to_seconds(queues.backlog_delay(l.neighbor, slot)) / queue_time_ref_s;
            load = std::max(load, c);
        }
        obs.features[Observation::kCongestion + k] = std::clamp(load, 0.0, 1.0);
    }
    return obs;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be > 0");
}

void ReplayBuffer::push(Experience e) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(e));
        return;
    }
    items_[head_] = std::move(e);
    head_ = (head_ + 1) % capacity_;
}

const Experience& ReplayBuffer::at(std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("replay buffer index");
    return items_[(head_ + i) % items_.size()];
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
    if (items_.empty()) throw std::logic_error("sampling an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const Experience*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
    return out;
}

std::vector<Transition> as_transitions(const std::vector<const Experience*>& batch) {
    std::vector<Transition> out;
    out.reserve(batch.size());
    for (const Experience* e : batch)
        out.push_back({e->s.features, e->action, e->reward, e->s_next.features, e->s_next.mask, e->terminal});
    return out;
}

int select_action(const MlpParams& dnn, const Observation& obs, double epsilon, std::mt19937_64& rng) {
    if (!obs.any_feasible()) return -1;
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
        const int n = static_cast<int>(std::count(obs.mask.begin(), obs.mask.end(), true));
        int pick = std::uniform_int_distribution<int>(0, n - 1)(rng);
        for (int a = 0; a < kNumActions; ++a)
            if (obs.mask[a] && pick-- == 0) return a;
    }
    const auto q = forward(dnn, obs.features);
    int best = -1;
    for (int a = 0; a < kNumActions; ++a)
        if (obs.mask[a] && (best < 0 || q[a] > q[best])) best = a;
    return best;
}

FeedbackMessage exchange_feedback(int receiver, const Observation& receiver_obs, double receiver_distance_km,
                                  const HopFeedback& fb) {
    FeedbackMessage m;
    m.receiver = receiver;
    m.terminal = fb.terminal;
    if (!fb.terminal) m.s_next = receiver_obs;
    m.receiver_distance_km = receiver_distance_km;
    m.queue_time_s = to_seconds(fb.queue_time);
    return m;
}

Experience assemble_experience(const PendingDecision& d, const FeedbackMessage& f, const RewardConfig& reward,
                               std::int64_t packet) {
    Experience e;
    e.s = d.s;
    e.action = d.action;
    e.reward = compute_reward(d.sender_distance_km, f.receiver_distance_km, f.queue_time_s, reward);
    e.terminal = f.terminal;
    if (!f.terminal) e.s_next = f.s_next;
    e.packet = packet;
    e.sender = d.sender;
    e.receiver = f.receiver;
    return e;
}

void PhaseConfig::validate() const {
    if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0))
        throw std::invalid_argument("need 0 <= epsilon_end <= epsilon_start <= 1");
    if (!(epsilon_decay_per_step > 0.0 && epsilon_decay_per_step < 1.0))
        throw std::invalid_argument("epsilon_decay_per_step must be in (0, 1)");
    if (!(train_every_s > 0.0)) throw std::invalid_argument("train_every_s must be > 0");
    if (buffer_capacity == 0 || local_buffer_capacity == 0)
        throw std::invalid_argument("buffer capacities must be > 0");
}

std::vector<int> network_dims(const TrainConfig& train) {
    std::vector<int> dims{kObservationSize};
    dims.insert(dims.end(), train.hidden_layers.begin(), train.hidden_layers.end());
    dims.push_back(kNumActions);
    return dims;
}

MadrlRouter::MadrlRouter(PhaseConfig phase, TrainConfig train, RewardConfig reward, int num_satellites,
                         std::uint64_t seed, std::optional<MlpParams> pretrained)
    : phase_(phase),
      train_(std::move(train)),
      reward_(reward),
      epsilon_(phase.mode == Phase::OfflineExploration ? phase.epsilon_start : phase.epsilon_end),
      action_rng_(make_rng(seed, 0xac710eULL)),
      sample_rng_(make_rng(seed, 0x5a3d1eULL)) {
    phase_.validate();
    train_.validate();
    reward_.validate();

    MlpParams initial;
    if (pretrained) {
        initial = *pretrained;
        initial.validate();
        if (initial.input_dim() != kObservationSize)
            throw ShapeError("pretrained network expects " + std::to_string(initial.input_dim()) + " inputs");
    } else {
        if (phase_.mode == Phase::OnlineExploitation)
            throw std::invalid_argument("online exploitation needs pretrained weights");
        auto init_rng = make_rng(seed, 0x1417ULL);
        initial = init_mlp(network_dims(train_), init_rng);
    }

    const bool offline = phase_.mode == Phase::OfflineExploration;
    const int count = offline ? 1 : num_satellites;
    const std::size_t capacity = offline ? phase_.buffer_capacity : phase_.local_buffer_capacity;
    agents_.reserve(count);
    for (int i = 0; i < count; ++i) {
        MlpParams local = copy_weights(initial);
        MlpParams target = sync_target(local);
        AdamState opt = AdamState::for_params(local);
        agents_.push_back(Agent{std::move(local), std::move(target), std::move(opt), ReplayBuffer(capacity), 0});
    }
}

void MadrlRouter::on_arrival(const RoutingContext& ctx) {
    if (ctx.previous_satellite < 0) return;
    auto it = pending_.find({ctx.packet.id, ctx.decision - 1});
    if (it == pending_.end()) return;
    const int dest = ctx.packet.dst_gateway;
    Pending& p = it->second;
    p.receiver_sat = ctx.satellite;
    p.terminal = ctx.serves_destination;
    Observation s_next;
    if (!ctx.serves_destination)
        s_next = observe(ctx.satellite, dest, ctx.graph, ctx.queues, phase_.congestion_metric, reward_.queue_time_ref_s);
    p.receiver = std::make_pair(
        s_next, slant_range(ctx.graph.satellite_positions[ctx.satellite], ctx.graph.gateway_positions[dest]));
}

Decision MadrlRouter::decide(const RoutingContext& ctx) {
    const int dest = ctx.packet.dst_gateway;
    Observation obs =
        observe(ctx.satellite, dest, ctx.graph, ctx.queues, phase_.congestion_metric, reward_.queue_time_ref_s);
    const Agent& agent = agents_[agent_index(ctx.satellite)];
    const int action = select_action(agent.online, obs, epsilon_, action_rng_);
    if (action < 0) return Decision::discard(DropReason::NoFeasibleAction);

    Pending p;
    p.decision.sender = ctx.satellite;
    p.decision.s = std::move(obs);
    p.decision.action = action;
    p.decision.sender_distance_km =
        slant_range(ctx.graph.satellite_positions[ctx.satellite], ctx.graph.gateway_positions[dest]);
    pending_[{ctx.packet.id, ctx.decision}] = std::move(p);
    return Decision::forward(action);
}

void MadrlRouter::on_feedback(const HopFeedback& fb, SimTime) {
    auto it = pending_.find({fb.packet, fb.decision});
    if (it == pending_.end()) return;
    const Pending& p = it->second;
    if (p.receiver) {
        const FeedbackMessage msg = exchange_feedback(p.receiver_sat, p.receiver->first, p.receiver->second, fb);
        Experience e = assemble_experience(p.decision, msg, reward_, fb.packet);
        const std::size_t idx = agent_index(p.decision.sender);
        if (on_experience) on_experience(static_cast<int>(idx), e);
        agents_[idx].buffer.push(std::move(e));
    }
    pending_.erase(it);
}

void MadrlRouter::on_packet_finished(const Packet& p, SimTime) {
    if (p.delivered()) {
        window_latency_sum_ += *p.delivered_at - p.created_at;
        ++window_delivered_;
    }
    const auto end = pending_.lower_bound({p.id + 1, 0});
    for (auto it = pending_.lower_bound({p.id, 0}); it != end;) {
        if (p.dropped() || !it->second.receiver) it = pending_.erase(it);
        else ++it;
    }
}

double MadrlRouter::train_agent(Agent& agent) {
    const auto batch = agent.buffer.sample(static_cast<std::size_t>(train_.batch_size), sample_rng_);
    const auto transitions = as_transitions(batch);
    const double loss = train_step(agent.online, agent.optimizer, agent.target, transitions, train_);
    if (++agent.train_steps % train_.target_sync_every == 0) agent.target = sync_target(agent.online);
    return loss;
}

void MadrlRouter::on_tick(SimTime now) {
    ++ticks_;
    TrainingLogRow row;
    row.step = ticks_;
    row.sim_time = now;

    const auto batch = static_cast<std::size_t>(train_.batch_size);
    if (phase_.mode == Phase::OfflineExploration) {
        Agent& g = agents_.front();
        if (g.buffer.size() >= batch) row.loss = train_agent(g);
        row.epsilon = epsilon_;
        row.buffer_size = g.buffer.size();
        epsilon_ = std::max(phase_.epsilon_end, epsilon_ * (1.0 - phase_.epsilon_decay_per_step));
    } else {
        double sum = 0.0;
        int trained = 0;
        for (Agent& a : agents_) {
            row.buffer_size += a.buffer.size();
            if (phase_.online_learning_enabled && a.buffer.size() >= batch) {
                sum += train_agent(a);
                ++trained;
            }
        }
        if (trained > 0) row.loss = sum / trained;
        row.epsilon = epsilon_;
    }
    if (window_delivered_ > 0)
        row.window_mean_latency_s = to_seconds(window_latency_sum_) / static_cast<double>(window_delivered_);
    window_latency_sum_ = SimTime{};
    window_delivered_ = 0;
    log_.push_back(row);
}

OfflineResult offline_explore(const Scenario& scenario, const PhaseConfig& phase, const TrainConfig& train,
                              const RewardConfig& reward) {
    if (phase.mode != Phase::OfflineExploration) throw std::invalid_argument("offline_explore needs offline mode");
    MadrlRouter router(phase, train, reward, scenario.topology.shell.num_satellites(), scenario.traffic.seed);
    SimReport report = run_simulation(scenario, router,
                                      from_seconds(scenario.traffic.duration_s + scenario.sim.drain_s));
    return {router.agents().front().online, router.training_log(), std::move(report)};
}

OnlineResult online_exploit(const Scenario& scenario, const MlpParams& pretrained, const PhaseConfig& phase,
                            const TrainConfig& train, const RewardConfig& reward) {
    if (phase.mode != Phase::OnlineExploitation) throw std::invalid_argument("online_exploit needs online mode");
    MadrlRouter router(phase, train, reward, scenario.topology.shell.num_satellites(), scenario.traffic.seed,
                       pretrained);
    SimReport report = run_simulation(scenario, router,
                                      from_seconds(scenario.traffic.duration_s + scenario.sim.drain_s));
    OnlineResult out;
    out.report = std::move(report);
    for (const Agent& a : router.agents()) out.agent_weights.push_back(a.online);
    out.log = router.training_log();
    return out;
}

}  // namespace leo
