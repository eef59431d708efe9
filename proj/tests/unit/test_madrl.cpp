#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "leo_madrl/madrl.hpp"
#include "oracles.hpp"

using namespace leo;

namespace {

class FakeQueues : public QueueMonitor {
public:
    std::map<std::pair<int, int>, double> occ;
    double occupancy(int sat, int slot) const override {
        auto it = occ.find({sat, slot});
        return it == occ.end() ? 0.0 : it->second;
    }
    SimTime backlog_delay(int sat, int slot) const override { return from_seconds(occupancy(sat, slot) * 0.02); }
};

TopologyInputs inputs() {
    TopologyInputs in;
    in.gateways = {{51.5074, -0.1278, 0.0}, {40.7128, -74.0060, 0.0}, {35.6762, 139.6503, 0.0}, {-33.8688, 151.2093, 0.0}};
    in.gsl_params = {10.0, 32.0, 32.0, 20.0, 20e6, 500.0, 3.0};
    return in;
}

Scenario small_scenario() {
    Scenario s;
    s.topology = inputs();
    s.topology.shell.num_planes = 5;
    s.topology.shell.sats_per_plane = 5;
    s.traffic.per_gateway_rate = 40.0;
    s.traffic.duration_s = 3.0;
    s.traffic.seed = 5;
    s.sim.drain_s = 0.5;
    return s;
}

TrainConfig small_training() {
    TrainConfig t;
    t.hidden_layers = {16, 16};
    t.batch_size = 16;
    t.target_sync_every = 50;
    return t;
}

double norm3(const std::array<double, 3>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

TEST_CASE("observation of an idle satellite") {
    const NetworkGraph g = refresh_topology(inputs(), 0.0);
    FakeQueues q;
    const Observation o = observe(17, 2, g, q);
    CHECK(o.mask == std::array<bool, 4>{true, true, true, true});
    for (int k = 0; k < 4; ++k) {
        CHECK(o.congestion(k) == 0.0);
        CHECK(norm3(o.neighbor_pos(k)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(norm3(o.own_pos()) == doctest::Approx(1.0).epsilon(1e-12));
    const EcefVector d = g.gateway_positions[2].unit();
    CHECK(o.dest_pos() == std::array<double, 3>{d.x, d.y, d.z});
}

TEST_CASE("absent neighbour is zero padded") {
    TopologyInputs in = inputs();
    in.shell.raan_spread_deg = 180.0;
    const NetworkGraph g = refresh_topology(in, 0.0);
    FakeQueues q;
    q.occ[{g.isl[3][static_cast<int>(Antenna::InterLeft)].neighbor, 0}] = 0.7;  // sat 3 is in plane 0
    const Observation o = observe(3, 0, g, q);
    const int left = static_cast<int>(Antenna::InterLeft);
    CHECK_FALSE(o.mask[left]);
    CHECK(o.neighbor_pos(left) == std::array<double, 3>{0.0, 0.0, 0.0});
    CHECK(o.congestion(left) == 0.0);
}

TEST_CASE("congestion is the busiest queue of the neighbour") {
    const NetworkGraph g = refresh_topology(inputs(), 0.0);
    FakeQueues q;
    const int fwd = g.isl[17][0].neighbor;
    q.occ[{fwd, 1}] = 0.5;
    q.occ[{fwd, 3}] = 0.2;
    const Observation o = observe(17, 0, g, q);
    CHECK(o.congestion(0) == 0.5);
    const Observation d = observe(17, 0, g, q, CongestionMetric::QueueDelay, 0.010);
    CHECK(d.congestion(0) == 1.0);  // 10 ms of backlog against a 10 ms reference, clipped
}

TEST_CASE("reward examples") {
    const RewardConfig rc;
    CHECK(compute_reward(1500.0, 1500.0, 0.0, rc) == 0.0);
    CHECK(compute_reward(2000.0, 1500.0, 0.002, rc) == doctest::Approx(0.3).epsilon(1e-12));
    double last = 1e9;
    for (double q = 0.0; q < 0.05; q += 0.001) {
        const double r = compute_reward(2000.0, 1500.0, q, rc);
        CHECK(r < last);
        last = r;
    }
}

TEST_CASE("greedy action selection") {
    MlpParams p = zero_mlp({kObservationSize, 4});
    p.biases[0] = {0.1, 0.9, 0.4, 0.9};
    Observation o;
    o.mask = {true, true, true, true};
    std::mt19937_64 rng(1);
    CHECK(select_action(p, o, 0.0, rng) == 1);  // tie with 3 goes to the lower index
    o.mask[1] = false;
    CHECK(select_action(p, o, 0.0, rng) == 3);
    o.mask = {};
    CHECK(select_action(p, o, 0.0, rng) == -1);

    // constant shift of every output keeps the greedy choice
    std::mt19937_64 init(3);
    MlpParams r = init_mlp({kObservationSize, 8, 4}, init);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 100; ++i) {
        Observation x;
        for (double& f : x.features) f = u(init);
        x.mask = {u(init) > 0, u(init) > 0, true, u(init) > 0};
        MlpParams shifted = r;
        for (double& b : shifted.biases.back()) b += 3.25;
        CHECK(select_action(r, x, 0.0, rng) == select_action(shifted, x, 0.0, rng));
    }
}

TEST_CASE("exploration is uniform over feasible actions") {
    const MlpParams p = zero_mlp({kObservationSize, 4});
    Observation o;
    o.mask = {true, true, true, true};
    std::mt19937_64 rng(17);
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 10000; ++i) ++counts[select_action(p, o, 1.0, rng)];
    CHECK(oracle::chi_square_uniform(counts) < 11.3449);  // 3 dof, p = 0.01
}

TEST_CASE("feedback assembly") {
    PendingDecision d;
    d.sender = 4;
    d.action = 2;
    d.sender_distance_km = 2000.0;
    d.s.features[0] = 1.0;
    Observation next;
    next.features[0] = 0.5;
    HopFeedback fb;
    fb.queue_time = SimTime{2000000};
    const FeedbackMessage m = exchange_feedback(9, next, 1500.0, fb);
    CHECK(m.queue_time_s == to_seconds(fb.queue_time));
    const Experience e = assemble_experience(d, m, RewardConfig{}, 77);
    CHECK(e.reward == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(e.s_next == next);
    CHECK_FALSE(e.terminal);
    CHECK(e.sender == 4);
    CHECK(e.receiver == 9);

    fb.terminal = true;
    const Experience t = assemble_experience(d, exchange_feedback(9, next, 1500.0, fb), RewardConfig{}, 77);
    CHECK(t.terminal);
    CHECK(t.s_next == Observation{});
}

TEST_CASE("replay buffer evicts oldest first") {
    ReplayBuffer b(3);
    for (int i = 0; i < 5; ++i) {
        Experience e;
        e.packet = i;
        b.push(e);
    }
    CHECK(b.size() == 3);
    CHECK(b.at(0).packet == 2);
    CHECK(b.at(1).packet == 3);
    CHECK(b.at(2).packet == 4);
    CHECK_THROWS_AS(b.at(3), std::out_of_range);
    std::mt19937_64 rng(2);
    for (const Experience* e : b.sample(50, rng)) CHECK(e->packet >= 2);
}

TEST_CASE("terminal experiences regress onto the reward") {
    Experience e;
    e.reward = 0.3;
    e.terminal = true;
    e.action = 1;
    MlpParams target = zero_mlp({kObservationSize, 4});
    target.biases[0] = {5, 5, 5, 5};
    const auto tr = as_transitions({&e});
    CHECK(td_targets(tr, target, 0.9)[0] == 0.3);
}

TEST_CASE("offline exploration audit") {
    const Scenario s = small_scenario();
    PhaseConfig phase;
    phase.epsilon_decay_per_step = 0.01;
    MadrlRouter router(phase, small_training(), RewardConfig{}, s.topology.shell.num_satellites(), s.traffic.seed);
    std::vector<Experience> stored;
    router.on_experience = [&](int agent, const Experience& e) {
        CHECK(agent == 0);
        stored.push_back(e);
    };
    const SimReport r = run_simulation(s, router, from_seconds(s.traffic.duration_s + s.sim.drain_s));
    REQUIRE(stored.size() > 100);

    double last = 2.0;
    for (const auto& row : router.training_log()) {
        CHECK(row.epsilon <= last);
        last = row.epsilon;
    }
    CHECK(router.epsilon() < 1.0);

    std::map<std::int64_t, const Packet*> by_id;
    for (const Packet& p : r.packets) by_id[p.id] = &p;
    for (const Experience& e : stored) {
        CHECK(e.s.mask[e.action]);
        const Packet& p = *by_id.at(e.packet);
        std::vector<int> sats;
        for (const HopRecord& h : p.hop_log)
            if (h.node.kind == NodeKind::Satellite && h.tx_delay > SimTime{}) sats.push_back(h.node.index);
        bool found = false;
        for (std::size_t i = 0; i + 1 < sats.size(); ++i) found = found || (sats[i] == e.sender && sats[i + 1] == e.receiver);
        CHECK(found);
        if (!e.terminal) {
            const auto a = e.s.neighbor_pos(e.action), b = e.s_next.own_pos();
            CHECK(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]) < 0.01);
        } else {
            CHECK(p.delivered());
            CHECK(sats.back() == e.receiver);
        }
    }
}

TEST_CASE("online exploitation copies, localises and optionally refines") {
    const Scenario s = small_scenario();
    std::mt19937_64 rng(4);
    const TrainConfig train = small_training();
    const MlpParams pretrained = init_mlp(network_dims(train), rng);
    PhaseConfig phase;
    phase.mode = Phase::OnlineExploitation;
    phase.epsilon_end = 0.2;

    {
        MadrlRouter router(phase, train, RewardConfig{}, s.topology.shell.num_satellites(), 1, pretrained);
        REQUIRE(router.agents().size() == 25u);
        for (const Agent& a : router.agents()) CHECK(a.online == pretrained);
        CHECK(router.epsilon() == 0.2);
        router.on_experience = [&](int agent, const Experience& e) { CHECK(agent == e.sender); };
        run_simulation(s, router, from_seconds(3.0));
        for (const Agent& a : router.agents()) {
            CHECK(a.online == pretrained);  // frozen
            for (std::size_t i = 0; i < a.buffer.size(); ++i)
                CHECK(&a == &router.agent_for(a.buffer.at(i).sender));
        }
    }

    phase.online_learning_enabled = true;
    const OnlineResult res = online_exploit(s, pretrained, phase, train, RewardConfig{});
    std::set<std::vector<double>> distinct;
    int changed = 0;
    for (const MlpParams& w : res.agent_weights) {
        distinct.insert(w.weights[0]);
        changed += w != pretrained;
    }
    CHECK(changed > 1);
    CHECK(distinct.size() > 2);

    PhaseConfig bad = phase;
    CHECK_THROWS(MadrlRouter(bad, train, RewardConfig{}, 25, 1));
}

TEST_CASE("the learned policy avoids a saturated branch") {
    // Branch satellite with two forward options of equal geometric progress;
    // the neighbour behind action 0 is congested and charges queueing time.
    Observation s;
    s.mask = {true, true, false, false};
    for (int i = 0; i < 3; ++i) {
        s.features[Observation::kOwn + i] = 0.5;
        s.features[Observation::kDest + i] = -0.5;
    }
    s.features[Observation::kNeighbors + 0] = 0.6;
    s.features[Observation::kNeighbors + 3] = 0.4;
    s.features[Observation::kCongestion + 0] = 1.0;
    const RewardConfig rc;
    std::vector<Experience> pool;
    for (int a = 0; a < 2; ++a) {
        Experience e;
        e.s = s;
        e.action = a;
        e.reward = compute_reward(3000.0, 2000.0, a == 0 ? 0.04 : 0.0, rc);
        e.terminal = true;
        pool.push_back(e);
    }
    TrainConfig cfg;
    cfg.hidden_layers = {16, 16};
    std::mt19937_64 rng(10);
    MlpParams net = init_mlp(network_dims(cfg), rng);
    AdamState opt = AdamState::for_params(net);
    const std::vector<const Experience*> batch{&pool[0], &pool[1]};
    for (int i = 0; i < 500; ++i) train_step(net, opt, net, as_transitions(batch), cfg);
    CHECK(select_action(net, s, 0.0, rng) == 1);
}
