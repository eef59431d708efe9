#include <doctest.h>

#include <cmath>

#include "leo_madrl/baseline.hpp"
#include "oracles.hpp"

using namespace leo;

TEST_CASE("dijkstra on a single edge") {
    WeightedGraph g(2);
    g.add_edge(0, 1, 3.0);
    const auto next = next_hops_toward(g, 1);
    CHECK(next[0] == 1);
    CHECK(next[1] == -1);
}

TEST_CASE("equal-cost diamond picks the smaller branch") {
    WeightedGraph g(4);
    g.add_edge(0, 2, 1.0);
    g.add_edge(0, 1, 1.0);
    g.add_edge(2, 3, 1.0);
    g.add_edge(1, 3, 1.0);
    CHECK(next_hops_toward(g, 3)[0] == 1);
}

TEST_CASE("dijkstra matches brute force on random graphs") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const WeightedGraph g = oracle::random_connected_graph(rng, 9);
        const int target = std::uniform_int_distribution<int>(0, g.size() - 1)(rng);
        const auto dist = dijkstra_distances(g, target);
        const auto next = next_hops_toward(g, target);
        for (int u = 0; u < g.size(); ++u) {
            const double bf = oracle::brute_force_cost(g, u, target);
            CHECK(dist[u] == bf);
            CHECK(oracle::follow_next_hops(g, next, u, target) == bf);
        }
    }
}

TEST_CASE("unreachable nodes have no next hop") {
    WeightedGraph g(3);
    g.add_edge(0, 1, 1.0);
    const auto next = next_hops_toward(g, 0);
    CHECK(next[2] == -1);
    CHECK(std::isinf(dijkstra_distances(g, 0)[2]));
}

TEST_CASE("q-routing update rule") {
    QTable t(3, 2, 1.0, 0.9);
    CHECK(q_routing_update(t, 0, {1, 2, 0.5, 7.0, true}) == 0.5);
    CHECK(t.q(0, 1, 2) == 0.5);
    QTable frozen(3, 2, 0.0, 0.9);
    frozen.q(1, 0, 0) = 0.25;
    q_routing_update(frozen, 1, {0, 0, 3.0, 1.0, false});
    CHECK(frozen.q(1, 0, 0) == 0.25);
    QTable half(3, 2, 0.5, 0.9);
    // 0 + 0.5 * (1 + 0.9 * 2 - 0)
    CHECK(q_routing_update(half, 2, {0, 1, 1.0, 2.0, false}) == doctest::Approx(1.4));
}

TEST_CASE("q-routing next hop") {
    QTable t(1, 1, 0.5, 0.9);
    t.q(0, 0, 1) = 2.0;
    t.q(0, 0, 3) = 5.0;
    std::mt19937_64 rng(3);
    const std::array<bool, kIslSlots> all{true, true, true, true};
    for (int i = 0; i < 50; ++i) CHECK(q_routing_next_hop(t, 0, 0, all, 0.0, rng) == 3);
    const std::array<bool, kIslSlots> no3{true, true, true, false};
    CHECK(q_routing_next_hop(t, 0, 0, no3, 0.0, rng) == 1);
    const std::array<bool, kIslSlots> none{};
    CHECK(q_routing_next_hop(t, 0, 0, none, 0.5, rng) == -1);

    std::vector<int> counts(3, 0);
    const std::array<bool, kIslSlots> three{true, false, true, true};
    for (int i = 0; i < 10000; ++i) {
        const int a = q_routing_next_hop(t, 0, 0, three, 1.0, rng);
        REQUIRE(a != 1);
        ++counts[a == 0 ? 0 : a - 1];
    }
    CHECK(oracle::chi_square_uniform(counts) < 9.2103);  // 2 dof, p = 0.01
}

TEST_CASE("q-routing learns the line") {
    // Satellites 0 - 1 - 2 on a line, destination served at 2. Action 0 moves
    // toward 2, action 1 away; distances fall by 1000 km per hop toward 2.
    const double d[3] = {2000.0, 1000.0, 0.0};
    QTable t(3, 1, 0.5, 0.9);
    std::mt19937_64 rng(8);
    const RewardConfig rc;
    const std::array<bool, kIslSlots> mask0{true, false, false, false};
    const std::array<bool, kIslSlots> mask1{true, true, false, false};
    for (int episode = 0; episode < 500; ++episode) {
        int s = 0;
        for (int step = 0; step < 20 && s != 2; ++step) {
            const auto& mask = s == 0 ? mask0 : mask1;
            const int a = q_routing_next_hop(t, s, 0, mask, 0.3, rng);
            const int next = a == 0 ? s + 1 : s - 1;
            const double r = compute_reward(d[s], d[next], 0.0, rc);
            const bool terminal = next == 2;
            const double nb = terminal ? 0.0 : t.best(next, 0, next == 0 ? mask0 : mask1);
            q_routing_update(t, s, {0, a, r, nb, terminal});
            s = next;
        }
    }
    std::mt19937_64 greedy(1);
    CHECK(q_routing_next_hop(t, 0, 0, mask0, 0.0, greedy) == 0);
    CHECK(q_routing_next_hop(t, 1, 0, mask1, 0.0, greedy) == 0);
}

TEST_CASE("dijkstra router follows minimum slant-range paths in the constellation") {
    TopologyInputs in;
    in.shell.num_planes = 4;
    in.shell.sats_per_plane = 5;
    in.gateways = {{0.0, 0.0, 0.0}, {30.0, 100.0, 0.0}};
    in.gsl_params = {10.0, 32.0, 32.0, 20.0, 20e6, 500.0, 3.0};
    const NetworkGraph g = refresh_topology(in, 0.0);
    const RoutingTable table = dijkstra_tables(g);
    const WeightedGraph wg = isl_weighted_graph(g);
    for (int gw = 0; gw < 2; ++gw) {
        const int target = g.serving_satellite(gw);
        std::vector<int> next(g.num_satellites());
        for (int s = 0; s < g.num_satellites(); ++s) {
            next[s] = table.at(s, gw);
            if (next[s] >= 0) CHECK(antenna_toward(g, s, next[s]) >= 0);
        }
        for (int s = 0; s < g.num_satellites(); ++s)
            CHECK(oracle::follow_next_hops(wg, next, s, target) ==
                  doctest::Approx(oracle::brute_force_cost(wg, s, target)).epsilon(1e-12));
    }
}
