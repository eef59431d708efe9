#include "leo_madrl/topology.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace leo {

namespace {

LinkState make_link(int neighbor, double distance_km, const LinkBudgetParams& params, const ModcodTable& table) {
    if (!(distance_km > 0.0)) return {};
    const auto rate = link_data_rate_bps(params, table, distance_km);
    if (!rate) return {};
    return {neighbor, distance_km, *rate};
}

void connect(IslAdjacency& adj, int a, Antenna slot_a, int b, Antenna slot_b, const LinkState& link) {
    if (!link.present()) return;
    adj[a][static_cast<int>(slot_a)] = {b, link.distance_km, link.rate_bps};
    adj[b][static_cast<int>(slot_b)] = {a, link.distance_km, link.rate_bps};
}

// Pairs the satellites of two adjacent planes. Candidates are taken in order of
// increasing slant range and accepted while both ends are still free, so
// mutual nearest neighbours are always paired and each satellite keeps a
// single antenna per side.
void pair_planes(const OrbitalShell& shell, const std::vector<EcefVector>& pos, int left_plane, int right_plane,
                 const LinkBudgetParams& params, const ModcodTable& table, InterplanePolicy policy,
                 IslAdjacency& adj) {
    const int s = shell.sats_per_plane;
    auto index = [&](int plane, int slot) { return plane * s + slot; };

    if (policy == InterplanePolicy::SameSlot) {
        for (int k = 0; k < s; ++k) {
            const int a = index(left_plane, k), b = index(right_plane, k);
            connect(adj, a, Antenna::InterRight, b, Antenna::InterLeft,
                    make_link(b, slant_range(pos[a], pos[b]), params, table));
        }
        return;
    }

    std::vector<std::tuple<double, int, int>> candidates;
    candidates.reserve(static_cast<std::size_t>(s) * s);
    for (int k = 0; k < s; ++k)
        for (int j = 0; j < s; ++j)
            candidates.emplace_back(slant_range(pos[index(left_plane, k)], pos[index(right_plane, j)]), k, j);
    std::sort(candidates.begin(), candidates.end());

    std::vector<bool> left_used(s, false), right_used(s, false);
    for (const auto& [d, k, j] : candidates) {
        if (left_used[k] || right_used[j]) continue;
        const int a = index(left_plane, k), b = index(right_plane, j);
        const LinkState link = make_link(b, d, params, table);
        if (!link.present()) continue;
        left_used[k] = right_used[j] = true;
        connect(adj, a, Antenna::InterRight, b, Antenna::InterLeft, link);
    }
}

}  // namespace

std::vector<NodeRef> NetworkGraph::nodes() const {
    std::vector<NodeRef> out;
    for (int i = 0; i < num_satellites(); ++i) out.push_back({NodeKind::Satellite, i});
    for (int g = 0; g < num_gateways(); ++g) out.push_back({NodeKind::Gateway, g});
    return out;
}

std::vector<Edge> NetworkGraph::edges() const {
    std::vector<Edge> out;
    for (int i = 0; i < num_satellites(); ++i) {
        for (int slot = 0; slot < kIslSlots; ++slot) {
            const LinkState& l = isl[i][slot];
            if (!l.present() || l.neighbor < i) continue;
            const LinkKind kind = slot < 2 ? LinkKind::IntraPlane : LinkKind::InterPlane;
            out.push_back({{NodeKind::Satellite, i}, {NodeKind::Satellite, l.neighbor}, kind, l.distance_km,
                           l.rate_bps, slot});
        }
    }
    for (int g = 0; g < num_gateways(); ++g) {
        const LinkState& l = gsl[g];
        if (!l.present()) continue;
        out.push_back({{NodeKind::Gateway, g}, {NodeKind::Satellite, l.neighbor}, LinkKind::Ground, l.distance_km,
                       l.rate_bps, kGslSlot});
    }
    return out;
}

std::vector<EcefVector> satellite_positions(const OrbitalShell& shell, double t_s) {
    std::vector<EcefVector> out;
    out.reserve(shell.num_satellites());
    for (int i = 0; i < shell.num_satellites(); ++i) out.push_back(satellite_position(shell, satellite_id(shell, i), t_s));
    return out;
}

IslAdjacency build_isl_edges(const OrbitalShell& shell, const LinkBudgetParams& params, const ModcodTable& table,
                             double t_s, InterplanePolicy policy) {
    shell.validate();
    const auto pos = satellite_positions(shell, t_s);
    IslAdjacency adj(pos.size());
    const int s = shell.sats_per_plane;
    const int m = shell.num_planes;

    for (int p = 0; p < m; ++p) {
        // With two slots the forward and backward neighbour coincide; a single link suffices.
        const int ring_links = s >= 3 ? s : s - 1;
        for (int k = 0; k < ring_links; ++k) {
            const int a = p * s + k, b = p * s + (k + 1) % s;
            connect(adj, a, Antenna::IntraForward, b, Antenna::IntraBackward,
                    make_link(b, slant_range(pos[a], pos[b]), params, table));
        }
    }

    const int plane_links = (shell.wraps() && m >= 3) ? m : m - 1;
    for (int p = 0; p < plane_links; ++p) pair_planes(shell, pos, p, (p + 1) % m, params, table, policy, adj);
    return adj;
}

void attach_gateways(NetworkGraph& graph, const std::vector<GeoPosition>& gateways, const LinkBudgetParams& gsl_params,
                     const ModcodTable& table, double t_s) {
    if (gateways.empty()) throw std::invalid_argument("gateway list is empty");
    graph.gateway_positions.clear();
    graph.gsl.assign(gateways.size(), {});
    graph.served_gateways.assign(graph.satellite_positions.size(), {});

    for (std::size_t g = 0; g < gateways.size(); ++g) {
        const EcefVector gp = gateway_position(gateways[g], t_s);
        graph.gateway_positions.push_back(gp);

        LinkState best;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < graph.num_satellites(); ++i) {
            const double d = slant_range(gp, graph.satellite_positions[i]);
            if (d < best_d) {
                const LinkState link = make_link(i, d, gsl_params, table);
                if (link.present()) {
                    best = link;
                    best_d = d;
                }
            }
        }
        if (!best.present()) throw InfeasibleGatewayError(static_cast<int>(g));
        graph.gsl[g] = best;
        graph.served_gateways[best.neighbor].push_back(static_cast<int>(g));
    }
}

NetworkGraph refresh_topology(const TopologyInputs& in, double t_s) {
    NetworkGraph graph;
    graph.snapshot_time_s = t_s;
    graph.shell = in.shell;
    graph.satellite_positions = satellite_positions(in.shell, t_s);
    graph.isl = build_isl_edges(in.shell, in.isl_params, in.modcod, t_s, in.interplane_policy);
    attach_gateways(graph, in.gateways, in.gsl_params, in.modcod, t_s);
    return graph;
}

bool satellites_connected(const NetworkGraph& graph) {
    const int n = graph.num_satellites();
    if (n == 0) return true;
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    int count = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& l : graph.isl[u]) {
            if (l.present() && !seen[l.neighbor]) {
                seen[l.neighbor] = true;
                ++count;
                stack.push_back(l.neighbor);
            }
        }
    }
    return count == n;
}

}  // namespace leo
