#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <span>
#include <limits>
#include <random>
#include <vector>

#include "leo_madrl/baseline.hpp"
#include "leo_madrl/mlp.hpp"

namespace oracle {

// Exhaustive search over simple paths.
inline double brute_force_cost(const leo::WeightedGraph& g, int from, int to) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> seen(g.size(), 0);
    auto dfs = [&](auto& self, int u, double cost) -> void {
        if (cost >= best) return;
        if (u == to) {
            best = cost;
            return;
        }
        seen[u] = 1;
        for (const auto& [v, w] : g.adj[u])
            if (!seen[v]) self(self, v, cost + w);
        seen[u] = 0;
    };
    dfs(dfs, from, 0.0);
    return best;
}

// Random connected graph: a random spanning tree plus extra edges. Weights are
// small integers so path sums are exact in floating point.
inline leo::WeightedGraph random_connected_graph(std::mt19937_64& rng, int max_nodes) {
    std::uniform_int_distribution<int> nd(2, max_nodes);
    const int n = nd(rng);
    leo::WeightedGraph g(n);
    std::uniform_int_distribution<int> w(1, 20);
    std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
    for (int v = 1; v < n; ++v) {
        const int u = std::uniform_int_distribution<int>(0, v - 1)(rng);
        g.add_edge(u, v, w(rng));
        has[u][v] = has[v][u] = 1;
    }
    const int extra = std::uniform_int_distribution<int>(0, n * (n - 1) / 4)(rng);
    for (int k = 0; k < extra; ++k) {
        const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
        const int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
        if (a == b || has[a][b]) continue;
        g.add_edge(a, b, w(rng));
        has[a][b] = has[b][a] = 1;
    }
    return g;
}

// Cost of following next hops from `from` to `to`; infinity on a loop.
inline double follow_next_hops(const leo::WeightedGraph& g, const std::vector<int>& next, int from, int to) {
    double cost = 0.0;
    int u = from;
    for (int steps = 0; u != to; ++steps) {
        if (steps > g.size() || next[u] < 0) return std::numeric_limits<double>::infinity();
        double w = std::numeric_limits<double>::infinity();
        for (const auto& [v, ew] : g.adj[u])
            if (v == next[u]) w = std::min(w, ew);
        cost += w;
        u = next[u];
    }
    return cost;
}

// Chi-square statistic of observed counts against a uniform expectation.
inline double chi_square_uniform(const std::vector<int>& counts) {
    double n = 0.0;
    for (int c : counts) n += c;
    const double e = n / static_cast<double>(counts.size());
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - e) * (c - e) / e;
    return chi2;
}

// Largest relative disagreement between the analytic gradient and central
// finite differences of the loss, over every weight and bias. Entries where
// both magnitudes are below `floor` are compared against `floor`.
inline double max_gradient_error(const leo::MlpParams& params, std::span<const leo::Transition> batch,
                                 std::span<const double> targets, double step = 1e-5, double floor = 1e-6) {
    leo::MlpGradients grads;
    leo::loss_and_gradients(params, batch, targets, grads);
    leo::MlpParams probe = params;
    leo::MlpGradients scratch;
    double worst = 0.0;
    auto check = [&](double& slot, double analytic) {
        const double saved = slot;
        slot = saved + step;
        const double up = leo::loss_and_gradients(probe, batch, targets, scratch);
        slot = saved - step;
        const double down = leo::loss_and_gradients(probe, batch, targets, scratch);
        slot = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    };
    for (int l = 0; l < probe.num_layers(); ++l) {
        for (std::size_t i = 0; i < probe.weights[l].size(); ++i) check(probe.weights[l][i], grads.weights[l][i]);
        for (std::size_t i = 0; i < probe.biases[l].size(); ++i) check(probe.biases[l][i], grads.biases[l][i]);
    }
    return worst;
}


// Smallest |pre-activation| of any hidden unit over the given inputs. Finite
// differences are only meaningful when this exceeds the perturbation's reach.
inline double min_hidden_margin(const leo::MlpParams& params, const std::vector<std::vector<double>>& inputs) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& x : inputs) {
        std::vector<double> a = x;
        for (int l = 0; l + 1 < params.num_layers(); ++l) {
            const int in = params.layer_dims[l];
            const int out = params.layer_dims[l + 1];
            std::vector<double> z(out);
            for (int o = 0; o < out; ++o) {
                double sum = params.biases[l][o];
                for (int i = 0; i < in; ++i) sum += params.weights[l][o * in + i] * a[i];
                margin = std::min(margin, std::abs(sum));
                z[o] = std::max(0.0, sum);
            }
            a = std::move(z);
        }
    }
    return margin;
}

}  // namespace oracle
