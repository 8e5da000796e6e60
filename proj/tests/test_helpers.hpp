#pragma once

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "congfac/cost_distance.hpp"
#include "congfac/rng.hpp"

namespace congfac::testing {

// Seeded random connected Cost-Distance instance with n nodes, m >= n-1
// edges, and n_sources sources distinct from the sink.
inline CostDistanceInstance gen_random_cd(std::uint64_t seed, int n, int m, int n_sources) {
    SplitMix64 rng(seed);
    CostDistanceInstance cd;
    cd.name = "cd_seed" + std::to_string(seed);
    cd.num_nodes = n;
    cd.sink = 0;
    auto coef = [&] { return rng.next_in(0.1, 3.0); };
    std::set<std::pair<int, int>> used;
    for (int v = 1; v < n; ++v) {
        int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(v)));
        cd.edges.push_back({u, v, coef(), coef()});
        used.insert({std::min(u, v), std::max(u, v)});
    }
    while (static_cast<int>(cd.edges.size()) < m) {
        int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        int v = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (u == v || used.count({std::min(u, v), std::max(u, v)})) continue;
        cd.edges.push_back({u, v, coef(), coef()});
        used.insert({std::min(u, v), std::max(u, v)});
    }
    // Sources among nodes 1..n-1, unique.
    std::vector<int> nodes;
    for (int v = 1; v < n; ++v) nodes.push_back(v);
    for (std::size_t i = nodes.size(); i > 1; --i)
        std::swap(nodes[i - 1], nodes[rng.next_below(i)]);
    for (int i = 0; i < n_sources; ++i)
        cd.sources.push_back({nodes[static_cast<std::size_t>(i)], rng.next_in(0.5, 2.0)});
    std::sort(cd.sources.begin(), cd.sources.end(),
              [](const CostDistanceSource& a, const CostDistanceSource& b) {
                  return a.node < b.node;
              });
    return cd;
}

}  // namespace congfac::testing
