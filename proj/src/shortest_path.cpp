#include "congfac/shortest_path.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace congfac {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> dijkstra(const Instance& inst, int source, std::span<const double> lengths) {
    const auto n = static_cast<std::size_t>(inst.num_nodes());
    std::vector<double> dist(n, kInf);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(source)] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (done[static_cast<std::size_t>(u)]) continue;
        done[static_cast<std::size_t>(u)] = 1;
        for (const Arc& arc : inst.out_arcs(u)) {
            double len = lengths[static_cast<std::size_t>(arc.edge)];
            double nd = d + len;
            if (nd < dist[static_cast<std::size_t>(arc.to)]) {
                dist[static_cast<std::size_t>(arc.to)] = nd;
                heap.emplace(nd, arc.to);
            }
        }
    }
    return dist;
}

std::optional<PathResult> extract_shortest_path(const Instance& inst, int source, int target,
                                                std::span<const double> lengths,
                                                std::span<const double> dist) {
    const auto n = static_cast<std::size_t>(inst.num_nodes());
    if (!(dist[static_cast<std::size_t>(target)] < kInf)) return std::nullopt;

    // Tight arcs (those on some shortest path) form a DAG up to zero-length
    // cycles. BFS backwards from the target over tight arcs to get, per node,
    // the minimum hop count of a shortest path to the target.
    std::vector<std::vector<Arc>> incoming_tight(n);
    for (int u = 0; u < inst.num_nodes(); ++u) {
        double du = dist[static_cast<std::size_t>(u)];
        if (!(du < kInf)) continue;
        for (const Arc& arc : inst.out_arcs(u)) {
            double len = lengths[static_cast<std::size_t>(arc.edge)];
            if (du + len == dist[static_cast<std::size_t>(arc.to)])
                incoming_tight[static_cast<std::size_t>(arc.to)].push_back({u, arc.edge});
        }
    }
    std::vector<int> hops(n, -1);
    std::vector<int> queue;
    hops[static_cast<std::size_t>(target)] = 0;
    queue.push_back(target);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int v = queue[head];
        for (const Arc& in : incoming_tight[static_cast<std::size_t>(v)]) {
            if (hops[static_cast<std::size_t>(in.to)] < 0) {
                hops[static_cast<std::size_t>(in.to)] = hops[static_cast<std::size_t>(v)] + 1;
                queue.push_back(in.to);
            }
        }
    }
    if (hops[static_cast<std::size_t>(source)] < 0) return std::nullopt;

    PathResult result;
    result.dist = dist[static_cast<std::size_t>(target)];
    result.nodes.push_back(source);
    int u = source;
    while (u != target) {
        int best_to = -1;
        int best_edge = -1;
        double du = dist[static_cast<std::size_t>(u)];
        for (const Arc& arc : inst.out_arcs(u)) {
            double len = lengths[static_cast<std::size_t>(arc.edge)];
            if (du + len != dist[static_cast<std::size_t>(arc.to)]) continue;
            if (hops[static_cast<std::size_t>(arc.to)] != hops[static_cast<std::size_t>(u)] - 1)
                continue;
            if (best_to < 0 || arc.to < best_to || (arc.to == best_to && arc.edge < best_edge)) {
                best_to = arc.to;
                best_edge = arc.edge;
            }
        }
        if (best_to < 0) throw std::logic_error("shortest path extraction lost the target");
        result.nodes.push_back(best_to);
        result.edges.push_back(best_edge);
        u = best_to;
    }
    return result;
}

std::optional<int> nearest_target(std::span<const double> dist, std::span<const int> targets) {
    int best = -1;
    for (int t : targets) {
        if (!(dist[static_cast<std::size_t>(t)] < kInf)) continue;
        if (best < 0 || dist[static_cast<std::size_t>(t)] < dist[static_cast<std::size_t>(best)] ||
            (dist[static_cast<std::size_t>(t)] == dist[static_cast<std::size_t>(best)] && t < best))
            best = t;
    }
    if (best < 0) return std::nullopt;
    return best;
}

}  // namespace congfac
