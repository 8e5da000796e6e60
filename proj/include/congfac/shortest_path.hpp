#pragma once

#include <optional>
#include <span>
#include <vector>

#include "congfac/instance.hpp"

namespace congfac {

// Single-source Dijkstra over the instance graph with per-edge lengths
// (shared by both directions on undirected instances). Lengths must be
// nonnegative. Unreachable nodes get +infinity.
std::vector<double> dijkstra(const Instance& inst, int source, std::span<const double> lengths);

struct PathResult {
    std::vector<int> nodes;   // node sequence, front() == source
    std::vector<int> edges;   // edge ids, one per hop
    double dist = 0.0;
};

// Extracts a shortest source->target path from a dijkstra() result.
// Deterministic tie-break: fewest hops first, then lexicographically
// smallest (node, edge) sequence. (Hop-count first keeps the walk well
// defined when zero-length edges put cycles into the shortest-path DAG.)
std::optional<PathResult> extract_shortest_path(const Instance& inst, int source, int target,
                                                std::span<const double> lengths,
                                                std::span<const double> dist);

// Closest node of `targets` by (distance, node id); nullopt if none reachable.
std::optional<int> nearest_target(std::span<const double> dist, std::span<const int> targets);

}  // namespace congfac
