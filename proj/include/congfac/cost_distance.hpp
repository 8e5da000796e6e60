#pragma once

#include <string>
#include <vector>

namespace congfac {

// Cost-Distance problem data: pick a subgraph connecting every source to the
// sink, paying the build costs c_e of the chosen edges plus, per source, its
// demand times the shortest length-distance to the sink inside the subgraph.
struct CostDistanceEdge {
    int u = -1;
    int v = -1;
    double cost = 0.0;    // c_e, build cost
    double length = 0.0;  // l_e, traversal length
};

struct CostDistanceSource {
    int node = -1;
    double demand = 0.0;  // > 0
};

struct CostDistanceInstance {
    std::string name;
    int num_nodes = 0;
    std::vector<CostDistanceEdge> edges;  // undirected
    std::vector<CostDistanceSource> sources;
    int sink = -1;
};

// Throws std::invalid_argument on structural violations.
void check_cost_distance(const CostDistanceInstance& cd);

// {"name"?, "n"?, "edges":[{"u","v","c","l"}], "sources":[{"node","w"}], "sink": t}
// n defaults to the largest mentioned id + 1. Unknown keys are errors.
CostDistanceInstance parse_cost_distance(const std::string& text);
std::string serialize_cost_distance(const CostDistanceInstance& cd);

}  // namespace congfac
