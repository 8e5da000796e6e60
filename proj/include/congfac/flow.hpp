#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "congfac/instance.hpp"

namespace congfac {

// Single tolerance for every cost comparison in the project.
inline constexpr double kCostTol = 1e-9;

// One routed path. Paths are stored as edge sequences so that parallel edges
// stay distinguishable; the node sequence is derived. An empty edge list is
// the trivial path of a source sitting on its own facility.
struct PathFlow {
    int source = -1;
    std::vector<int> edges;
    double amount = 0.0;  // > 0
};

using PathAssignment = std::vector<PathFlow>;

// Per-edge aggregates. For undirected instances, `forward` counts traversals
// in the stored u->v orientation and `backward` the opposite; opposite
// traversals add, they never cancel (congestion is traffic, not net flow).
struct EdgeFlow {
    std::vector<double> total;
    std::vector<double> forward;
    std::vector<double> backward;
};

struct Solution {
    std::vector<int> facilities;  // opened nodes, sorted ascending
    PathAssignment assignment;
};

// Node sequence of a path; validates edge adjacency and direction along the
// way. Throws std::invalid_argument on a structurally broken path.
std::vector<int> path_nodes(const Instance& inst, const PathFlow& path);

EdgeFlow edge_flow(const Instance& inst, const PathAssignment& assignment);

double routing_cost(const Instance& inst, const EdgeFlow& flow);

// Feasibility: every path ends at an opened facility and per-source amounts
// add up to the demand. Throws on violation.
void check_solution(const Instance& inst, const Solution& sol);

// routing cost + opening costs of sol.facilities.
double total_cost(const Instance& inst, const Solution& sol);

struct NotADagError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NashCertificate {
    bool holds = false;
    double c_min = 0.0;  // cheapest flow-carrying path to a facility
    double c_max = 0.0;  // most expensive flow-carrying path to a facility
    double c_sp = 0.0;   // cheapest path to a facility in the full network
    std::vector<int> min_path;  // witness node sequences
    std::vector<int> max_path;
    std::vector<int> sp_path;
};

// eps-Nash check for single-source solutions: freeze edge lengths at
// l_e(x_e), take c_min/c_max over the flow-carrying DAG and c_sp over the
// whole network, and require c_max - c_min <= eps and c_sp >= c_max - eps.
// Throws NotADagError when the flow support has a directed cycle and
// std::invalid_argument for multi-source instances.
NashCertificate verify_eps_nash(const Instance& inst, const Solution& sol, double eps);

// Literal definition check over all simple path pairs; handles multiple
// sources. Guard on the number of enumerated paths.
bool verify_eps_nash_exhaustive(const Instance& inst, const Solution& sol, double eps,
                                std::size_t path_guard = 1000000);

// Resolve a node sequence to edge ids; parallel edges resolve to the lowest
// id (the file format stores node sequences only).
std::vector<int> resolve_path_edges(const Instance& inst, const std::vector<int>& nodes);

// {"facilities":[...], "paths":[{"source","nodes","amount"}]}
std::string solution_to_json(const Instance& inst, const Solution& sol);
Solution solution_from_json(const Instance& inst, const std::string& text);

namespace detail {

// Allocation-free core of verify_eps_nash, reused by the sparse solver's hot
// loop. Directional loads are passed separately; `facility` is a node mask.
// Returns false (instead of throwing) when the support is not a DAG.
struct VerifyScratch {
    std::vector<double> lengths;
    std::vector<int> indegree;
    std::vector<int> topo;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<char> on_support;
};

bool verify_loads_single_source(const Instance& inst, int source, std::span<const double> forward,
                                std::span<const double> backward,
                                const std::vector<char>& facility, double eps,
                                VerifyScratch& scratch, NashCertificate& cert, bool* not_a_dag);

}  // namespace detail

}  // namespace congfac
