#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "congfac/cost_distance.hpp"
#include "congfac/flow.hpp"
#include "congfac/instance.hpp"

namespace congfac {

// Cost-Distance -> FLCC reduction: same graph, every edge gets the shared
// fixed-cost function c_e/x + l_e floored at the minimum demand, the sink
// becomes an extra source carrying the sum of all demands, and the common
// opening cost B = sum(c) + (2 * total demand) * sum(l) + 1 exceeds any
// possible routing cost, so exactly one facility opens in the optimum.
Instance reduce_cost_distance(const CostDistanceInstance& cd);

// The B used by reduce_cost_distance, exposed for cross-checks.
double reduction_opening_cost(const CostDistanceInstance& cd);

struct ExtractedCostDistance {
    std::vector<int> edges;  // support subgraph of the flow
    double cost = 0.0;       // Cost-Distance objective of that subgraph
};

// Maps a single-facility FLCC solution of the reduced instance back to a
// Cost-Distance solution. If the facility is not at the sink, the flow is
// first rerouted by relocating the facility along the sink's own path.
// Throws std::invalid_argument when more than one facility is open.
ExtractedCostDistance extract_cost_distance_solution(const Instance& reduced, const Solution& sol,
                                                     const CostDistanceInstance& cd);

// Instance on which local search gets stuck at a cost ratio of order k^d:
// sources c_1..c_k (unit demand) each have a private facility candidate o_i
// (opening cost eps_fac) reached over a constant-1 edge, plus a hub S
// (opening cost (k-1)^(d+1)) reached over an x^d edge. Opening only the hub
// is locally optimal under open/close/swap although opening every o_i costs
// just k*(1+eps_fac). Node ids: c_i = i, o_i = k+i, hub = 2k.
Instance gen_local_search_gap(int k, int d, double eps_fac);

struct LocalMove {
    std::string kind;  // "open", "close", "swap"
    int open_node = -1;
    int close_node = -1;
    double cost = 0.0;  // total cost after the move, demands rerouted optimally
};

struct LocalOptReport {
    bool is_local_opt = true;
    double current_cost = 0.0;
    LocalMove best_move;  // meaningful when a strictly improving move exists
};

// Checks local optimality of F under the open / close / swap neighborhood
// with exact optimal unsplittable rerouting after each move.
LocalOptReport local_moves_check(const Instance& inst, const std::vector<int>& facilities);

enum class FnFamily { Constant, Affine, Polynomial, SharedFixed, PowerShare };

struct GenParams {
    int n = 6;
    int m = 8;
    int n_sources = 2;
    FnFamily family = FnFamily::Affine;
    bool directed = false;
    double w_min = 1.0;
    double w_max = 1.0;
    double coef_min = 0.1;
    double coef_max = 2.0;
    double common_b = 1.0;
    // When >= 0, facility costs become per-node with sources priced at this
    // value (typically prohibitive); path-based solvers never open at the
    // source, so comparisons against the oracles need this shape.
    double source_b = -1.0;
};

// Seeded connected random instance within one cost-function family. Directed
// instances are generated reachable from node 0, which is always the first
// source. Byte-identical output per (params, seed).
Instance gen_random(const GenParams& params, std::uint64_t seed);

FnFamily fn_family_from_name(const std::string& name);

}  // namespace congfac
