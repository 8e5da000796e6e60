#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "congfac/flow.hpp"
#include "congfac/instance.hpp"
#include "congfac/rng.hpp"

namespace congfac {

// Cost of moving weight w along the cheapest u->v path when every edge is
// priced at w*l_e(w). cost is +infinity (with empty paths) when v is
// unreachable. Tie-break: fewest hops, then lexicographic node sequence.
struct GMetricResult {
    double cost = 0.0;
    std::vector<int> nodes;
    std::vector<int> edges;
};

GMetricResult g_metric(const Instance& inst, int u, int v, double w);

// Pairing cost of the merge scheme: the best meeting point z minimizing
//   g(u,z,wu) + g(v,z,wv) + wu/(wu+wv)*g(z,u,wu+wv) + wv/(wu+wv)*g(z,v,wu+wv),
// ties toward the smallest z. Stores the four shortest paths at z.
struct PairCost {
    double k_cost = 0.0;
    int meeting = -1;
    GMetricResult u_to_meeting;  // at weight wu
    GMetricResult v_to_meeting;  // at weight wv
    GMetricResult meeting_to_u;  // at weight wu+wv
    GMetricResult meeting_to_v;  // at weight wu+wv
};

PairCost pair_cost_K(const Instance& inst, int u, double wu, int v, double wv);

struct MatchResult {
    std::vector<std::pair<int, int>> pairs;  // index pairs, first < second
    std::vector<int> unmatched;              // indices
    bool exact = true;                       // bitmask DP vs greedy heuristic
    bool forced_pair = false;                // progress rule fired
};

// Maximum-cardinality minimum-cost matching leaving `target_unmatched` nodes
// unmatched (one extra on odd parity). Exact bitmask DP up to 22 nodes,
// documented greedy beyond (flagged via `exact`). When the cardinality
// formula yields zero pairs while more nodes than the target are active, the
// single globally cheapest pair is matched instead, so callers always make
// progress.
MatchResult constrained_matching(const std::vector<std::vector<double>>& costs,
                                 int target_unmatched);

inline constexpr int kExactMatchingLimit = 22;

enum class MovementKind { ToMeeting, BackFromMeeting };

struct Movement {
    int phase = 0;
    MovementKind kind = MovementKind::ToMeeting;
    double weight = 0.0;
    std::vector<int> path_nodes;
    double cost = 0.0;  // sum over the path of weight * l_e(weight)
};

struct ActiveDemand {
    int node = -1;
    double weight = 0.0;
    std::vector<int> members;  // indices into inst.sources()
};

struct PhasePairLog {
    int u = -1;
    int v = -1;
    int meeting = -1;
    double k_cost = 0.0;
};

struct PhaseLogEntry {
    int phase = 0;
    std::vector<PhasePairLog> pairs;  // node ids
    std::vector<int> unmatched;       // node ids
    bool matching_exact = true;
    bool forced_pair = false;
    std::vector<Movement> movements;
    double phase_cost = 0.0;
};

struct PhaseState {
    std::vector<ActiveDemand> active;  // sorted by node id; sum of weights is invariant
    int phase = 0;
    std::vector<Movement> movements;   // accumulated across phases
    // Walk of each original source so far, as edge ids; ends at the node of
    // the active demand currently carrying it.
    std::vector<std::vector<int>> source_walks;
};

PhaseState init_phase_state(const Instance& inst);

// One phase of the merge scheme: compute pairwise K costs, match with k
// targets unmatched, route each pair to its meeting point, draw the survivor
// with probability w_u/(w_u+w_v) (one draw per pair, in pair-sorted order),
// and route the combined demand back. Strictly decreases the active count.
PhaseState run_phase(const Instance& inst, const PhaseState& state, int k, SplitMix64& rng,
                     PhaseLogEntry* log = nullptr);

struct KMedianResult {
    Solution solution;
    double routing_cost = 0.0;  // re-evaluated under true congestion
    int phases = 0;
    std::vector<PhaseLogEntry> phase_log;  // of the reported run
    int best_run = 0;
    std::vector<double> run_costs;  // per repetition
};

// Runs the phase loop `repeats` times with seeds derived from (seed, run) and
// reports the run whose superposed flow has the lowest re-evaluated routing
// cost. k >= |S| returns facilities at all source nodes with zero routing.
KMedianResult solve_k_median(const Instance& inst, int k, std::uint64_t seed, int repeats,
                             int threads = 1);

struct KSweepRow {
    int k = 0;
    double routing_cost = 0.0;
    double facility_cost = 0.0;
    double total_cost = 0.0;
    int phases = 0;
    double wall_ms = 0.0;  // measurement only; never part of reports
};

struct MergeResult {
    Solution solution;
    int k = 0;
    double routing_cost = 0.0;
    double facility_cost = 0.0;
    double total_cost = 0.0;
    int phases = 0;
    std::vector<PhaseLogEntry> phase_log;
    std::vector<KSweepRow> sweep;  // one row per k tried
};

// Facility-cost wrapper: solve the k-median variant for every k in 1..|S|
// and return the k minimizing routing + k*B. Requires a common opening cost.
MergeResult solve_flcc_merge(const Instance& inst, std::uint64_t seed, int repeats,
                             int threads = 1);

}  // namespace congfac
