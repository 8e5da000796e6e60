#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "congfac/cost_distance.hpp"
#include "congfac/flow.hpp"
#include "congfac/instance.hpp"

namespace congfac {

// Exact brute-force solvers for desk-scale instances. These exist as ground
// truth for the approximation modules; every guard is an explicit constant
// surfaced in the error message so tests fail loudly instead of hanging.

inline constexpr std::size_t kPathProductGuard = 1000000;  // joint assignments
inline constexpr int kSubsetNodeGuard = 12;                // 2^n facility subsets
inline constexpr int kSubsetEdgeGuard = 20;                // 2^m cost-distance subsets

struct RoutingOracleResult {
    double cost = 0.0;
    PathAssignment assignment;
};

// Exact minimum over unsplittable routings (one simple path per source) by
// joint enumeration. Works for any cost family; this is the overall optimum
// only where single-path optima are guaranteed (good instances) or where the
// model itself is unsplittable.
RoutingOracleResult min_routing_unsplittable(const Instance& inst,
                                             const std::vector<int>& facilities);

// Exact minimum routing cost to the facilities F on an undirected good
// instance: demands are unsplittable there, so enumerate one simple path per
// source and take the best joint assignment.
RoutingOracleResult min_routing_fixed_F_good(const Instance& inst, const std::vector<int>& facilities);

// Socially optimal routing for nondecreasing instances (x*l(x) convex), by
// conditional gradient on marginal costs; duality gap <= tol.
RoutingOracleResult min_routing_fixed_F_convex(const Instance& inst,
                                               const std::vector<int>& facilities, double tol);

struct BruteForceResult {
    std::vector<int> facilities;
    double cost = 0.0;
    Solution solution;
    std::vector<std::string> warnings;  // skipped facility sets etc.
};

// Optimal FLCC solution: every nonempty facility subset, optimal routing per
// class (good -> enumeration, nondecreasing -> convex). Ties break toward
// fewer facilities, then lexicographically. The subset space is statically
// partitioned across threads with a deterministic min-reduction, so results
// do not depend on the thread count.
BruteForceResult brute_force_flcc(const Instance& inst, int threads = 1);

// Optimal FLSC solution: per facility subset, the Nash flow cost.
BruteForceResult brute_force_flsc(const Instance& inst, int threads = 1);

struct CostDistanceOracleResult {
    std::vector<int> edges;  // chosen edge ids
    double cost = 0.0;
};

CostDistanceOracleResult brute_force_cost_distance(const CostDistanceInstance& cd);

}  // namespace congfac
