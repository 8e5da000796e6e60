#pragma once

#include <vector>

#include "congfac/flow.hpp"
#include "congfac/instance.hpp"

namespace congfac {

// Which separable convex functional of the edge loads to minimize over
// feasible flows into a facility set.
enum class FlowObjective {
    Potential,    // sum_e int_0^{x_e} l_e(t) dt  -> minimizers are Nash flows
    RoutingCost,  // sum_e x_e * l_e(x_e)         -> socially optimal routing
};

struct FlowSolveOptions {
    double gap_target = 1e-8;  // absolute Frank-Wolfe duality gap to reach
    int max_outer = 10000;
    int max_inner_passes = 64;
};

struct FlowSolveResult {
    PathAssignment assignment;
    EdgeFlow flow;
    double objective = 0.0;
    double gap = 0.0;       // final duality gap (>= 0)
    int iterations = 0;     // outer iterations run
    bool converged = false;
    std::vector<double> objective_trace;  // objective after each outer iteration
};

// Conditional-gradient minimization with restricted-master refinement: the
// linear subproblem is a shortest path to the nearest facility, steps use
// exact bisection line search, and after each column generation the flow is
// re-equilibrated over the paths found so far (pairwise transfers, also by
// bisection). Requires all edges NondecreasingLipschitz.
// Throws InfeasibleError when a source cannot reach any facility.
FlowSolveResult minimize_flow_objective(const Instance& inst, const std::vector<int>& facilities,
                                        FlowObjective objective, const FlowSolveOptions& options);

}  // namespace congfac
