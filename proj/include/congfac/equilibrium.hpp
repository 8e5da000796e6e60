#pragma once

#include <vector>

#include "congfac/convex_flow.hpp"
#include "congfac/flow.hpp"
#include "congfac/instance.hpp"

namespace congfac {

// Rosenthal-type potential sum_e int_0^{x_e} l_e(t) dt; its minimizers over
// feasible flows are exactly the Nash flows when every l_e is nondecreasing.
// Throws for instances with nonincreasing (good) edges: the potential is not
// convex there.
double potential(const Instance& inst, const EdgeFlow& flow);

struct EquilibriumResult {
    PathAssignment assignment;
    double certified_eps = 0.0;   // valid per-path optimality slack
    double potential_value = 0.0;
    int iterations = 0;
    bool converged = false;
    double gap = 0.0;
    std::vector<double> potential_trace;  // one entry per outer iteration
};

// Nash flow for a fixed facility set by conditional-gradient minimization of
// the potential; terminates when the duality gap falls below
// tol * total demand. certified_eps = gap / min_i w_i.
EquilibriumResult nash_flow(const Instance& inst, const std::vector<int>& facilities, double tol,
                            int max_iters = 10000);

// Analytic FLSC bound of the merge scheme: poa * routing + facilities.
// This is a bound, not a measurement; poa is supplied by the caller for the
// instance's cost-function class.
double report_flsc_bound(double routing_cost, double facility_cost, double poa);

}  // namespace congfac
