#include "congfac/equilibrium.hpp"

#include <stdexcept>

namespace congfac {

double potential(const Instance& inst, const EdgeFlow& flow) {
    double v = 0.0;
    for (int e = 0; e < inst.num_edges(); ++e)
        v += cost_integral(inst.edge(e).fn, flow.total[static_cast<std::size_t>(e)]);
    return v;
}

EquilibriumResult nash_flow(const Instance& inst, const std::vector<int>& facilities, double tol,
                            int max_iters) {
    if (!(tol > 0.0)) throw std::invalid_argument("nash_flow: tol must be positive");
    for (const auto& e : inst.edges())
        if (classify(e.fn, inst.total_demand()).kind != FnClassKind::NondecreasingLipschitz)
            throw std::invalid_argument(
                "nash_flow: requires nondecreasing Lipschitz cost functions on every edge");

    FlowSolveOptions options;
    options.gap_target = tol * inst.total_demand();
    options.max_outer = max_iters;
    FlowSolveResult sol = minimize_flow_objective(inst, facilities, FlowObjective::Potential,
                                                  options);

    EquilibriumResult result;
    result.assignment = std::move(sol.assignment);
    result.potential_value = sol.objective;
    result.iterations = sol.iterations;
    result.converged = sol.converged;
    result.gap = sol.gap;
    result.certified_eps = sol.gap / inst.min_source_demand();
    result.potential_trace = std::move(sol.objective_trace);
    return result;
}

double report_flsc_bound(double routing_cost, double facility_cost, double poa) {
    if (poa < 1.0) throw std::domain_error("report_flsc_bound: PoA must be at least 1");
    return poa * routing_cost + facility_cost;
}

}  // namespace congfac
