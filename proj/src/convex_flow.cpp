#include "congfac/convex_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "congfac/shortest_path.hpp"

namespace congfac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SourcePaths {
    int node = -1;
    double demand = 0.0;
    std::vector<std::vector<int>> paths;  // edge sequences
    std::vector<double> amounts;
    std::map<std::vector<int>, std::size_t> index;
};

double edge_length(const Instance& inst, FlowObjective obj, int e, double load) {
    if (load < 0.0) load = 0.0;  // blend arithmetic may undershoot by ulps
    return obj == FlowObjective::Potential ? eval_cost(inst.edge(e).fn, load)
                                           : marginal_total(inst.edge(e).fn, load);
}

double objective_value(const Instance& inst, FlowObjective obj, const std::vector<double>& load) {
    double v = 0.0;
    for (int e = 0; e < inst.num_edges(); ++e) {
        double x = std::max(0.0, load[static_cast<std::size_t>(e)]);
        v += obj == FlowObjective::Potential ? cost_integral(inst.edge(e).fn, x)
                                             : eval_total(inst.edge(e).fn, x);
    }
    return v;
}

double path_length(const std::vector<int>& path, const std::vector<double>& lengths) {
    double v = 0.0;
    for (int e : path) v += lengths[static_cast<std::size_t>(e)];
    return v;
}

void apply_load(std::vector<double>& load, const std::vector<int>& path, double delta) {
    for (int e : path) load[static_cast<std::size_t>(e)] += delta;
}

// Exact line search for moving `delta` in [0, limit] units from path `from`
// to path `to`: the 1-D objective is convex, so bisect its derivative.
double transfer_step(const Instance& inst, FlowObjective obj, const std::vector<double>& load,
                     const std::vector<int>& from, const std::vector<int>& to, double limit) {
    // Net per-edge multiplicity of the move (paths may share edges).
    std::map<int, int> delta_dir;
    for (int e : to) ++delta_dir[e];
    for (int e : from) --delta_dir[e];
    auto derivative = [&](double t) {
        double d = 0.0;
        for (auto [e, dir] : delta_dir) {
            if (dir == 0) continue;
            double x = load[static_cast<std::size_t>(e)] + t * dir;
            d += dir * edge_length(inst, obj, e, std::max(0.0, x));
        }
        return d;
    };
    if (derivative(0.0) >= 0.0) return 0.0;
    if (derivative(limit) <= 0.0) return limit;
    double lo = 0.0, hi = limit;
    for (int it = 0; it < 100 && hi - lo > 1e-12 * std::max(1.0, limit); ++it) {
        double mid = 0.5 * (lo + hi);
        (derivative(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

FlowSolveResult minimize_flow_objective(const Instance& inst, const std::vector<int>& facilities,
                                        FlowObjective objective, const FlowSolveOptions& options) {
    if (facilities.empty()) throw InfeasibleError("flow solve: empty facility set");
    const auto m = static_cast<std::size_t>(inst.num_edges());

    std::vector<char> is_facility(static_cast<std::size_t>(inst.num_nodes()), 0);
    for (int f : facilities) is_facility[static_cast<std::size_t>(f)] = 1;

    std::vector<SourcePaths> srcs;
    for (const auto& s : inst.sources()) srcs.push_back({s.node, s.demand, {}, {}, {}});

    std::vector<double> load(m, 0.0);
    std::vector<double> lengths(m, 0.0);

    auto add_path = [&](SourcePaths& sp, std::vector<int> path, double amount) {
        auto it = sp.index.find(path);
        if (it == sp.index.end()) {
            sp.index.emplace(path, sp.paths.size());
            sp.paths.push_back(std::move(path));
            sp.amounts.push_back(amount);
        } else {
            sp.amounts[it->second] += amount;
        }
    };

    auto shortest_to_facility = [&](int node) -> PathResult {
        std::vector<double> dist = dijkstra(inst, node, lengths);
        PathResult best;
        bool found = false;
        for (int f : facilities) {
            if (!(dist[static_cast<std::size_t>(f)] < kInf)) continue;
            if (!found || dist[static_cast<std::size_t>(f)] < best.dist ||
                (dist[static_cast<std::size_t>(f)] == best.dist && f < best.nodes.back())) {
                auto path = extract_shortest_path(inst, node, f, lengths, dist);
                best = std::move(*path);
                found = true;
            }
        }
        if (!found)
            throw InfeasibleError("flow solve: source " + std::to_string(node) +
                                  " cannot reach any facility");
        return best;
    };

    FlowSolveResult result;

    // Initial all-or-nothing assignment at zero load.
    for (std::size_t e = 0; e < m; ++e)
        lengths[e] = edge_length(inst, objective, static_cast<int>(e), 0.0);
    for (auto& sp : srcs) {
        PathResult p = shortest_to_facility(sp.node);
        add_path(sp, p.edges, sp.demand);
        apply_load(load, p.edges, sp.demand);
    }

    auto duality_gap = [&](std::vector<PathResult>* aon_out) {
        for (std::size_t e = 0; e < m; ++e)
            lengths[e] = edge_length(inst, objective, static_cast<int>(e), load[e]);
        double gap = 0.0;
        for (std::size_t i = 0; i < srcs.size(); ++i) {
            PathResult aon = shortest_to_facility(srcs[i].node);
            double used_cost = 0.0;
            for (std::size_t j = 0; j < srcs[i].paths.size(); ++j)
                used_cost += srcs[i].amounts[j] * path_length(srcs[i].paths[j], lengths);
            gap += std::max(0.0, used_cost - srcs[i].demand * aon.dist);
            if (aon_out) (*aon_out)[i] = std::move(aon);
        }
        return gap;
    };

    for (int outer = 0; outer < options.max_outer; ++outer) {
        result.iterations = outer + 1;

        // Column generation + duality gap at the current point.
        std::vector<PathResult> aon(srcs.size());
        result.gap = duality_gap(&aon);
        if (result.gap <= options.gap_target) {
            result.converged = true;
            result.objective_trace.push_back(objective_value(inst, objective, load));
            break;
        }

        // Classic Frank-Wolfe step toward the all-or-nothing flow, with exact
        // line search on the blend factor.
        {
            std::vector<double> target(m, 0.0);
            for (std::size_t i = 0; i < srcs.size(); ++i)
                apply_load(target, aon[i].edges, srcs[i].demand);
            auto derivative = [&](double t) {
                double d = 0.0;
                for (std::size_t e = 0; e < m; ++e) {
                    double diff = target[e] - load[e];
                    if (diff == 0.0) continue;
                    d += diff * edge_length(inst, objective, static_cast<int>(e),
                                            load[e] + t * diff);
                }
                return d;
            };
            double step = 1.0;
            if (derivative(1.0) > 0.0) {
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (derivative(mid) < 0.0 ? lo : hi) = mid;
                }
                step = 0.5 * (lo + hi);
            }
            if (step > 0.0) {
                for (auto& sp : srcs)
                    for (double& a : sp.amounts) a *= 1.0 - step;
                for (std::size_t i = 0; i < srcs.size(); ++i)
                    add_path(srcs[i], aon[i].edges, step * srcs[i].demand);
                for (std::size_t e = 0; e < m; ++e)
                    load[e] += step * (target[e] - load[e]);
            }
        }

        // Restricted-master refinement: equalize path costs within each
        // source's active set by pairwise transfers. This is what makes tight
        // gap targets reachable; plain Frank-Wolfe stalls at O(1/t).
        for (int pass = 0; pass < options.max_inner_passes; ++pass) {
            bool moved = false;
            for (auto& sp : srcs) {
                for (std::size_t e = 0; e < m; ++e)
                    lengths[e] = edge_length(inst, objective, static_cast<int>(e), load[e]);
                std::size_t worst = sp.paths.size(), best = sp.paths.size();
                double worst_cost = -kInf, best_cost = kInf;
                for (std::size_t j = 0; j < sp.paths.size(); ++j) {
                    double c = path_length(sp.paths[j], lengths);
                    if (sp.amounts[j] > 0.0 && c > worst_cost) {
                        worst_cost = c;
                        worst = j;
                    }
                    if (c < best_cost) {
                        best_cost = c;
                        best = j;
                    }
                }
                if (worst == sp.paths.size() || best == worst) continue;
                if (worst_cost - best_cost <= 1e-13 * std::max(1.0, worst_cost)) continue;
                double delta = transfer_step(inst, objective, load, sp.paths[worst],
                                             sp.paths[best], sp.amounts[worst]);
                if (delta <= 0.0) continue;
                apply_load(load, sp.paths[worst], -delta);
                apply_load(load, sp.paths[best], delta);
                sp.amounts[worst] -= delta;
                sp.amounts[best] += delta;
                moved = true;
            }
            if (!moved) break;
        }

        result.objective_trace.push_back(objective_value(inst, objective, load));
    }

    if (!result.converged) result.gap = duality_gap(nullptr);

    // Drop dust paths and rescale per source so amounts sum exactly to the
    // demand again.
    result.assignment.clear();
    for (auto& sp : srcs) {
        double kept = 0.0;
        for (std::size_t j = 0; j < sp.paths.size(); ++j)
            if (sp.amounts[j] > 1e-12 * sp.demand) kept += sp.amounts[j];
        for (std::size_t j = 0; j < sp.paths.size(); ++j) {
            if (sp.amounts[j] <= 1e-12 * sp.demand) continue;
            result.assignment.push_back(
                PathFlow{sp.node, sp.paths[j], sp.amounts[j] * (sp.demand / kept)});
        }
    }
    result.flow = edge_flow(inst, result.assignment);
    result.objective = objective_value(inst, objective, result.flow.total);
    return result;
}

}  // namespace congfac
