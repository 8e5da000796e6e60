#include "congfac/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <queue>
#include <thread>

#include "congfac/convex_flow.hpp"
#include "congfac/equilibrium.hpp"
#include "congfac/shortest_path.hpp"

namespace congfac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All simple paths from `source` ending at any node of `facility` (as edge
// sequences, including the empty path when the source is itself open),
// enumerated depth-first over (neighbor, edge)-sorted arcs.
std::vector<std::vector<int>> simple_paths_to(const Instance& inst, int source,
                                              const std::vector<char>& facility,
                                              std::size_t guard) {
    std::vector<std::vector<int>> paths;
    std::vector<char> visited(static_cast<std::size_t>(inst.num_nodes()), 0);
    std::vector<int> edges;
    auto dfs = [&](auto&& self, int u) -> void {
        if (facility[static_cast<std::size_t>(u)]) {
            if (paths.size() >= guard)
                throw std::runtime_error(
                    "routing oracle: simple path enumeration exceeded guard of " +
                    std::to_string(guard));
            paths.push_back(edges);
        }
        visited[static_cast<std::size_t>(u)] = 1;
        for (const Arc& arc : inst.out_arcs(u)) {
            if (visited[static_cast<std::size_t>(arc.to)]) continue;
            edges.push_back(arc.edge);
            self(self, arc.to);
            edges.pop_back();
        }
        visited[static_cast<std::size_t>(u)] = 0;
    };
    dfs(dfs, source);
    return paths;
}

bool all_edges_good(const Instance& inst) {
    for (const auto& e : inst.edges())
        if (classify(e.fn, inst.total_demand()).kind != FnClassKind::Good) return false;
    return true;
}

bool all_edges_nondecreasing(const Instance& inst) {
    for (const auto& e : inst.edges())
        if (classify(e.fn, inst.total_demand()).kind != FnClassKind::NondecreasingLipschitz)
            return false;
    return true;
}

}  // namespace

RoutingOracleResult min_routing_unsplittable(const Instance& inst,
                                             const std::vector<int>& facilities) {
    if (facilities.empty()) throw InfeasibleError("routing oracle: empty facility set");
    std::vector<char> open(static_cast<std::size_t>(inst.num_nodes()), 0);
    for (int f : facilities) open[static_cast<std::size_t>(f)] = 1;

    const auto& sources = inst.sources();
    std::vector<std::vector<std::vector<int>>> choices;
    double combos = 1.0;
    for (const auto& s : sources) {
        choices.push_back(simple_paths_to(inst, s.node, open, kPathProductGuard));
        if (choices.back().empty())
            throw InfeasibleError("routing oracle: source " + std::to_string(s.node) +
                                  " cannot reach any facility");
        combos *= static_cast<double>(choices.back().size());
        if (combos > static_cast<double>(kPathProductGuard))
            throw std::runtime_error("routing oracle: joint assignment count exceeds guard of " +
                                     std::to_string(kPathProductGuard));
    }

    std::vector<double> load(static_cast<std::size_t>(inst.num_edges()), 0.0);
    std::vector<std::size_t> pick(sources.size(), 0);
    std::vector<std::size_t> best_pick;
    double best_cost = kInf;

    auto recurse = [&](auto&& self, std::size_t i) -> void {
        if (i == sources.size()) {
            double cost = 0.0;
            // Incremental add/remove can leave loads a few ulp below zero.
            for (int e = 0; e < inst.num_edges(); ++e)
                cost += eval_total(inst.edge(e).fn,
                                   std::max(0.0, load[static_cast<std::size_t>(e)]));
            if (cost < best_cost) {
                best_cost = cost;
                best_pick = pick;
            }
            return;
        }
        for (std::size_t j = 0; j < choices[i].size(); ++j) {
            pick[i] = j;
            for (int e : choices[i][j]) load[static_cast<std::size_t>(e)] += sources[i].demand;
            self(self, i + 1);
            for (int e : choices[i][j]) load[static_cast<std::size_t>(e)] -= sources[i].demand;
        }
    };
    recurse(recurse, 0);

    RoutingOracleResult result;
    result.cost = best_cost;
    for (std::size_t i = 0; i < sources.size(); ++i)
        result.assignment.push_back(
            PathFlow{sources[i].node, choices[i][best_pick[i]], sources[i].demand});
    return result;
}

RoutingOracleResult min_routing_fixed_F_good(const Instance& inst,
                                             const std::vector<int>& facilities) {
    if (inst.directed())
        throw std::invalid_argument("good routing oracle: instance must be undirected");
    if (!all_edges_good(inst))
        throw std::invalid_argument("good routing oracle: requires good cost functions");
    return min_routing_unsplittable(inst, facilities);
}

RoutingOracleResult min_routing_fixed_F_convex(const Instance& inst,
                                               const std::vector<int>& facilities, double tol) {
    if (!all_edges_nondecreasing(inst))
        throw std::invalid_argument(
            "convex routing oracle: requires nondecreasing Lipschitz cost functions");
    FlowSolveOptions options;
    options.gap_target = tol;
    FlowSolveResult sol =
        minimize_flow_objective(inst, facilities, FlowObjective::RoutingCost, options);
    return {sol.objective, std::move(sol.assignment)};
}

namespace {

// Shared facility-subset driver for the two brute-force solvers. Subsets are
// statically partitioned across threads; each worker keeps a local incumbent
// and the final reduction picks by (cost, facility count, lexicographic set).
template <typename EvalF>
BruteForceResult subset_search(const Instance& inst, int threads, EvalF&& evaluate) {
    if (inst.num_nodes() > kSubsetNodeGuard)
        throw std::runtime_error("brute force: instance exceeds the " +
                                 std::to_string(kSubsetNodeGuard) + "-node subset guard");

    // reach_mask[s] = nodes reachable from source s; a facility set is
    // feasible iff it intersects every source's mask.
    std::vector<std::uint32_t> reach_masks;
    for (const auto& s : inst.sources()) {
        std::uint32_t mask = 0;
        std::vector<int> stack{s.node};
        mask |= 1u << s.node;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (const Arc& arc : inst.out_arcs(u))
                if (!(mask & (1u << arc.to))) {
                    mask |= 1u << arc.to;
                    stack.push_back(arc.to);
                }
        }
        reach_masks.push_back(mask);
    }

    const int n = inst.num_nodes();

    // Visit subsets so that the first strict improvement realizes the
    // documented tie-break: fewest facilities, then lexicographic node list.
    std::vector<std::pair<std::vector<int>, std::uint32_t>> subsets;
    for (std::uint32_t f = 1; f < (1u << n); ++f) {
        std::vector<int> nodes;
        for (int v = 0; v < n; ++v)
            if (f & (1u << v)) nodes.push_back(v);
        subsets.emplace_back(std::move(nodes), f);
    }
    std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
        return a.first.size() != b.first.size() ? a.first.size() < b.first.size()
                                                : a.first < b.first;
    });

    const int pool = std::max(1, threads);
    std::vector<BruteForceResult> local(static_cast<std::size_t>(pool));
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&](int worker_id) {
        BruteForceResult& best = local[static_cast<std::size_t>(worker_id)];
        best.cost = kInf;
        try {
            for (std::size_t i = static_cast<std::size_t>(worker_id); i < subsets.size();
                 i += static_cast<std::size_t>(pool)) {
                const auto& [facilities, f] = subsets[i];
                bool feasible = true;
                for (std::uint32_t mask : reach_masks) feasible = feasible && (mask & f);
                if (!feasible) continue;

                double opening = 0.0;
                for (int v : facilities) opening += inst.facility_cost(v);
                if (opening >= best.cost) continue;  // routing cost is nonnegative

                RoutingOracleResult routed;
                if (!evaluate(facilities, routed, best.warnings)) continue;
                double cost = routed.cost + opening;
                if (cost < best.cost) {
                    best.cost = cost;
                    best.facilities = facilities;
                    best.solution = Solution{facilities, std::move(routed.assignment)};
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };

    if (pool == 1) {
        worker(0);
    } else {
        std::vector<std::thread> ts;
        for (int t = 0; t < pool; ++t) ts.emplace_back(worker, t);
        for (auto& th : ts) th.join();
    }
    if (error) std::rethrow_exception(error);

    BruteForceResult best;
    best.cost = kInf;
    for (BruteForceResult& cand : local) {
        best.warnings.insert(best.warnings.end(), cand.warnings.begin(), cand.warnings.end());
        if (cand.cost == kInf) continue;
        bool better = cand.cost < best.cost ||
                      (cand.cost == best.cost &&
                       (cand.facilities.size() < best.facilities.size() ||
                        (cand.facilities.size() == best.facilities.size() &&
                         cand.facilities < best.facilities)));
        if (best.cost == kInf || better) {
            best.cost = cand.cost;
            best.facilities = cand.facilities;
            best.solution = std::move(cand.solution);
        }
    }
    std::sort(best.warnings.begin(), best.warnings.end());
    if (best.cost == kInf) throw InfeasibleError("brute force: no feasible facility set");
    return best;
}

}  // namespace

BruteForceResult brute_force_flcc(const Instance& inst, int threads) {
    bool good = all_edges_good(inst);
    if (!good && !all_edges_nondecreasing(inst))
        throw std::invalid_argument("brute_force_flcc: mixed cost-function classes are unsupported");
    return subset_search(inst, threads,
                         [&](const std::vector<int>& facilities, RoutingOracleResult& out,
                             std::vector<std::string>&) {
        out = good ? min_routing_fixed_F_good(inst, facilities)
                   : min_routing_fixed_F_convex(inst, facilities, 1e-9);
        return true;
    });
}

BruteForceResult brute_force_flsc(const Instance& inst, int threads) {
    if (!all_edges_nondecreasing(inst))
        throw std::invalid_argument(
            "brute_force_flsc: requires nondecreasing Lipschitz cost functions");
    return subset_search(inst, threads,
                         [&](const std::vector<int>& facilities, RoutingOracleResult& out,
                             std::vector<std::string>& warnings) {
        EquilibriumResult eq = nash_flow(inst, facilities, 1e-8);
        if (!eq.converged) {
            std::string fs;
            for (int f : facilities) fs += (fs.empty() ? "" : ",") + std::to_string(f);
            warnings.push_back("skipped facility set {" + fs + "}: equilibrium did not converge");
            return false;
        }
        out.assignment = std::move(eq.assignment);
        out.cost = routing_cost(inst, edge_flow(inst, out.assignment));
        return true;
    });
}

CostDistanceOracleResult brute_force_cost_distance(const CostDistanceInstance& cd) {
    check_cost_distance(cd);
    const int m = static_cast<int>(cd.edges.size());
    if (m > kSubsetEdgeGuard)
        throw std::runtime_error("cost-distance brute force: instance exceeds the " +
                                 std::to_string(kSubsetEdgeGuard) + "-edge subset guard");

    const auto n = static_cast<std::size_t>(cd.num_nodes);
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge id)
    for (int e = 0; e < m; ++e) {
        adj[static_cast<std::size_t>(cd.edges[static_cast<std::size_t>(e)].u)].push_back(
            {cd.edges[static_cast<std::size_t>(e)].v, e});
        adj[static_cast<std::size_t>(cd.edges[static_cast<std::size_t>(e)].v)].push_back(
            {cd.edges[static_cast<std::size_t>(e)].u, e});
    }

    CostDistanceOracleResult best;
    best.cost = kInf;
    std::uint32_t best_mask = 0;

    std::vector<double> dist(n);
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        // Dijkstra from the sink over the chosen edges under the lengths.
        std::fill(dist.begin(), dist.end(), kInf);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[static_cast<std::size_t>(cd.sink)] = 0.0;
        heap.emplace(0.0, cd.sink);
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[static_cast<std::size_t>(u)]) continue;
            for (auto [to, e] : adj[static_cast<std::size_t>(u)]) {
                if (!(mask & (1u << e))) continue;
                double nd = d + cd.edges[static_cast<std::size_t>(e)].length;
                if (nd < dist[static_cast<std::size_t>(to)]) {
                    dist[static_cast<std::size_t>(to)] = nd;
                    heap.emplace(nd, to);
                }
            }
        }
        double cost = 0.0;
        for (int e = 0; e < m; ++e)
            if (mask & (1u << e)) cost += cd.edges[static_cast<std::size_t>(e)].cost;
        bool feasible = true;
        for (const auto& s : cd.sources) {
            double d = dist[static_cast<std::size_t>(s.node)];
            if (!(d < kInf)) {
                feasible = false;
                break;
            }
            cost += s.demand * d;
        }
        if (feasible && cost < best.cost) {
            best.cost = cost;
            best_mask = mask;
        }
    }
    if (best.cost == kInf)
        throw InfeasibleError("cost-distance brute force: sources cannot all reach the sink");
    for (int e = 0; e < m; ++e)
        if (best_mask & (1u << e)) best.edges.push_back(e);
    return best;
}

}  // namespace congfac
