#include "congfac/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "congfac/oracle.hpp"
#include "congfac/rng.hpp"
#include "congfac/shortest_path.hpp"

namespace congfac {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double reduction_opening_cost(const CostDistanceInstance& cd) {
    double sum_c = 0.0, sum_l = 0.0, sum_w = 0.0;
    for (const auto& e : cd.edges) {
        sum_c += e.cost;
        sum_l += e.length;
    }
    for (const auto& s : cd.sources) sum_w += s.demand;
    // Routing upper bound: every edge built once plus all demand (sources and
    // the mirrored sink demand) traversing every length; +1 makes any second
    // facility strictly unprofitable.
    return sum_c + 2.0 * sum_w * sum_l + 1.0;
}

Instance reduce_cost_distance(const CostDistanceInstance& cd) {
    check_cost_distance(cd);

    // Feasibility: every source must connect to the sink.
    {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(cd.num_nodes));
        for (const auto& e : cd.edges) {
            adj[static_cast<std::size_t>(e.u)].push_back(e.v);
            adj[static_cast<std::size_t>(e.v)].push_back(e.u);
        }
        std::vector<char> seen(static_cast<std::size_t>(cd.num_nodes), 0);
        std::vector<int> stack{cd.sink};
        seen[static_cast<std::size_t>(cd.sink)] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adj[static_cast<std::size_t>(u)])
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    stack.push_back(v);
                }
        }
        for (const auto& s : cd.sources)
            if (!seen[static_cast<std::size_t>(s.node)])
                throw InfeasibleError("reduce_cost_distance: source " + std::to_string(s.node) +
                                      " is disconnected from the sink");
    }

    double min_w = kInf;
    double sum_w = 0.0;
    for (const auto& s : cd.sources) {
        min_w = std::min(min_w, s.demand);
        sum_w += s.demand;
    }

    std::vector<Edge> edges;
    for (const auto& e : cd.edges)
        edges.push_back({e.u, e.v, SharedFixedFn{e.cost, e.length, min_w}});

    // Sources of the FLCC instance: the Cost-Distance sources plus the sink
    // carrying the sum of all demands.
    std::vector<SourceDemand> sources;
    for (const auto& s : cd.sources)
        if (s.node != cd.sink) sources.push_back({s.node, s.demand});
    sources.push_back({cd.sink, sum_w});
    std::sort(sources.begin(), sources.end(),
              [](const SourceDemand& a, const SourceDemand& b) { return a.node < b.node; });

    FacilityCosts costs;
    costs.common = reduction_opening_cost(cd);
    return Instance(cd.name.empty() ? "reduced" : "reduced:" + cd.name, false, cd.num_nodes,
                    std::move(edges), std::move(sources), std::move(costs));
}

ExtractedCostDistance extract_cost_distance_solution(const Instance& reduced, const Solution& sol,
                                                     const CostDistanceInstance& cd) {
    if (sol.facilities.size() != 1)
        throw std::invalid_argument(
            "extract_cost_distance_solution: expected exactly one facility; the reduction's B "
            "is mis-sized otherwise");
    check_solution(reduced, sol);
    const int facility = sol.facilities.front();

    PathAssignment assignment = sol.assignment;
    if (facility != cd.sink) {
        // Relocate the facility onto the sink: reroute every other source
        // along its own path and then backwards along the sink's path.
        std::vector<int> sink_to_f;
        for (const PathFlow& p : assignment)
            if (p.source == cd.sink && !p.edges.empty()) sink_to_f = p.edges;
        PathAssignment moved;
        for (const PathFlow& p : assignment) {
            if (p.source == cd.sink) {
                moved.push_back(PathFlow{cd.sink, {}, p.amount});
                continue;
            }
            PathFlow q = p;
            for (auto it = sink_to_f.rbegin(); it != sink_to_f.rend(); ++it) q.edges.push_back(*it);
            moved.push_back(std::move(q));
        }
        assignment = std::move(moved);
    }

    EdgeFlow flow = edge_flow(reduced, assignment);
    ExtractedCostDistance result;
    std::vector<double> lengths(cd.edges.size(), kInf);
    for (std::size_t e = 0; e < cd.edges.size(); ++e)
        if (flow.total[e] > 0.0) {
            result.edges.push_back(static_cast<int>(e));
            result.cost += cd.edges[e].cost;
            lengths[e] = cd.edges[e].length;
        }

    // Demand-weighted shortest length-distances to the sink inside the
    // support subgraph (edges outside it keep infinite length).
    std::vector<double> dist = dijkstra(reduced, cd.sink, lengths);
    for (const auto& s : cd.sources) {
        if (s.node == cd.sink) continue;
        double d = dist[static_cast<std::size_t>(s.node)];
        if (!(d < kInf))
            throw InfeasibleError(
                "extract_cost_distance_solution: support subgraph disconnects source " +
                std::to_string(s.node));
        result.cost += s.demand * d;
    }
    return result;
}

Instance gen_local_search_gap(int k, int d, double eps_fac) {
    if (k < 2) throw std::invalid_argument("gen_local_search_gap: k must be at least 2");
    if (d < 1) throw std::invalid_argument("gen_local_search_gap: d must be at least 1");
    if (!(eps_fac > 0.0)) throw std::invalid_argument("gen_local_search_gap: eps must be positive");

    const int hub = 2 * k;
    const double hub_cost = std::pow(static_cast<double>(k - 1), static_cast<double>(d + 1));

    std::vector<Edge> edges;
    std::vector<SourceDemand> sources;
    PolynomialFn monomial;
    monomial.coeffs.assign(static_cast<std::size_t>(d + 1), 0.0);
    monomial.coeffs.back() = 1.0;  // l(x) = x^d
    for (int i = 0; i < k; ++i) {
        edges.push_back({i, k + i, ConstantFn{1.0}});
        edges.push_back({i, hub, monomial});
        sources.push_back({i, 1.0});
    }

    FacilityCosts costs;
    costs.per_node.assign(static_cast<std::size_t>(2 * k + 1), 0.0);
    // Sources never host facilities in the construction; price them out.
    const double prohibitive = 10.0 * (hub_cost + k);
    for (int i = 0; i < k; ++i) {
        costs.per_node[static_cast<std::size_t>(i)] = prohibitive;
        costs.per_node[static_cast<std::size_t>(k + i)] = eps_fac;
    }
    costs.per_node[static_cast<std::size_t>(hub)] = hub_cost;

    return Instance("local_gap_k" + std::to_string(k) + "_d" + std::to_string(d), false, 2 * k + 1,
                    std::move(edges), std::move(sources), std::move(costs));
}

LocalOptReport local_moves_check(const Instance& inst, const std::vector<int>& facilities) {
    if (facilities.empty())
        throw std::invalid_argument("local_moves_check: facility set must be nonempty");
    const double tol = 1e-9;

    // Exact unsplittable optimal rerouting per neighbor. (Splittable convex
    // rerouting would let the star instance shave cost by splitting demand
    // across the constant and x^d routes, destroying the locality gap the
    // checker exists to demonstrate.)
    auto evaluate = [&](const std::vector<int>& f) -> double {
        double cost = 0.0;
        for (int v : f) cost += inst.facility_cost(v);
        try {
            cost += min_routing_unsplittable(inst, f).cost;
        } catch (const InfeasibleError&) {
            return kInf;
        }
        return cost;
    };

    LocalOptReport report;
    report.current_cost = evaluate(facilities);
    if (report.current_cost == kInf)
        throw InfeasibleError("local_moves_check: facility set is infeasible");

    std::set<int> open(facilities.begin(), facilities.end());
    double best_cost = kInf;
    LocalMove best_move;

    auto consider = [&](const char* kind, int open_node, int close_node,
                        const std::vector<int>& f) {
        double c = evaluate(f);
        if (c < best_cost) {
            best_cost = c;
            best_move = LocalMove{kind, open_node, close_node, c};
        }
    };

    for (int v = 0; v < inst.num_nodes(); ++v) {
        if (open.count(v)) continue;
        std::vector<int> f(facilities);
        f.push_back(v);
        std::sort(f.begin(), f.end());
        consider("open", v, -1, f);
    }
    if (facilities.size() > 1) {
        for (int v : facilities) {
            std::vector<int> f;
            for (int u : facilities)
                if (u != v) f.push_back(u);
            consider("close", -1, v, f);
        }
    }
    for (int v : facilities) {
        for (int u = 0; u < inst.num_nodes(); ++u) {
            if (open.count(u)) continue;
            std::vector<int> f;
            for (int w : facilities)
                if (w != v) f.push_back(w);
            f.push_back(u);
            std::sort(f.begin(), f.end());
            consider("swap", u, v, f);
        }
    }

    report.is_local_opt = !(best_cost < report.current_cost - tol);
    report.best_move = best_move;
    return report;
}

FnFamily fn_family_from_name(const std::string& name) {
    if (name == "constant") return FnFamily::Constant;
    if (name == "affine") return FnFamily::Affine;
    if (name == "polynomial") return FnFamily::Polynomial;
    if (name == "shared_fixed") return FnFamily::SharedFixed;
    if (name == "power_share") return FnFamily::PowerShare;
    throw std::invalid_argument("unknown cost function family \"" + name + "\"");
}

Instance gen_random(const GenParams& params, std::uint64_t seed) {
    if (params.n < 2) throw std::invalid_argument("gen_random: need at least two nodes");
    if (params.m < params.n - 1)
        throw std::invalid_argument("gen_random: need at least n-1 edges for connectivity");
    const std::int64_t max_edges = static_cast<std::int64_t>(params.n) * (params.n - 1) /
                                   (params.directed ? 1 : 2);
    if (params.m > max_edges)
        throw std::invalid_argument("gen_random: too many edges for a simple graph");
    if (params.n_sources < 1 || params.n_sources > params.n)
        throw std::invalid_argument("gen_random: source count out of range");
    if (!(params.w_min > 0.0) || params.w_max < params.w_min)
        throw std::invalid_argument("gen_random: bad demand range");

    SplitMix64 rng(seed);

    // Sources first: node 0 always included so directed instances are usable
    // as single-source inputs rooted there.
    std::vector<int> nodes(static_cast<std::size_t>(params.n - 1));
    for (int v = 1; v < params.n; ++v) nodes[static_cast<std::size_t>(v - 1)] = v;
    for (std::size_t i = nodes.size(); i > 1; --i)
        std::swap(nodes[i - 1], nodes[rng.next_below(i)]);
    std::vector<SourceDemand> sources{{0, rng.next_in(params.w_min, params.w_max)}};
    for (int i = 1; i < params.n_sources; ++i)
        sources.push_back(
            {nodes[static_cast<std::size_t>(i - 1)], rng.next_in(params.w_min, params.w_max)});
    std::sort(sources.begin(), sources.end(),
              [](const SourceDemand& a, const SourceDemand& b) { return a.node < b.node; });
    double min_w = kInf;
    for (const auto& s : sources) min_w = std::min(min_w, s.demand);

    auto draw_fn = [&]() -> CostFn {
        auto coef = [&] { return rng.next_in(params.coef_min, params.coef_max); };
        switch (params.family) {
            case FnFamily::Constant: return ConstantFn{coef()};
            case FnFamily::Affine: return AffineFn{coef(), coef()};
            case FnFamily::Polynomial: {
                PolynomialFn p;
                p.coeffs = {coef(), coef(), coef()};
                return p;
            }
            case FnFamily::SharedFixed: return SharedFixedFn{coef(), coef(), min_w};
            default: return PowerShareFn{coef(), rng.next_in(0.3, 1.0), min_w};
        }
    };

    // Spanning structure: node v attaches to a random earlier node, arcs
    // pointing away from node 0 when directed (keeps everything reachable).
    std::set<std::pair<int, int>> used;
    std::vector<Edge> edges;
    for (int v = 1; v < params.n; ++v) {
        int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(v)));
        edges.push_back({u, v, draw_fn()});
        used.insert({u, v});
        if (!params.directed) used.insert({v, u});
    }
    while (static_cast<int>(edges.size()) < params.m) {
        int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(params.n)));
        int v = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(params.n)));
        if (u == v || used.count({u, v})) continue;
        edges.push_back({u, v, draw_fn()});
        used.insert({u, v});
        if (!params.directed) used.insert({v, u});
    }

    FacilityCosts costs;
    if (params.source_b >= 0.0) {
        costs.per_node.assign(static_cast<std::size_t>(params.n), params.common_b);
        for (const auto& s : sources)
            costs.per_node[static_cast<std::size_t>(s.node)] = params.source_b;
    } else {
        costs.common = params.common_b;
    }
    return Instance("random_seed" + std::to_string(seed), params.directed, params.n,
                    std::move(edges), std::move(sources), std::move(costs));
}

}  // namespace congfac
