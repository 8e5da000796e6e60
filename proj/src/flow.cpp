#include "congfac/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "congfac/shortest_path.hpp"
#include "json.hpp"

namespace congfac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

std::vector<int> path_nodes(const Instance& inst, const PathFlow& path) {
    if (path.source < 0 || path.source >= inst.num_nodes()) bad("path: source out of range");
    std::vector<int> nodes{path.source};
    int at = path.source;
    for (int e : path.edges) {
        if (e < 0 || e >= inst.num_edges()) bad("path: edge id out of range");
        const Edge& ed = inst.edge(e);
        if (ed.u == at) {
            at = ed.v;
        } else if (!inst.directed() && ed.v == at) {
            at = ed.u;
        } else {
            bad("path: edge " + std::to_string(e) + " does not continue from node " +
                std::to_string(at));
        }
        nodes.push_back(at);
    }
    return nodes;
}

EdgeFlow edge_flow(const Instance& inst, const PathAssignment& assignment) {
    EdgeFlow flow;
    const auto m = static_cast<std::size_t>(inst.num_edges());
    flow.total.assign(m, 0.0);
    flow.forward.assign(m, 0.0);
    flow.backward.assign(m, 0.0);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const PathFlow& p = assignment[i];
        if (!(p.amount > 0.0))
            bad("assignment entry " + std::to_string(i) + ": amount must be positive");
        int at = p.source;
        if (at < 0 || at >= inst.num_nodes())
            bad("assignment entry " + std::to_string(i) + ": source out of range");
        for (int e : p.edges) {
            if (e < 0 || e >= inst.num_edges())
                bad("assignment entry " + std::to_string(i) + ": edge id out of range");
            const Edge& ed = inst.edge(e);
            if (ed.u == at) {
                flow.forward[static_cast<std::size_t>(e)] += p.amount;
                at = ed.v;
            } else if (!inst.directed() && ed.v == at) {
                flow.backward[static_cast<std::size_t>(e)] += p.amount;
                at = ed.u;
            } else {
                bad("assignment entry " + std::to_string(i) + ": edge " + std::to_string(e) +
                    " does not continue from node " + std::to_string(at));
            }
        }
    }
    for (std::size_t e = 0; e < m; ++e) flow.total[e] = flow.forward[e] + flow.backward[e];
    return flow;
}

double routing_cost(const Instance& inst, const EdgeFlow& flow) {
    double cost = 0.0;
    for (int e = 0; e < inst.num_edges(); ++e)
        cost += eval_total(inst.edge(e).fn, flow.total[static_cast<std::size_t>(e)]);
    return cost;
}

void check_solution(const Instance& inst, const Solution& sol) {
    if (sol.facilities.empty()) throw InfeasibleError("solution opens no facility");
    std::vector<char> open(static_cast<std::size_t>(inst.num_nodes()), 0);
    for (std::size_t i = 0; i < sol.facilities.size(); ++i) {
        int f = sol.facilities[i];
        if (f < 0 || f >= inst.num_nodes()) bad("solution: facility id out of range");
        if (i > 0 && sol.facilities[i] <= sol.facilities[i - 1])
            bad("solution: facilities must be sorted and unique");
        open[static_cast<std::size_t>(f)] = 1;
    }
    std::vector<double> routed(static_cast<std::size_t>(inst.num_nodes()), 0.0);
    for (const PathFlow& p : sol.assignment) {
        std::vector<int> nodes = path_nodes(inst, p);
        if (!(p.amount > 0.0)) bad("solution: path amounts must be positive");
        if (!open[static_cast<std::size_t>(nodes.back())])
            throw InfeasibleError("solution: a path ends at node " + std::to_string(nodes.back()) +
                                  " which hosts no facility");
        routed[static_cast<std::size_t>(p.source)] += p.amount;
    }
    for (const auto& s : inst.sources()) {
        double got = routed[static_cast<std::size_t>(s.node)];
        if (std::abs(got - s.demand) > kCostTol * std::max(1.0, s.demand))
            throw InfeasibleError("solution routes " + std::to_string(got) + " of demand " +
                                  std::to_string(s.demand) + " for source " +
                                  std::to_string(s.node));
    }
}

double total_cost(const Instance& inst, const Solution& sol) {
    check_solution(inst, sol);
    double cost = routing_cost(inst, edge_flow(inst, sol.assignment));
    for (int f : sol.facilities) cost += inst.facility_cost(f);
    return cost;
}

namespace detail {

bool verify_loads_single_source(const Instance& inst, int source, std::span<const double> forward,
                                std::span<const double> backward,
                                const std::vector<char>& facility, double eps,
                                VerifyScratch& scratch, NashCertificate& cert, bool* not_a_dag) {
    const auto n = static_cast<std::size_t>(inst.num_nodes());
    const auto m = static_cast<std::size_t>(inst.num_edges());
    *not_a_dag = false;
    cert = NashCertificate{};

    scratch.lengths.assign(m, 0.0);
    for (std::size_t e = 0; e < m; ++e)
        scratch.lengths[e] = eval_cost(inst.edge(static_cast<int>(e)).fn, forward[e] + backward[e]);

    // Topological order of the flow-carrying arcs (Kahn).
    scratch.indegree.assign(n, 0);
    scratch.on_support.assign(n, 0);
    for (std::size_t e = 0; e < m; ++e) {
        const Edge& ed = inst.edge(static_cast<int>(e));
        if (forward[e] > 0.0) {
            ++scratch.indegree[static_cast<std::size_t>(ed.v)];
            scratch.on_support[static_cast<std::size_t>(ed.u)] = 1;
            scratch.on_support[static_cast<std::size_t>(ed.v)] = 1;
        }
        if (backward[e] > 0.0) {
            ++scratch.indegree[static_cast<std::size_t>(ed.u)];
            scratch.on_support[static_cast<std::size_t>(ed.u)] = 1;
            scratch.on_support[static_cast<std::size_t>(ed.v)] = 1;
        }
    }
    scratch.topo.clear();
    for (int v = 0; v < inst.num_nodes(); ++v)
        if (scratch.indegree[static_cast<std::size_t>(v)] == 0) scratch.topo.push_back(v);
    for (std::size_t head = 0; head < scratch.topo.size(); ++head) {
        int u = scratch.topo[head];
        for (const Arc& arc : inst.out_arcs(u)) {
            const Edge& ed = inst.edge(arc.edge);
            bool carries = (ed.u == u) ? forward[static_cast<std::size_t>(arc.edge)] > 0.0
                                       : backward[static_cast<std::size_t>(arc.edge)] > 0.0;
            if (!carries) continue;
            if (--scratch.indegree[static_cast<std::size_t>(arc.to)] == 0)
                scratch.topo.push_back(arc.to);
        }
    }
    if (scratch.topo.size() != n) {
        *not_a_dag = true;
        return false;
    }

    // Shortest (lo) and longest (hi) source->facility path costs on the DAG.
    scratch.lo.assign(n, kInf);
    scratch.hi.assign(n, -kInf);
    scratch.lo[static_cast<std::size_t>(source)] = 0.0;
    scratch.hi[static_cast<std::size_t>(source)] = 0.0;
    for (int u : scratch.topo) {
        if (scratch.lo[static_cast<std::size_t>(u)] == kInf) continue;
        for (const Arc& arc : inst.out_arcs(u)) {
            const Edge& ed = inst.edge(arc.edge);
            bool carries = (ed.u == u) ? forward[static_cast<std::size_t>(arc.edge)] > 0.0
                                       : backward[static_cast<std::size_t>(arc.edge)] > 0.0;
            if (!carries) continue;
            double len = scratch.lengths[static_cast<std::size_t>(arc.edge)];
            auto to = static_cast<std::size_t>(arc.to);
            scratch.lo[to] = std::min(scratch.lo[to], scratch.lo[static_cast<std::size_t>(u)] + len);
            scratch.hi[to] = std::max(scratch.hi[to], scratch.hi[static_cast<std::size_t>(u)] + len);
        }
    }
    double c_min = kInf;
    double c_max = -kInf;
    for (int v = 0; v < inst.num_nodes(); ++v) {
        if (!facility[static_cast<std::size_t>(v)]) continue;
        if (scratch.lo[static_cast<std::size_t>(v)] == kInf) continue;
        c_min = std::min(c_min, scratch.lo[static_cast<std::size_t>(v)]);
        c_max = std::max(c_max, scratch.hi[static_cast<std::size_t>(v)]);
    }
    if (c_min == kInf) return false;  // no facility reachable in the support

    cert.c_min = c_min;
    cert.c_max = c_max;

    // Cheapest alternative anywhere in the network.
    std::vector<double> dist = dijkstra(inst, source, scratch.lengths);
    double c_sp = kInf;
    for (int v = 0; v < inst.num_nodes(); ++v)
        if (facility[static_cast<std::size_t>(v)])
            c_sp = std::min(c_sp, dist[static_cast<std::size_t>(v)]);
    cert.c_sp = c_sp;

    cert.holds = (c_max - c_min <= eps + kCostTol) && (c_sp >= c_max - eps - kCostTol);
    return cert.holds;
}

}  // namespace detail

namespace {

// Witness reconstruction for the public verifier: regular DAG DP but with
// parent tracking, done at n^2-ish cost that does not matter outside hot loops.
void fill_witnesses(const Instance& inst, int source, const EdgeFlow& flow,
                    const std::vector<char>& facility, NashCertificate& cert,
                    const std::vector<double>& lengths, const std::vector<int>& topo) {
    const auto n = static_cast<std::size_t>(inst.num_nodes());
    std::vector<double> lo(n, kInf), hi(n, -kInf);
    std::vector<int> par_lo(n, -1), par_hi(n, -1);
    lo[static_cast<std::size_t>(source)] = 0.0;
    hi[static_cast<std::size_t>(source)] = 0.0;
    for (int u : topo) {
        if (lo[static_cast<std::size_t>(u)] == kInf) continue;
        for (const Arc& arc : inst.out_arcs(u)) {
            const Edge& ed = inst.edge(arc.edge);
            bool carries = (ed.u == u) ? flow.forward[static_cast<std::size_t>(arc.edge)] > 0.0
                                       : flow.backward[static_cast<std::size_t>(arc.edge)] > 0.0;
            if (!carries) continue;
            double len = lengths[static_cast<std::size_t>(arc.edge)];
            auto to = static_cast<std::size_t>(arc.to);
            if (lo[static_cast<std::size_t>(u)] + len < lo[to]) {
                lo[to] = lo[static_cast<std::size_t>(u)] + len;
                par_lo[to] = u;
            }
            if (hi[static_cast<std::size_t>(u)] + len > hi[to]) {
                hi[to] = hi[static_cast<std::size_t>(u)] + len;
                par_hi[to] = u;
            }
        }
    }
    auto walk_back = [&](int target, const std::vector<int>& par) {
        std::vector<int> nodes{target};
        while (target != source) {
            target = par[static_cast<std::size_t>(target)];
            nodes.push_back(target);
        }
        std::reverse(nodes.begin(), nodes.end());
        return nodes;
    };
    int best_min = -1, best_max = -1;
    for (int v = 0; v < inst.num_nodes(); ++v) {
        if (!facility[static_cast<std::size_t>(v)] || lo[static_cast<std::size_t>(v)] == kInf)
            continue;
        if (best_min < 0 || lo[static_cast<std::size_t>(v)] < lo[static_cast<std::size_t>(best_min)])
            best_min = v;
        if (best_max < 0 || hi[static_cast<std::size_t>(v)] > hi[static_cast<std::size_t>(best_max)])
            best_max = v;
    }
    if (best_min >= 0) cert.min_path = walk_back(best_min, par_lo);
    if (best_max >= 0) cert.max_path = walk_back(best_max, par_hi);

    std::vector<double> dist = dijkstra(inst, source, lengths);
    std::vector<int> targets;
    for (int v = 0; v < inst.num_nodes(); ++v)
        if (facility[static_cast<std::size_t>(v)]) targets.push_back(v);
    if (auto t = nearest_target(dist, targets)) {
        if (auto path = extract_shortest_path(inst, source, *t, lengths, dist))
            cert.sp_path = std::move(path->nodes);
    }
}

}  // namespace

NashCertificate verify_eps_nash(const Instance& inst, const Solution& sol, double eps) {
    if (inst.sources().size() != 1)
        bad("verify_eps_nash supports single-source instances only; use the exhaustive check");
    if (eps < 0.0) throw std::domain_error("verify_eps_nash: eps must be nonnegative");
    check_solution(inst, sol);

    EdgeFlow flow = edge_flow(inst, sol.assignment);
    std::vector<char> facility(static_cast<std::size_t>(inst.num_nodes()), 0);
    for (int f : sol.facilities) facility[static_cast<std::size_t>(f)] = 1;

    detail::VerifyScratch scratch;
    NashCertificate cert;
    bool not_a_dag = false;
    detail::verify_loads_single_source(inst, inst.sources().front().node, flow.forward,
                                       flow.backward, facility, eps, scratch, cert, &not_a_dag);
    if (not_a_dag)
        throw NotADagError("verify_eps_nash: the flow-carrying subgraph has a directed cycle");
    fill_witnesses(inst, inst.sources().front().node, flow, facility, cert, scratch.lengths,
                   scratch.topo);
    return cert;
}

bool verify_eps_nash_exhaustive(const Instance& inst, const Solution& sol, double eps,
                                std::size_t path_guard) {
    if (eps < 0.0) throw std::domain_error("verify_eps_nash_exhaustive: eps must be nonnegative");
    check_solution(inst, sol);
    EdgeFlow flow = edge_flow(inst, sol.assignment);
    std::vector<double> lengths(static_cast<std::size_t>(inst.num_edges()));
    for (int e = 0; e < inst.num_edges(); ++e)
        lengths[static_cast<std::size_t>(e)] =
            eval_cost(inst.edge(e).fn, flow.total[static_cast<std::size_t>(e)]);
    std::vector<char> facility(static_cast<std::size_t>(inst.num_nodes()), 0);
    for (int f : sol.facilities) facility[static_cast<std::size_t>(f)] = 1;

    std::size_t enumerated = 0;
    for (const auto& src : inst.sources()) {
        double min_all = kInf;
        double max_used = -kInf;
        std::vector<char> visited(static_cast<std::size_t>(inst.num_nodes()), 0);

        // DFS over simple paths; `carrying` tracks whether every edge so far
        // has positive flow, which is what makes a path count as used.
        auto dfs = [&](auto&& self, int u, double cost, bool carrying) -> void {
            if (facility[static_cast<std::size_t>(u)]) {
                if (++enumerated > path_guard)
                    throw std::runtime_error("verify_eps_nash_exhaustive: path guard exceeded");
                min_all = std::min(min_all, cost);
                if (carrying) max_used = std::max(max_used, cost);
            }
            visited[static_cast<std::size_t>(u)] = 1;
            for (const Arc& arc : inst.out_arcs(u)) {
                if (visited[static_cast<std::size_t>(arc.to)]) continue;
                self(self, arc.to, cost + lengths[static_cast<std::size_t>(arc.edge)],
                     carrying && flow.total[static_cast<std::size_t>(arc.edge)] > 0.0);
            }
            visited[static_cast<std::size_t>(u)] = 0;
        };
        dfs(dfs, src.node, 0.0, true);

        if (max_used == -kInf) continue;  // no used path for this source
        if (max_used > min_all + eps + kCostTol) return false;
    }
    return true;
}

std::vector<int> resolve_path_edges(const Instance& inst, const std::vector<int>& nodes) {
    std::vector<int> edges;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        int best = -1;
        for (const Arc& arc : inst.out_arcs(nodes[i])) {
            if (arc.to != nodes[i + 1]) continue;
            if (best < 0 || arc.edge < best) best = arc.edge;
        }
        if (best < 0)
            bad("path: no edge joins nodes " + std::to_string(nodes[i]) + " and " +
                std::to_string(nodes[i + 1]));
        edges.push_back(best);
    }
    return edges;
}

std::string solution_to_json(const Instance& inst, const Solution& sol) {
    nlohmann::ordered_json j;
    j["facilities"] = sol.facilities;
    j["paths"] = nlohmann::ordered_json::array();
    for (const PathFlow& p : sol.assignment) {
        nlohmann::ordered_json jp;
        jp["source"] = p.source;
        jp["nodes"] = path_nodes(inst, p);
        jp["amount"] = p.amount;
        j["paths"].push_back(std::move(jp));
    }
    return j.dump(2) + "\n";
}

Solution solution_from_json(const Instance& inst, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        bad(std::string("solution: invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("facilities") || !j.contains("paths"))
        bad("solution: expected {\"facilities\", \"paths\"}");
    for (const auto& item : j.items())
        if (item.key() != "facilities" && item.key() != "paths")
            bad("solution: unknown key \"" + item.key() + "\"");
    Solution sol;
    for (const auto& f : j.at("facilities")) sol.facilities.push_back(f.get<int>());
    std::sort(sol.facilities.begin(), sol.facilities.end());
    for (const auto& jp : j.at("paths")) {
        PathFlow p;
        p.source = jp.at("source").get<int>();
        std::vector<int> nodes;
        for (const auto& v : jp.at("nodes")) nodes.push_back(v.get<int>());
        if (nodes.empty() || nodes.front() != p.source)
            bad("solution: a path must start at its source");
        p.edges = resolve_path_edges(inst, nodes);
        p.amount = jp.at("amount").get<double>();
        sol.assignment.push_back(std::move(p));
    }
    return sol;
}

}  // namespace congfac
