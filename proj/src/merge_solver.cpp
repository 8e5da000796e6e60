#include "congfac/merge_solver.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "congfac/shortest_path.hpp"

namespace congfac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CachedDijkstra {
    std::vector<double> lengths;
    std::vector<double> dist;
};

// Dijkstra results per (node, weight), shared across the pairs of a phase:
// on near-uniform weights most pairs reuse the same few searches.
class DijkstraCache {
public:
    explicit DijkstraCache(const Instance& inst) : inst_(inst) {}

    const CachedDijkstra& get(int node, double weight) {
        std::uint64_t bits;
        std::memcpy(&bits, &weight, sizeof bits);
        auto [it, inserted] = cache_.try_emplace({node, bits});
        if (inserted) {
            it->second.lengths.resize(static_cast<std::size_t>(inst_.num_edges()));
            for (int e = 0; e < inst_.num_edges(); ++e)
                it->second.lengths[static_cast<std::size_t>(e)] =
                    eval_total(inst_.edge(e).fn, weight);
            it->second.dist = dijkstra(inst_, node, it->second.lengths);
        }
        return it->second;
    }

    GMetricResult path(int from, double weight, int to) {
        const CachedDijkstra& d = get(from, weight);
        auto p = extract_shortest_path(inst_, from, to, d.lengths, d.dist);
        if (!p) return {kInf, {}, {}};
        return {p->dist, std::move(p->nodes), std::move(p->edges)};
    }

private:
    const Instance& inst_;
    std::map<std::pair<int, std::uint64_t>, CachedDijkstra> cache_;
};

GMetricResult reversed(GMetricResult g) {
    std::reverse(g.nodes.begin(), g.nodes.end());
    std::reverse(g.edges.begin(), g.edges.end());
    return g;
}

// Best meeting point for a pair given the four distance arrays.
std::pair<double, int> best_meeting(const std::vector<double>& du_wu,
                                    const std::vector<double>& dv_wv,
                                    const std::vector<double>& du_combined,
                                    const std::vector<double>& dv_combined, double wu, double wv) {
    const double pu = wu / (wu + wv);
    const double pv = wv / (wu + wv);
    double best = kInf;
    int best_z = -1;
    for (std::size_t z = 0; z < du_wu.size(); ++z) {
        double k = du_wu[z] + dv_wv[z] + pu * du_combined[z] + pv * dv_combined[z];
        if (k < best) {
            best = k;
            best_z = static_cast<int>(z);
        }
    }
    return {best, best_z};
}

void require_undirected_good(const Instance& inst, const char* who) {
    if (inst.directed())
        throw std::invalid_argument(std::string(who) + ": requires an undirected instance");
    for (const auto& e : inst.edges())
        if (classify(e.fn, inst.total_demand()).kind != FnClassKind::Good)
            throw std::invalid_argument(std::string(who) +
                                        ": requires good cost functions on every edge");
}

}  // namespace

GMetricResult g_metric(const Instance& inst, int u, int v, double w) {
    if (!(w > 0.0)) throw std::invalid_argument("g_metric: weight must be positive");
    DijkstraCache cache(inst);
    return cache.path(u, w, v);
}

PairCost pair_cost_K(const Instance& inst, int u, double wu, int v, double wv) {
    if (!(wu > 0.0) || !(wv > 0.0))
        throw std::invalid_argument("pair_cost_K: weights must be positive");
    DijkstraCache cache(inst);
    const double combined = wu + wv;
    const auto& du_wu = cache.get(u, wu).dist;
    const auto& dv_wv = cache.get(v, wv).dist;
    const auto& du_c = cache.get(u, combined).dist;
    const auto& dv_c = cache.get(v, combined).dist;

    PairCost result;
    auto [k, z] = best_meeting(du_wu, dv_wv, du_c, dv_c, wu, wv);
    result.k_cost = k;
    result.meeting = z;
    if (k == kInf) return result;  // different components
    result.u_to_meeting = cache.path(u, wu, z);
    result.v_to_meeting = cache.path(v, wv, z);
    result.meeting_to_u = reversed(cache.path(u, combined, z));
    result.meeting_to_v = reversed(cache.path(v, combined, z));
    return result;
}

MatchResult constrained_matching(const std::vector<std::vector<double>>& costs,
                                 int target_unmatched) {
    const int n = static_cast<int>(costs.size());
    if (target_unmatched < 0)
        throw std::invalid_argument("constrained_matching: negative unmatched target");
    if (n <= target_unmatched)
        throw std::invalid_argument("constrained_matching: need more nodes than unmatched target");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(costs[static_cast<std::size_t>(i)].size()) != n)
            throw std::invalid_argument("constrained_matching: cost matrix must be square");
        for (int j = 0; j < n; ++j) {
            double cij = costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (i != j && cij < 0.0)
                throw std::invalid_argument("constrained_matching: negative cost");
            if (cij != costs[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
                throw std::invalid_argument("constrained_matching: cost matrix must be symmetric");
        }
    }
    auto cost_at = [&](int i, int j) {
        return costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    };

    MatchResult result;
    const int n_pairs = (n - target_unmatched) / 2;

    if (n_pairs == 0) {
        // Zero-cardinality matching would stall the phase loop; match the
        // single globally cheapest pair instead.
        int bi = 0, bj = 1;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (cost_at(i, j) < cost_at(bi, bj)) {
                    bi = i;
                    bj = j;
                }
        result.pairs.emplace_back(bi, bj);
        result.forced_pair = true;
        for (int i = 0; i < n; ++i)
            if (i != bi && i != bj) result.unmatched.push_back(i);
        return result;
    }

    if (n <= kExactMatchingLimit) {
        // dp[mask] = min cost of perfectly matching the nodes in mask.
        const std::uint32_t full = (1u << n) - 1;
        std::vector<double> dp(static_cast<std::size_t>(full) + 1, kInf);
        dp[0] = 0.0;
        for (std::uint32_t mask = 1; mask <= full; ++mask) {
            if (std::popcount(mask) % 2) continue;
            int i = std::countr_zero(mask);
            std::uint32_t rest = mask ^ (1u << i);
            double best = kInf;
            for (std::uint32_t bits = rest; bits; bits &= bits - 1) {
                int j = std::countr_zero(bits);
                double c = cost_at(i, j) + dp[rest ^ (1u << j)];
                if (c < best) best = c;
            }
            dp[mask] = best;
        }
        std::uint32_t best_mask = 0;
        double best_cost = kInf;
        for (std::uint32_t mask = 0; mask <= full; ++mask) {
            if (std::popcount(mask) != 2 * n_pairs) continue;
            if (dp[mask] < best_cost) {
                best_cost = dp[mask];
                best_mask = mask;
            }
        }
        if (best_cost == kInf)
            throw InfeasibleError("constrained_matching: no finite matching of the required size");
        std::uint32_t mask = best_mask;
        while (mask) {
            int i = std::countr_zero(mask);
            std::uint32_t rest = mask ^ (1u << i);
            for (std::uint32_t bits = rest; bits; bits &= bits - 1) {
                int j = std::countr_zero(bits);
                if (cost_at(i, j) + dp[rest ^ (1u << j)] == dp[mask]) {
                    result.pairs.emplace_back(i, j);
                    mask = rest ^ (1u << j);
                    break;
                }
            }
        }
        for (int i = 0; i < n; ++i)
            if (!(best_mask & (1u << i))) result.unmatched.push_back(i);
    } else {
        // Greedy heuristic: repeatedly take the globally cheapest free pair.
        result.exact = false;
        std::vector<std::tuple<double, int, int>> candidates;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) candidates.emplace_back(cost_at(i, j), i, j);
        std::sort(candidates.begin(), candidates.end());
        std::vector<char> taken(static_cast<std::size_t>(n), 0);
        for (const auto& [c, i, j] : candidates) {
            if (static_cast<int>(result.pairs.size()) == n_pairs) break;
            if (taken[static_cast<std::size_t>(i)] || taken[static_cast<std::size_t>(j)]) continue;
            taken[static_cast<std::size_t>(i)] = taken[static_cast<std::size_t>(j)] = 1;
            result.pairs.emplace_back(i, j);
        }
        for (int i = 0; i < n; ++i)
            if (!taken[static_cast<std::size_t>(i)]) result.unmatched.push_back(i);
    }
    std::sort(result.pairs.begin(), result.pairs.end());
    return result;
}

PhaseState init_phase_state(const Instance& inst) {
    PhaseState state;
    for (std::size_t i = 0; i < inst.sources().size(); ++i)
        state.active.push_back(
            {inst.sources()[i].node, inst.sources()[i].demand, {static_cast<int>(i)}});
    std::sort(state.active.begin(), state.active.end(),
              [](const ActiveDemand& a, const ActiveDemand& b) { return a.node < b.node; });
    state.source_walks.assign(inst.sources().size(), {});
    return state;
}

PhaseState run_phase(const Instance& inst, const PhaseState& state, int k, SplitMix64& rng,
                     PhaseLogEntry* log) {
    require_undirected_good(inst, "run_phase");
    const int n_active = static_cast<int>(state.active.size());
    if (n_active <= k)
        throw std::invalid_argument("run_phase: nothing to merge, active count is at most k");

    DijkstraCache cache(inst);

    // Pairwise K costs and meeting points.
    std::vector<std::vector<double>> k_cost(
        static_cast<std::size_t>(n_active),
        std::vector<double>(static_cast<std::size_t>(n_active), 0.0));
    std::vector<std::vector<int>> meeting(static_cast<std::size_t>(n_active),
                                          std::vector<int>(static_cast<std::size_t>(n_active), -1));
    for (int i = 0; i < n_active; ++i) {
        for (int j = i + 1; j < n_active; ++j) {
            const ActiveDemand& u = state.active[static_cast<std::size_t>(i)];
            const ActiveDemand& v = state.active[static_cast<std::size_t>(j)];
            const double combined = u.weight + v.weight;
            auto [kc, z] = best_meeting(cache.get(u.node, u.weight).dist,
                                        cache.get(v.node, v.weight).dist,
                                        cache.get(u.node, combined).dist,
                                        cache.get(v.node, combined).dist, u.weight, v.weight);
            k_cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = kc;
            k_cost[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = kc;
            meeting[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = z;
        }
    }

    MatchResult matching = constrained_matching(k_cost, k);

    PhaseState next;
    next.phase = state.phase + 1;
    next.movements = state.movements;
    next.source_walks = state.source_walks;

    if (log) {
        log->phase = state.phase;
        log->matching_exact = matching.exact;
        log->forced_pair = matching.forced_pair;
        log->pairs.clear();
        log->unmatched.clear();
        log->movements.clear();
        log->phase_cost = 0.0;
    }

    auto record = [&](Movement m) {
        if (m.path_nodes.size() <= 1) return;  // zero-length moves carry no cost
        if (log) {
            log->movements.push_back(m);
            log->phase_cost += m.cost;
        }
        next.movements.push_back(std::move(m));
    };

    // Matching pairs come out (i, j)-sorted and the active list is sorted by
    // node id, so survivor draws happen in pair-sorted order, one per pair.
    for (const auto& [i, j] : matching.pairs) {
        const ActiveDemand& u = state.active[static_cast<std::size_t>(i)];
        const ActiveDemand& v = state.active[static_cast<std::size_t>(j)];
        const double combined = u.weight + v.weight;
        const int z = meeting[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (z < 0)
            throw InfeasibleError("run_phase: matched pair lies in different components");

        GMetricResult u_to_z = cache.path(u.node, u.weight, z);
        GMetricResult v_to_z = cache.path(v.node, v.weight, z);

        if (log)
            log->pairs.push_back({u.node, v.node, z,
                                  k_cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]});

        record({state.phase, MovementKind::ToMeeting, u.weight, u_to_z.nodes, u_to_z.cost});
        record({state.phase, MovementKind::ToMeeting, v.weight, v_to_z.nodes, v_to_z.cost});

        const bool keep_u = rng.next_double() < u.weight / combined;
        const ActiveDemand& survivor = keep_u ? u : v;
        GMetricResult back = reversed(cache.path(survivor.node, combined, z));
        record({state.phase, MovementKind::BackFromMeeting, combined, back.nodes, back.cost});

        ActiveDemand merged;
        merged.node = survivor.node;
        merged.weight = combined;
        merged.members = u.members;
        merged.members.insert(merged.members.end(), v.members.begin(), v.members.end());
        for (int s : u.members) {
            auto& walk = next.source_walks[static_cast<std::size_t>(s)];
            walk.insert(walk.end(), u_to_z.edges.begin(), u_to_z.edges.end());
            walk.insert(walk.end(), back.edges.begin(), back.edges.end());
        }
        for (int s : v.members) {
            auto& walk = next.source_walks[static_cast<std::size_t>(s)];
            walk.insert(walk.end(), v_to_z.edges.begin(), v_to_z.edges.end());
            walk.insert(walk.end(), back.edges.begin(), back.edges.end());
        }
        next.active.push_back(std::move(merged));
    }

    for (int i : matching.unmatched) {
        next.active.push_back(state.active[static_cast<std::size_t>(i)]);
        if (log) log->unmatched.push_back(state.active[static_cast<std::size_t>(i)].node);
    }
    std::sort(next.active.begin(), next.active.end(),
              [](const ActiveDemand& a, const ActiveDemand& b) { return a.node < b.node; });
    return next;
}

KMedianResult solve_k_median(const Instance& inst, int k, std::uint64_t seed, int repeats,
                             int threads) {
    require_undirected_good(inst, "solve_k_median");
    if (k < 1) throw std::invalid_argument("solve_k_median: k must be at least 1");
    if (repeats < 1) throw std::invalid_argument("solve_k_median: repeats must be at least 1");

    const int n_sources = static_cast<int>(inst.sources().size());

    if (k >= n_sources) {
        // Facilities right on the sources; nothing moves.
        KMedianResult result;
        for (const auto& s : inst.sources()) {
            result.solution.facilities.push_back(s.node);
            result.solution.assignment.push_back(PathFlow{s.node, {}, s.demand});
        }
        std::sort(result.solution.facilities.begin(), result.solution.facilities.end());
        result.run_costs.assign(static_cast<std::size_t>(repeats), 0.0);
        return result;
    }

    struct Run {
        Solution solution;
        double routing = 0.0;
        int phases = 0;
        std::vector<PhaseLogEntry> log;
    };
    std::vector<Run> runs(static_cast<std::size_t>(repeats));

    auto do_run = [&](int r) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        PhaseState state = init_phase_state(inst);
        Run& run = runs[static_cast<std::size_t>(r)];
        while (static_cast<int>(state.active.size()) > k) {
            PhaseLogEntry entry;
            state = run_phase(inst, state, k, rng, &entry);
            run.log.push_back(std::move(entry));
        }
        run.phases = state.phase;
        for (const ActiveDemand& a : state.active) run.solution.facilities.push_back(a.node);
        std::sort(run.solution.facilities.begin(), run.solution.facilities.end());
        for (std::size_t s = 0; s < inst.sources().size(); ++s)
            run.solution.assignment.push_back(PathFlow{inst.sources()[s].node,
                                                       state.source_walks[s],
                                                       inst.sources()[s].demand});
        // Report the superposed flow under true congestion; by concavity of
        // x*l(x) this never exceeds the sum of movement costs.
        run.routing = routing_cost(inst, edge_flow(inst, run.solution.assignment));
    };

    const int pool_size = std::min(std::max(1, threads), repeats);
    if (pool_size == 1) {
        for (int r = 0; r < repeats; ++r) do_run(r);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < pool_size; ++t)
            pool.emplace_back([&, t] {
                for (int r = t; r < repeats; r += pool_size) do_run(r);
            });
        for (auto& th : pool) th.join();
    }

    int best = 0;
    for (int r = 1; r < repeats; ++r)
        if (runs[static_cast<std::size_t>(r)].routing < runs[static_cast<std::size_t>(best)].routing)
            best = r;

    KMedianResult result;
    result.solution = std::move(runs[static_cast<std::size_t>(best)].solution);
    result.routing_cost = runs[static_cast<std::size_t>(best)].routing;
    result.phases = runs[static_cast<std::size_t>(best)].phases;
    result.phase_log = std::move(runs[static_cast<std::size_t>(best)].log);
    result.best_run = best;
    for (const Run& run : runs) result.run_costs.push_back(run.routing);
    return result;
}

MergeResult solve_flcc_merge(const Instance& inst, std::uint64_t seed, int repeats, int threads) {
    require_undirected_good(inst, "solve_flcc_merge");
    auto common = inst.common_facility_cost();
    if (!common)
        throw std::invalid_argument("solve_flcc_merge: requires a common facility opening cost");
    const double b = *common;
    const int n_sources = static_cast<int>(inst.sources().size());

    MergeResult result;
    result.total_cost = kInf;
    for (int k = 1; k <= n_sources; ++k) {
        auto t0 = std::chrono::steady_clock::now();
        KMedianResult km = solve_k_median(inst, k, derive_seed(seed, static_cast<std::uint64_t>(k)),
                                          repeats, threads);
        auto t1 = std::chrono::steady_clock::now();
        double facility = static_cast<double>(km.solution.facilities.size()) * b;
        double total = km.routing_cost + facility;
        result.sweep.push_back({k, km.routing_cost, facility, total, km.phases,
                                std::chrono::duration<double, std::milli>(t1 - t0).count()});
        if (total < result.total_cost) {
            result.total_cost = total;
            result.k = k;
            result.routing_cost = km.routing_cost;
            result.facility_cost = facility;
            result.solution = std::move(km.solution);
            result.phases = km.phases;
            result.phase_log = std::move(km.phase_log);
        }
    }
    return result;
}

}  // namespace congfac
