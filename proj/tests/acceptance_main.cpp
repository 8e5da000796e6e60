// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Usage: acceptance [N...]   (default: run all)
// Criterion 11 shells out to the CLI named by the CONGFAC_CLI env variable.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "congfac/equilibrium.hpp"
#include "congfac/merge_solver.hpp"
#include "congfac/oracle.hpp"
#include "congfac/reductions.hpp"
#include "congfac/sparse_solver.hpp"
#include "test_helpers.hpp"

using namespace congfac;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Failure {
    std::string what;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

// --- shared corpus builders -------------------------------------------------

Instance sparse_corpus_instance(std::uint64_t seed) {
    GenParams params;
    params.directed = true;
    params.n = 5 + static_cast<int>(seed % 2);  // 5..6 nodes
    params.m = params.n + 3;
    params.n_sources = 1;
    params.family = FnFamily::Affine;
    params.coef_min = 0.1;
    params.coef_max = 1.0;
    params.w_min = params.w_max = 1.0;
    params.common_b = 0.6;
    params.source_b = 1000.0;  // path endpoints never include the source
    return gen_random(params, seed);
}

Instance good_corpus_instance(std::uint64_t seed, int n_sources) {
    GenParams params;
    params.family = FnFamily::SharedFixed;
    params.n = 7 + static_cast<int>(seed % 2);  // 7..8 nodes
    params.m = params.n + 2;
    params.n_sources = n_sources;
    params.coef_min = 0.2;
    params.coef_max = 2.0;
    params.common_b = 1.0;
    return gen_random(params, seed);
}

// Exact k-median optimum: cheapest routing over facility sets of size <= k.
double kmedian_opt(const Instance& inst, int k) {
    const int n = inst.num_nodes();
    double best = kInf;
    std::vector<int> facilities;
    auto recurse = [&](auto&& self, int next, int left) -> void {
        if (!facilities.empty()) {
            try {
                best = std::min(best, min_routing_fixed_F_good(inst, facilities).cost);
            } catch (const InfeasibleError&) {
            }
        }
        if (left == 0 || next == n) return;
        for (int v = next; v < n; ++v) {
            facilities.push_back(v);
            self(self, v + 1, left - 1);
            facilities.pop_back();
        }
    };
    recurse(recurse, 0, k);
    return best;
}

std::uint64_t multiset_count(std::uint64_t n_paths, std::uint64_t k) {
    long double v = 1.0L;
    for (std::uint64_t i = 1; i <= k; ++i) {
        v *= static_cast<long double>(n_paths - 1 + i) / static_cast<long double>(i);
        if (v > 1e18L) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(v + 0.5L);
}

// --- criteria ----------------------------------------------------------------

// Sparse-solver guarantee: total <= FLSC optimum + eps/2 on 25 seeded desk
// instances. The worst-case k formula is astronomically beyond the iteration
// guard even at these sizes, so the harness uses the exposed k override with
// the largest k the guard allows; the inequality itself is asserted verbatim.
void criterion1() {
    int solved = 0;
    for (std::uint64_t seed = 1; solved < 25; ++seed) {
        Instance inst = sparse_corpus_instance(seed);
        double eps = (solved % 2 == 0) ? 0.25 : 0.5;

        SparseOptions options;
        options.eps = eps;
        options.max_path_len = 3;
        std::uint64_t n_paths = enumerate_paths(inst, 3).size();
        int k = 2;
        for (int cand : {12, 10, 8, 6, 4, 3}) {
            if (multiset_count(n_paths, static_cast<std::uint64_t>(cand)) <= 2500000) {
                k = cand;
                break;
            }
        }
        options.k_override = k;
        SparseResult result = solve_flsc_sparse(inst, options);
        expect(result.found, "no eps-Nash candidate on seed " + std::to_string(seed));

        BruteForceResult opt = brute_force_flsc(inst);
        expect(result.total_cost <= opt.cost + eps / 2 + 1e-9,
               "seed " + std::to_string(seed) + ": sparse " + std::to_string(result.total_cost) +
                   " > opt " + std::to_string(opt.cost) + " + eps/2");
        ++solved;
    }
}

// Verifier equivalence on 50 instances x 100 trials.
void criterion2() {
    SplitMix64 rng(0xC2);
    int graphs = 0;
    long compared = 0;
    for (std::uint64_t seed = 1; graphs < 50; ++seed) {
        GenParams params;
        params.directed = true;
        params.n = 4 + static_cast<int>(seed % 3);  // 4..6
        params.m = params.n + 2;
        params.n_sources = 1;
        params.family = seed % 2 ? FnFamily::Affine : FnFamily::Polynomial;
        Instance inst = gen_random(params, seed);
        ++graphs;

        std::vector<std::vector<int>> paths;
        std::vector<char> visited(static_cast<std::size_t>(inst.num_nodes()), 0);
        std::vector<int> edges;
        auto dfs = [&](auto&& self, int u) -> void {
            if (!edges.empty()) paths.push_back(edges);
            visited[static_cast<std::size_t>(u)] = 1;
            for (const Arc& arc : inst.out_arcs(u)) {
                if (visited[static_cast<std::size_t>(arc.to)]) continue;
                edges.push_back(arc.edge);
                self(self, arc.to);
                edges.pop_back();
            }
            visited[static_cast<std::size_t>(u)] = 0;
        };
        dfs(dfs, 0);
        if (paths.empty()) continue;

        for (int trial = 0; trial < 100; ++trial) {
            std::size_t n_used = 1 + rng.next_below(3);
            PathAssignment assignment;
            std::vector<int> facilities;
            double left = inst.sources().front().demand;
            for (std::size_t i = 0; i < n_used; ++i) {
                const auto& path = paths[rng.next_below(paths.size())];
                double amount = (i + 1 == n_used) ? left : left * rng.next_in(0.2, 0.8);
                left -= amount;
                if (amount <= 0.0) break;
                assignment.push_back({0, path, amount});
                int at = 0;
                for (int e : path) at = inst.edge(e).v;
                facilities.push_back(at);
            }
            std::sort(facilities.begin(), facilities.end());
            facilities.erase(std::unique(facilities.begin(), facilities.end()),
                             facilities.end());
            Solution sol{facilities, assignment};
            try {
                check_solution(inst, sol);
            } catch (const InfeasibleError&) {
                continue;
            }
            double eps = rng.next_in(0.0, 3.0);
            bool fast;
            try {
                fast = verify_eps_nash(inst, sol, eps).holds;
            } catch (const NotADagError&) {
                continue;  // criterion covers acyclic supports
            }
            bool slow = verify_eps_nash_exhaustive(inst, sol, eps);
            expect(fast == slow, "verifier disagreement on seed " + std::to_string(seed));
            ++compared;
        }
    }
    expect(compared >= 2000, "too few comparable trials: " + std::to_string(compared));
}

// Pigou equilibrium, monotone potential, gradient check.
void criterion3() {
    Instance pigou("pigou2", true, 2,
                   {{0, 1, AffineFn{1.0, 0.0}}, {0, 1, ConstantFn{1.0}}}, {{0, 1.0}},
                   FacilityCosts{0.0, {}});
    EquilibriumResult eq = nash_flow(pigou, {1}, 1e-6);
    expect(eq.converged, "Pigou equilibrium did not converge");
    EdgeFlow flow = edge_flow(pigou, eq.assignment);
    expect(std::abs(flow.total[0] - 1.0) <= 1e-4, "Pigou x1 deviates");
    expect(std::abs(flow.total[1] - 0.0) <= 1e-4, "Pigou x2 deviates");
    for (std::size_t i = 1; i < eq.potential_trace.size(); ++i)
        expect(eq.potential_trace[i] <=
                   eq.potential_trace[i - 1] + 1e-12 * std::abs(eq.potential_trace[i - 1]),
               "potential increased at iteration " + std::to_string(i));

    SplitMix64 rng(0xC3);
    for (int i = 0; i < 20; ++i) {
        CostFn fn;
        switch (i % 3) {
            case 0: fn = AffineFn{rng.next_in(0.0, 3.0), rng.next_in(0.0, 3.0)}; break;
            case 1: fn = ConstantFn{rng.next_in(0.0, 3.0)}; break;
            default:
                fn = PolynomialFn{{rng.next_in(0.0, 2.0), rng.next_in(0.0, 2.0),
                                   rng.next_in(0.0, 2.0)}};
        }
        double x = rng.next_in(0.1, 5.0);
        double h = 1e-5;
        double fd = (cost_integral(fn, x + h) - cost_integral(fn, x - h)) / (2.0 * h);
        expect(std::abs(fd - eval_cost(fn, x)) <= 1e-6, "gradient check failed");
    }
}

// Phase bound on complete unit-cost instances.
void criterion4() {
    for (int n_sources : {2, 4, 8, 16, 32, 64}) {
        std::vector<Edge> edges;
        std::vector<SourceDemand> sources;
        for (int u = 0; u < n_sources; ++u) {
            sources.push_back({u, 1.0});
            for (int v = u + 1; v < n_sources; ++v)
                edges.push_back({u, v, SharedFixedFn{0.0, 1.0, 1.0}});
        }
        Instance inst("complete" + std::to_string(n_sources), false, n_sources, std::move(edges),
                      std::move(sources), FacilityCosts{1.0, {}});
        int bound = static_cast<int>(std::ceil(std::log2(n_sources))) + 2;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            KMedianResult result = solve_k_median(inst, 1, seed, 1);
            expect(result.phases <= bound,
                   "|S|=" + std::to_string(n_sources) + " seed " + std::to_string(seed) + ": " +
                       std::to_string(result.phases) + " phases > " + std::to_string(bound));
        }
    }
}

struct PhaseCostStats {
    std::vector<double> sums;  // per phase index
    int runs = 0;
};

PhaseCostStats collect_phase_costs(const Instance& inst, int k, std::uint64_t seed, int runs) {
    PhaseCostStats stats;
    stats.runs = runs;
    for (int r = 0; r < runs; ++r) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        PhaseState state = init_phase_state(inst);
        while (static_cast<int>(state.active.size()) > k) {
            PhaseLogEntry log;
            state = run_phase(inst, state, k, rng, &log);
            if (stats.sums.size() <= static_cast<std::size_t>(log.phase))
                stats.sums.resize(static_cast<std::size_t>(log.phase) + 1, 0.0);
            stats.sums[static_cast<std::size_t>(log.phase)] += log.phase_cost;
        }
    }
    return stats;
}

// Empirical per-phase expected cost against twice the exact k-median optimum.
void criterion5() {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Instance inst = good_corpus_instance(seed, 3 + static_cast<int>(seed % 2));
        for (int k : {1, 2}) {
            double opt = kmedian_opt(inst, k);
            expect(opt < kInf, "no finite k-median optimum");
            PhaseCostStats stats = collect_phase_costs(inst, k, seed, 500);
            expect(!stats.sums.empty(), "no phases ran");
            for (std::size_t phase = 0; phase < stats.sums.size(); ++phase) {
                double mean = stats.sums[phase] / stats.runs;
                expect(mean <= 2.0 * opt * 1.1,
                       "seed " + std::to_string(seed) + " k=" + std::to_string(k) + " phase " +
                           std::to_string(phase) + ": mean " + std::to_string(mean) + " > 2*" +
                           std::to_string(opt) + "*1.1");
            }
        }
    }
}

// Best-of-32 end-to-end cost against the phase-scaled optimum.
void criterion6() {
    int total = 0, within = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Instance inst = good_corpus_instance(seed, 3 + static_cast<int>(seed % 2));
        int n_sources = static_cast<int>(inst.sources().size());
        for (int k : {1, 2}) {
            double opt = kmedian_opt(inst, k);
            KMedianResult result = solve_k_median(inst, k, seed, 32);
            double bound = 2.0 * (std::ceil(std::log2(n_sources)) + 2.0) * opt;
            ++total;
            if (result.routing_cost <= bound + 1e-9) ++within;
        }
    }
    expect(within * 20 >= total * 19,  // >= 95%
           std::to_string(within) + "/" + std::to_string(total) + " within the bound");
}

// Reduction correctness.
void criterion7() {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CostDistanceInstance cd =
            testing::gen_random_cd(seed, 5 + static_cast<int>(seed % 2), 7 + static_cast<int>(seed % 3), 2);
        Instance reduced = reduce_cost_distance(cd);
        double b = reduction_opening_cost(cd);
        BruteForceResult flcc = brute_force_flcc(reduced);
        CostDistanceOracleResult direct = brute_force_cost_distance(cd);
        expect(std::abs(flcc.cost - (direct.cost + b)) <= 1e-6 * std::max(1.0, direct.cost + b),
               "seed " + std::to_string(seed) + ": flcc " + std::to_string(flcc.cost) +
                   " vs cd+B " + std::to_string(direct.cost + b));
        ExtractedCostDistance extracted =
            extract_cost_distance_solution(reduced, flcc.solution, cd);
        expect(std::abs(extracted.cost - direct.cost) <= 1e-6 * std::max(1.0, direct.cost),
               "seed " + std::to_string(seed) + ": extracted " + std::to_string(extracted.cost) +
                   " vs " + std::to_string(direct.cost));
    }
}

// Locality gap of the star construction.
void criterion8() {
    for (int k : {4, 8}) {
        for (int d : {1, 2, 3}) {
            Instance inst = gen_local_search_gap(k, d, 0.01);
            const int hub = 2 * k;
            LocalOptReport hub_report = local_moves_check(inst, {hub});
            expect(hub_report.is_local_opt,
                   "hub not locally optimal at k=" + std::to_string(k) + " d=" + std::to_string(d));

            std::vector<int> all_o;
            for (int i = 0; i < k; ++i) all_o.push_back(k + i);
            // Splitting cannot help with every private facility open, so the
            // convex routing value is the exact optimum (and avoids the k^k
            // joint enumeration).
            double opt_cost = min_routing_fixed_F_convex(inst, all_o, 1e-9).cost;
            for (int f : all_o) opt_cost += inst.facility_cost(f);

            double ratio = hub_report.current_cost / opt_cost;
            double claimed = std::pow(static_cast<double>(k - 1), static_cast<double>(d + 1)) /
                             (k * 1.01 + k);
            expect(ratio >= claimed, "ratio " + std::to_string(ratio) + " below " +
                                         std::to_string(claimed) + " at k=" + std::to_string(k) +
                                         " d=" + std::to_string(d));
        }
    }
}

// Structural properties of oracle optima on good instances.
void criterion9() {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Instance inst = good_corpus_instance(seed, 2 + static_cast<int>(seed % 3));
        BruteForceResult best = brute_force_flcc(inst);

        std::map<int, int> per_source;
        for (const PathFlow& p : best.solution.assignment) ++per_source[p.source];
        for (const auto& [node, count] : per_source)
            expect(count == 1, "source " + std::to_string(node) + " splits");

        EdgeFlow flow = edge_flow(inst, best.solution.assignment);
        std::vector<int> parent(static_cast<std::size_t>(inst.num_nodes()));
        for (int v = 0; v < inst.num_nodes(); ++v) parent[static_cast<std::size_t>(v)] = v;
        std::function<int(int)> find = [&](int v) {
            while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
            return v;
        };
        for (int e = 0; e < inst.num_edges(); ++e) {
            if (!(flow.total[static_cast<std::size_t>(e)] > 0.0)) continue;
            int ru = find(inst.edge(e).u), rv = find(inst.edge(e).v);
            expect(ru != rv, "optimal support contains a cycle (seed " + std::to_string(seed) + ")");
            parent[static_cast<std::size_t>(ru)] = rv;
        }
    }
}

// Matching exactness against full enumeration.
void criterion10() {
    SplitMix64 rng(0xC10);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + static_cast<int>(rng.next_below(9));  // 2..10
        std::vector<std::vector<double>> costs(static_cast<std::size_t>(n),
                                               std::vector<double>(static_cast<std::size_t>(n), 0));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double c = rng.next_in(0.0, 10.0);
                costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
                costs[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = c;
            }
        for (int k = 0; k < n; ++k) {
            int n_pairs = (n - k) / 2;
            if (n_pairs == 0) continue;
            double best = kInf;
            std::vector<int> partner(static_cast<std::size_t>(n), -1);
            auto enumerate = [&](auto&& self, int i, int pairs, double cost) -> void {
                if (pairs == n_pairs) {
                    best = std::min(best, cost);
                    return;
                }
                if (i == n) return;
                if (partner[static_cast<std::size_t>(i)] >= 0) {
                    self(self, i + 1, pairs, cost);
                    return;
                }
                self(self, i + 1, pairs, cost);
                for (int j = i + 1; j < n; ++j) {
                    if (partner[static_cast<std::size_t>(j)] >= 0) continue;
                    partner[static_cast<std::size_t>(i)] = j;
                    partner[static_cast<std::size_t>(j)] = i;
                    self(self, i + 1, pairs + 1,
                         cost + costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                    partner[static_cast<std::size_t>(i)] = -1;
                    partner[static_cast<std::size_t>(j)] = -1;
                }
            };
            enumerate(enumerate, 0, 0, 0.0);
            MatchResult got = constrained_matching(costs, k);
            double got_cost = 0.0;
            for (auto [i, j] : got.pairs)
                got_cost += costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            expect(static_cast<int>(got.pairs.size()) == n_pairs, "wrong matching cardinality");
            expect(std::abs(got_cost - best) <= 1e-9, "DP " + std::to_string(got_cost) +
                                                          " != enumeration " + std::to_string(best));
        }
    }
}

// CLI determinism: byte-identical stdout across reruns and thread counts.
void criterion11() {
    const char* cli = std::getenv("CONGFAC_CLI");
    expect(cli != nullptr, "CONGFAC_CLI not set (path to the congfac binary)");

    auto capture = [&](const std::string& args, const std::string& tag) {
        std::string out_path = "/tmp/congfac_accept_" + tag + ".out";
        std::string cmd = std::string(cli) + " " + args + " > " + out_path + " 2>/dev/null";
        int rc = std::system(cmd.c_str());
        expect(rc == 0, "command failed: " + cmd);
        std::ifstream in(out_path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    std::string inst = "/tmp/congfac_accept_inst.json";
    capture("gen random --seed 11 --n 7 --m 10 --sources 4 --family shared_fixed -o " + inst,
            "gen1");
    std::string gen1 = capture("gen random --seed 11 --n 7 --m 10 --sources 4 --family shared_fixed",
                               "gen2");
    std::string gen2 = capture("gen random --seed 11 --n 7 --m 10 --sources 4 --family shared_fixed",
                               "gen3");
    expect(gen1 == gen2, "gen random not byte-identical across reruns");

    std::string merge_args = "solve merge " + inst + " --seed 7 --all-k --repeats 6";
    std::string m1 = capture("--threads 1 " + merge_args, "m1");
    std::string m2 = capture("--threads 3 " + merge_args, "m2");
    std::string m3 = capture("--threads 1 " + merge_args, "m3");
    expect(m1 == m2, "solve merge differs across --threads");
    expect(m1 == m3, "solve merge differs across reruns");

    std::string sp_inst = "/tmp/congfac_accept_sparse.json";
    capture("gen random --seed 5 --n 5 --m 7 --sources 1 --family affine --directed --source-b 50 -o " +
                sp_inst,
            "gen4");
    std::string sparse_args = "solve sparse " + sp_inst + " --eps 0.5 --max-path-len 3 --k 6";
    std::string s1 = capture("--threads 1 " + sparse_args, "s1");
    std::string s2 = capture("--threads 4 " + sparse_args, "s2");
    std::string s3 = capture("--threads 1 " + sparse_args, "s3");
    expect(s1 == s2, "solve sparse differs across --threads");
    expect(s1 == s3, "solve sparse differs across reruns");
}

struct Criterion {
    int id;
    const char* description;
    std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria{
        {1, "sparse-solver guarantee: total <= FLSC optimum + eps/2 on 25 desk instances",
         criterion1},
        {2, "eps-Nash verifier agrees with the exhaustive definition (50 x 100 trials)",
         criterion2},
        {3, "Pigou equilibrium, monotone potential, marginal gradient check", criterion3},
        {4, "merge phase count <= ceil(log2 |S|) + 2 for |S| in {2..64}, 20 seeds", criterion4},
        {5, "per-phase mean cost <= 2 * k-median optimum * 1.1 over 500 runs", criterion5},
        {6, "best-of-32 merge total within 2*(ceil(log2|S|)+2)*OPT for >= 95%", criterion6},
        {7, "Cost-Distance reduction equality and extraction on 20 instances", criterion7},
        {8, "hub-only local optimality and k^d locality ratio", criterion8},
        {9, "oracle optima on good instances: forest support, unsplit demands", criterion9},
        {10, "constrained matching equals full enumeration (200 matrices)", criterion10},
        {11, "CLI byte-identical stdout across reruns and thread counts", criterion11},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), c.id) == selected.end())
            continue;
        try {
            c.run();
            std::printf("[PASS] criterion %d: %s\n", c.id, c.description);
        } catch (const Failure& f) {
            std::printf("[FAIL] criterion %d: %s -- %s\n", c.id, c.description, f.what.c_str());
            ++failures;
        } catch (const std::exception& e) {
            std::printf("[FAIL] criterion %d: %s -- unexpected error: %s\n", c.id, c.description,
                        e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures;
}
