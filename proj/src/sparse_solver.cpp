#include "congfac/sparse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace congfac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// C(n_paths + k - 1, k), saturated.
std::uint64_t multiset_count(std::uint64_t n_paths, std::uint64_t k) {
    long double v = 1.0L;
    for (std::uint64_t i = 1; i <= k; ++i) {
        v *= static_cast<long double>(n_paths - 1 + i) / static_cast<long double>(i);
        if (v > 1e18L) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(v + 0.5L);
}

struct WorkerBest {
    double cost = kInf;
    std::vector<int> multiset;
    Solution solution;
    NashCertificate certificate;
};

}  // namespace

int caratheodory_k(double a, int max_path_len, double eps, double c_k) {
    if (!(eps > 0.0)) throw std::invalid_argument("caratheodory_k: eps must be positive");
    if (max_path_len < 1) throw std::invalid_argument("caratheodory_k: M must be at least 1");
    if (a < 0.0) throw std::invalid_argument("caratheodory_k: Lipschitz constant must be nonnegative");
    double m = static_cast<double>(max_path_len);
    double k = c_k * 2.0 * (m + 1.0) * (2.0 * a * m / eps) * (2.0 * a * m / eps);
    return std::max(1, static_cast<int>(std::ceil(k - 1e-12)));
}

std::vector<std::vector<int>> enumerate_paths(const Instance& inst, int max_path_len,
                                              std::size_t path_guard) {
    if (inst.sources().size() != 1)
        throw std::invalid_argument("enumerate_paths: requires a single-source instance");
    if (!inst.directed()) throw std::invalid_argument("enumerate_paths: requires a directed instance");
    if (max_path_len < 1) throw std::invalid_argument("enumerate_paths: M must be at least 1");

    std::vector<std::vector<int>> paths;
    std::vector<char> visited(static_cast<std::size_t>(inst.num_nodes()), 0);
    std::vector<int> edges;
    // Arcs are (to, edge)-sorted, so depth-first emission yields paths in
    // lexicographic node-sequence order.
    auto dfs = [&](auto&& self, int u) -> void {
        visited[static_cast<std::size_t>(u)] = 1;
        for (const Arc& arc : inst.out_arcs(u)) {
            if (visited[static_cast<std::size_t>(arc.to)]) continue;
            edges.push_back(arc.edge);
            if (paths.size() >= path_guard)
                throw std::runtime_error("enumerate_paths: more than " +
                                         std::to_string(path_guard) +
                                         " paths; lower the path length cap M");
            paths.push_back(edges);
            if (static_cast<int>(edges.size()) < max_path_len) self(self, arc.to);
            edges.pop_back();
        }
        visited[static_cast<std::size_t>(u)] = 0;
    };
    dfs(dfs, inst.sources().front().node);
    return paths;
}

SparseResult solve_flsc_sparse(const Instance& inst, const SparseOptions& options) {
    ValidationReport report = validate_instance(inst);
    if (!report.eligible_sparse)
        throw std::invalid_argument("solve_flsc_sparse: instance not eligible: " +
                                    report.sparse_reason);
    if (!(options.eps > 0.0)) throw std::invalid_argument("solve_flsc_sparse: eps must be positive");

    SparseResult result;
    result.params.eps = options.eps;
    result.params.c_k = options.c_k;
    result.params.max_path_len =
        options.max_path_len > 0 ? options.max_path_len : inst.num_nodes() - 1;
    double a = 0.0;
    for (const FnClass& cls : report.edge_classes) a = std::max(a, cls.lipschitz);
    result.params.a = a;
    result.params.k = options.k_override
                          ? *options.k_override
                          : caratheodory_k(a, result.params.max_path_len, options.eps, options.c_k);
    if (result.params.k < 1) throw std::invalid_argument("solve_flsc_sparse: k must be at least 1");

    const std::vector<std::vector<int>> paths =
        enumerate_paths(inst, result.params.max_path_len, options.path_guard);
    const int n_paths = static_cast<int>(paths.size());
    const int k = result.params.k;

    result.combinations = multiset_count(static_cast<std::uint64_t>(n_paths),
                                         static_cast<std::uint64_t>(k));
    if (result.combinations > options.iteration_guard)
        throw std::runtime_error("solve_flsc_sparse: " + std::to_string(result.combinations) +
                                 " multisets exceed the iteration guard of " +
                                 std::to_string(options.iteration_guard) +
                                 "; lower M or k, or raise --guard-iters");
    if (n_paths == 0) return result;  // no candidate can exist

    const int source = inst.sources().front().node;
    const double demand = inst.sources().front().demand;
    const double unit = demand / static_cast<double>(k);
    const auto m = static_cast<std::size_t>(inst.num_edges());
    const auto n = static_cast<std::size_t>(inst.num_nodes());

    std::vector<int> endpoint(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) {
        int at = source;
        for (int e : paths[p]) at = inst.edge(e).v;  // directed: always u -> v
        endpoint[static_cast<std::size_t>(p)] = at;
    }

    const int threads = std::max(1, options.threads);
    std::vector<WorkerBest> bests(static_cast<std::size_t>(threads));

    auto worker = [&](int worker_id) {
        WorkerBest& best = bests[static_cast<std::size_t>(worker_id)];
        std::vector<int> edge_count(m, 0);
        std::vector<double> load(m, 0.0);
        const std::vector<double> zeros(m, 0.0);
        std::vector<int> endpoint_count(n, 0);
        std::vector<char> facility(n, 0);
        std::vector<int> chosen;
        chosen.reserve(static_cast<std::size_t>(k));
        detail::VerifyScratch scratch;
        NashCertificate cert;

        auto push_path = [&](int p) {
            chosen.push_back(p);
            for (int e : paths[static_cast<std::size_t>(p)]) {
                auto ei = static_cast<std::size_t>(e);
                ++edge_count[ei];
                load[ei] = unit * edge_count[ei];
            }
            auto f = static_cast<std::size_t>(endpoint[static_cast<std::size_t>(p)]);
            if (endpoint_count[f]++ == 0) facility[f] = 1;
        };
        auto pop_path = [&]() {
            int p = chosen.back();
            chosen.pop_back();
            for (int e : paths[static_cast<std::size_t>(p)]) {
                auto ei = static_cast<std::size_t>(e);
                --edge_count[ei];
                load[ei] = unit * edge_count[ei];
            }
            auto f = static_cast<std::size_t>(endpoint[static_cast<std::size_t>(p)]);
            if (--endpoint_count[f] == 0) facility[f] = 0;
        };

        auto evaluate_leaf = [&]() {
            double cost = 0.0;
            for (std::size_t e = 0; e < m; ++e)
                if (edge_count[e] > 0) cost += eval_total(inst.edge(static_cast<int>(e)).fn, load[e]);
            for (std::size_t v = 0; v < n; ++v)
                if (endpoint_count[v] > 0) cost += inst.facility_cost(static_cast<int>(v));
            // Enumeration is lexicographic, so on ties the incumbent already
            // is the lexicographically smaller multiset.
            if (cost >= best.cost) return;
            bool not_a_dag = false;
            bool holds = detail::verify_loads_single_source(inst, source, load, zeros, facility,
                                                            options.eps, scratch, cert, &not_a_dag);
            if (not_a_dag || !holds) return;
            best.cost = cost;
            best.multiset = chosen;
            best.certificate = cert;
        };

        auto recurse = [&](auto&& self, int depth, int min_path) -> void {
            if (depth == k) {
                evaluate_leaf();
                return;
            }
            for (int p = min_path; p < n_paths; ++p) {
                push_path(p);
                self(self, depth + 1, p);
                pop_path();
            }
        };

        // Static partition over the first multiset entry.
        for (int first = worker_id; first < n_paths; first += threads) {
            push_path(first);
            recurse(recurse, 1, first);
            pop_path();
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    // Deterministic merge regardless of thread count.
    const WorkerBest* winner = nullptr;
    for (const WorkerBest& b : bests) {
        if (b.cost == kInf) continue;
        if (!winner || b.cost < winner->cost ||
            (b.cost == winner->cost && b.multiset < winner->multiset))
            winner = &b;
    }
    if (!winner) return result;  // NoCandidate

    result.found = true;
    result.total_cost = winner->cost;
    result.best_multiset = winner->multiset;
    result.certificate = winner->certificate;

    // Rebuild the solution from the winning multiset: demand/k per slot,
    // merged across repeated paths.
    std::vector<int> facilities;
    for (std::size_t i = 0; i < winner->multiset.size(); ++i) {
        int p = winner->multiset[i];
        int mult = 1;
        while (i + 1 < winner->multiset.size() && winner->multiset[i + 1] == p) {
            ++i;
            ++mult;
        }
        result.solution.assignment.push_back(
            PathFlow{source, paths[static_cast<std::size_t>(p)], unit * mult});
        facilities.push_back(endpoint[static_cast<std::size_t>(p)]);
    }
    std::sort(facilities.begin(), facilities.end());
    facilities.erase(std::unique(facilities.begin(), facilities.end()), facilities.end());
    result.solution.facilities = std::move(facilities);
    return result;
}

}  // namespace congfac
