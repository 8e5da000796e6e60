#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "congfac/flow.hpp"
#include "congfac/instance.hpp"

namespace congfac {

// Parameters of the multiset search. When k is not given it follows the
// fully expanded derivation chain k = c_k * 2 * (M+1) * (2*a*M / eps)^2
// (norm-2 approximate Caratheodory with p = 2, gamma^2 <= M+1 and
// eps_1 = eps/(2*a*M)); the absolute constant is not pinned down by the
// guarantee, so it is exposed as c_k.
struct SparseParams {
    double eps = 0.0;     // > 0
    double a = 0.0;       // Lipschitz constant in force
    int max_path_len = 0; // M, user-supplied cap on path lengths (edges)
    int k = 0;            // multiset size
    double c_k = 1.0;
};

int caratheodory_k(double a, int max_path_len, double eps, double c_k = 1.0);

struct SparseOptions {
    double eps = 0.25;
    int max_path_len = -1;              // default n-1
    std::optional<int> k_override;      // bypass the formula
    double c_k = 1.0;
    std::size_t path_guard = 100000;    // enumerate_paths cap
    std::uint64_t iteration_guard = 10000000;  // multiset count cap
    int threads = 1;
};

// All simple directed paths from the source with 1..M edges, as edge
// sequences in lexicographic node-sequence order (ties by edge id). The
// endpoint of each path is the facility it would open.
std::vector<std::vector<int>> enumerate_paths(const Instance& inst, int max_path_len,
                                              std::size_t path_guard = 100000);

struct SparseResult {
    bool found = false;             // false: NoCandidate, raise eps or M
    Solution solution;
    double total_cost = 0.0;
    NashCertificate certificate;
    SparseParams params;
    std::vector<int> best_multiset;  // path indices, nondecreasing
    std::uint64_t combinations = 0;  // search space size
    std::uint64_t examined = 0;      // candidates that passed the DAG filter
};

// Exhaustive search over k-multisets of paths: each multiset routes
// demand/k per slot, opens the path endpoints, and is kept if it is an
// eps-Nash flow; the cheapest survivor wins (ties: lexicographic multiset).
// Requires an eligible instance (single source, directed, nondecreasing
// Lipschitz edges everywhere).
SparseResult solve_flsc_sparse(const Instance& inst, const SparseOptions& options);

}  // namespace congfac
