#include <stdexcept>

#include "congfac/oracle.hpp"
#include "congfac/reductions.hpp"
#include "congfac/sparse_solver.hpp"
#include "doctest.h"

using namespace congfac;

namespace {

Instance pigou() {
    return Instance("pigou", true, 3,
                    {{0, 1, AffineFn{1.0, 0.0}}, {0, 2, ConstantFn{1.0}}}, {{0, 1.0}},
                    FacilityCosts{std::nullopt, {1000.0, 0.1, 0.1}});
}

std::string joined(const Instance& inst, const std::vector<int>& edges) {
    std::string s;
    int at = 0;
    s += std::to_string(at);
    for (int e : edges) {
        at = inst.edge(e).v;
        s += "," + std::to_string(at);
    }
    return s;
}

}  // namespace

TEST_CASE("enumerate_paths in lexicographic order") {
    Instance single("s", true, 2, {{0, 1, ConstantFn{1.0}}}, {{0, 1.0}}, FacilityCosts{1.0, {}});
    CHECK(enumerate_paths(single, 1).size() == 1);

    // s=0, a=1, t=2: edges s->a, a->t, s->t.
    Instance tri("t", true, 3,
                 {{0, 1, ConstantFn{1.0}}, {1, 2, ConstantFn{1.0}}, {0, 2, ConstantFn{1.0}}},
                 {{0, 1.0}}, FacilityCosts{1.0, {}});
    auto paths = enumerate_paths(tri, 2);
    REQUIRE(paths.size() == 3);
    CHECK(joined(tri, paths[0]) == "0,1");
    CHECK(joined(tri, paths[1]) == "0,1,2");
    CHECK(joined(tri, paths[2]) == "0,2");

    // Diamond s->{a,b}->t.
    Instance diamond("d", true, 4,
                     {{0, 1, ConstantFn{1.0}},
                      {0, 2, ConstantFn{1.0}},
                      {1, 3, ConstantFn{1.0}},
                      {2, 3, ConstantFn{1.0}}},
                     {{0, 1.0}}, FacilityCosts{1.0, {}});
    CHECK(enumerate_paths(diamond, 2).size() == 4);

    CHECK_THROWS_AS(enumerate_paths(diamond, 2, 2), std::runtime_error);  // guard
}

TEST_CASE("caratheodory_k follows the expanded derivation chain") {
    // k = c_k * 2 * (M+1) * (2aM/eps)^2
    CHECK(caratheodory_k(1.0, 1, 1.0) == 16);
    CHECK(caratheodory_k(1.0, 2, 2.0) == 24);
    // Doubling eps quarters k.
    CHECK(caratheodory_k(2.0, 3, 0.5) == 4 * caratheodory_k(2.0, 3, 1.0));
    // The constant is exposed.
    CHECK(caratheodory_k(1.0, 1, 1.0, 2.0) == 32);
    // Degenerate constants clamp to a single slot.
    CHECK(caratheodory_k(0.0, 3, 0.5) == 1);
}

TEST_CASE("sparse solver on the Pigou network with the formula k") {
    SparseOptions options;
    options.eps = 0.05;
    options.max_path_len = 1;
    SparseResult result = solve_flsc_sparse(pigou(), options);
    REQUIRE(result.found);
    // a = 1, M = 1 -> k = 2*2*(2/0.05)^2 = 6400; only two paths exist, so the
    // search is linear in k.
    CHECK(result.params.k == 6400);
    CHECK(result.total_cost == doctest::Approx(1.1));
    CHECK(result.solution.facilities.size() == 1);
    CHECK(result.certificate.holds);
}

TEST_CASE("sparse solver on a single forced path") {
    Instance single("s", true, 2, {{0, 1, ConstantFn{1.0}}}, {{0, 1.0}},
                    FacilityCosts{std::nullopt, {1000.0, 1.0}});
    SparseOptions options;
    options.eps = 0.5;
    options.max_path_len = 1;
    SparseResult result = solve_flsc_sparse(single, options);
    REQUIRE(result.found);
    CHECK(result.total_cost == doctest::Approx(2.0));
    CHECK(result.solution.facilities == std::vector<int>{1});
}

TEST_CASE("sparse solver splits across symmetric parallel edges") {
    Instance sym("sym", true, 2, {{0, 1, AffineFn{1.0, 0.0}}, {0, 1, AffineFn{1.0, 0.0}}},
                 {{0, 1.0}}, FacilityCosts{std::nullopt, {1000.0, 1.0}});
    SparseOptions options;
    options.eps = 0.25;
    options.max_path_len = 1;
    options.k_override = 8;
    SparseResult result = solve_flsc_sparse(sym, options);
    REQUIRE(result.found);
    CHECK(result.total_cost <= 1.5 + options.eps / 2 + 1e-9);
    EdgeFlow flow = edge_flow(sym, result.solution.assignment);
    CHECK(flow.total[0] == doctest::Approx(0.5));
    CHECK(flow.total[1] == doctest::Approx(0.5));
}

TEST_CASE("every returned solution passes verify_eps_nash at the requested eps") {
    GenParams params;
    params.directed = true;
    params.n = 5;
    params.m = 7;
    params.n_sources = 1;
    params.family = FnFamily::Affine;
    params.coef_min = 0.1;
    params.coef_max = 1.0;
    params.common_b = 0.8;
    params.source_b = 1000.0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Instance inst = gen_random(params, seed);
        SparseOptions options;
        options.eps = 0.5;
        options.max_path_len = 3;
        options.k_override = 6;
        SparseResult result = solve_flsc_sparse(inst, options);
        if (!result.found) continue;
        CHECK(verify_eps_nash(inst, result.solution, options.eps).holds);
        CHECK(total_cost(inst, result.solution) == doctest::Approx(result.total_cost));
    }
}

TEST_CASE("doubling k never hurts, and reruns are identical") {
    GenParams params;
    params.directed = true;
    params.n = 5;
    params.m = 7;
    params.n_sources = 1;
    params.family = FnFamily::Affine;
    params.coef_min = 0.1;
    params.coef_max = 1.0;
    params.common_b = 0.8;
    params.source_b = 1000.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        Instance inst = gen_random(params, seed);
        SparseOptions options;
        options.eps = 0.5;
        options.max_path_len = 2;
        options.k_override = 4;
        SparseResult k4 = solve_flsc_sparse(inst, options);
        options.k_override = 8;
        SparseResult k8 = solve_flsc_sparse(inst, options);
        if (k4.found) {
            REQUIRE(k8.found);
            CHECK(k8.total_cost <= k4.total_cost + 1e-12);
        }
        SparseResult again = solve_flsc_sparse(inst, options);
        CHECK(again.found == k8.found);
        CHECK(again.total_cost == k8.total_cost);
        CHECK(again.best_multiset == k8.best_multiset);

        // Thread count must not change the answer.
        options.threads = 3;
        SparseResult threaded = solve_flsc_sparse(inst, options);
        CHECK(threaded.total_cost == k8.total_cost);
        CHECK(threaded.best_multiset == k8.best_multiset);
    }
}

TEST_CASE("sparse solver stays within eps/2 of the FLSC optimum on desk instances") {
    GenParams params;
    params.directed = true;
    params.n = 5;
    params.m = 7;
    params.n_sources = 1;
    params.family = FnFamily::Affine;
    params.coef_min = 0.1;
    params.coef_max = 1.0;
    params.common_b = 0.8;
    params.source_b = 1000.0;
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Instance inst = gen_random(params, seed);
        SparseOptions options;
        options.eps = 0.5;
        options.max_path_len = 3;
        options.k_override = 8;
        SparseResult result = solve_flsc_sparse(inst, options);
        if (!result.found) continue;
        BruteForceResult opt = brute_force_flsc(inst);
        CHECK(result.total_cost <= opt.cost + options.eps / 2 + 1e-9);
        ++checked;
    }
    CHECK(checked >= 3);
}

TEST_CASE("eligibility and guards") {
    Instance undirected("u", false, 2, {{0, 1, AffineFn{1.0, 0.0}}}, {{0, 1.0}},
                        FacilityCosts{1.0, {}});
    CHECK_THROWS_AS(solve_flsc_sparse(undirected, {}), std::invalid_argument);

    Instance good("g", true, 2, {{0, 1, SharedFixedFn{1.0, 1.0, 1.0}}}, {{0, 1.0}},
                  FacilityCosts{1.0, {}});
    CHECK_THROWS_AS(solve_flsc_sparse(good, {}), std::invalid_argument);

    SparseOptions tight;
    tight.eps = 0.5;
    tight.max_path_len = 2;
    tight.k_override = 8;
    tight.iteration_guard = 10;
    Instance diamond("d", true, 4,
                     {{0, 1, AffineFn{1.0, 0.0}},
                      {0, 2, AffineFn{1.0, 0.0}},
                      {1, 3, AffineFn{1.0, 0.0}},
                      {2, 3, AffineFn{1.0, 0.0}}},
                     {{0, 1.0}}, FacilityCosts{1.0, {}});
    CHECK_THROWS_WITH_AS(solve_flsc_sparse(diamond, tight), doctest::Contains("guard"),
                         std::runtime_error);
}
