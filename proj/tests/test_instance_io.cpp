#include <stdexcept>

#include "congfac/instance.hpp"
#include "congfac/reductions.hpp"
#include "doctest.h"

using namespace congfac;

namespace {

Instance pigou() {
    // s=0 with two routes: l(x)=x to node 1, l(x)=1 to node 2.
    return Instance("pigou", true, 3,
                    {{0, 1, AffineFn{1.0, 0.0}}, {0, 2, ConstantFn{1.0}}}, {{0, 1.0}},
                    FacilityCosts{std::nullopt, {1000.0, 0.1, 0.1}});
}

}  // namespace

TEST_CASE("construction enforces hard invariants") {
    CHECK_THROWS_AS(Instance("x", true, 2, {{0, 0, ConstantFn{1.0}}}, {{0, 1.0}},
                             FacilityCosts{0.0, {}}),
                    std::invalid_argument);  // self loop
    CHECK_THROWS_AS(Instance("x", true, 2, {{0, 3, ConstantFn{1.0}}}, {{0, 1.0}},
                             FacilityCosts{0.0, {}}),
                    std::invalid_argument);  // id out of range
    CHECK_THROWS_AS(Instance("x", true, 2, {{0, 1, ConstantFn{1.0}}}, {{0, -1.0}},
                             FacilityCosts{0.0, {}}),
                    std::invalid_argument);  // nonpositive demand
    CHECK_THROWS_AS(Instance("x", true, 2, {{0, 1, ConstantFn{1.0}}}, {},
                             FacilityCosts{0.0, {}}),
                    std::invalid_argument);  // no source
    CHECK_THROWS_AS(Instance("x", true, 2, {{0, 1, ConstantFn{1.0}}}, {{0, 1.0}, {0, 2.0}},
                             FacilityCosts{0.0, {}}),
                    std::invalid_argument);  // duplicate source
}

TEST_CASE("power-share floor defaults to the minimum source demand") {
    Instance inst("x", false, 2, {{0, 1, PowerShareFn{1.0, 0.5, 0.0}}}, {{0, 0.25}, {1, 2.0}},
                  FacilityCosts{1.0, {}});
    const auto& fn = std::get<PowerShareFn>(inst.edge(0).fn);
    CHECK(fn.w_floor == doctest::Approx(0.25));
}

TEST_CASE("serialization round-trips field for field") {
    GenParams params;
    for (int family = 0; family < 5; ++family) {
        params.family = static_cast<FnFamily>(family);
        params.directed = family % 2 == 0;
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            Instance inst = gen_random(params, seed);
            Instance back = parse_instance(serialize_instance(inst));
            CHECK(instance_equal(inst, back));
            ValidationReport report = validate_instance(inst);
            CHECK(report.issues.empty());
        }
    }
    // Per-node facility costs round-trip as per-node, common as common.
    Instance p = pigou();
    Instance back = parse_instance(serialize_instance(p));
    CHECK(instance_equal(p, back));
    CHECK_FALSE(back.facility_costs().common.has_value());
}

TEST_CASE("parsing is strict about unknown keys") {
    std::string good = serialize_instance(pigou());
    CHECK_NOTHROW(parse_instance(good));

    CHECK_THROWS_AS(parse_instance(R"({"directed":true,"n":2,"edges":[],"sources":[{"node":0,"w":1}],
        "facility_costs":{"common":1},"extra":1})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_instance(R"({"directed":true,"n":2,
        "edges":[{"u":0,"v":1,"fn":{"kind":"affine","a":1,"b":0,"c":3}}],
        "sources":[{"node":0,"w":1}],"facility_costs":{"common":1}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_instance(R"({"directed":true,"n":2,
        "edges":[{"u":0,"v":1,"fn":{"kind":"mystery"}}],
        "sources":[{"node":0,"w":1}],"facility_costs":{"common":1}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_instance("not json"), std::invalid_argument);
}

TEST_CASE("validation reports eligibility per solver") {
    // Two-node directed instance, one source, affine edge: sparse only.
    Instance sparse_ok("x", true, 2, {{0, 1, AffineFn{1.0, 0.0}}}, {{0, 1.0}},
                       FacilityCosts{1.0, {}});
    ValidationReport r1 = validate_instance(sparse_ok);
    CHECK(r1.eligible_sparse);
    CHECK_FALSE(r1.eligible_merge);

    // Undirected triangle with shared-fixed edges and common B: merge only.
    Instance merge_ok("y", false, 3,
                      {{0, 1, SharedFixedFn{1.0, 1.0, 1.0}},
                       {1, 2, SharedFixedFn{1.0, 1.0, 1.0}},
                       {0, 2, SharedFixedFn{1.0, 1.0, 1.0}}},
                      {{0, 1.0}, {1, 1.0}}, FacilityCosts{2.0, {}});
    ValidationReport r2 = validate_instance(merge_ok);
    CHECK(r2.eligible_merge);
    CHECK_FALSE(r2.eligible_sparse);

    // Mixed classes are eligible for neither, with "mixed class" as reason.
    Instance mixed("z", false, 3,
                   {{0, 1, AffineFn{1.0, 0.0}}, {1, 2, SharedFixedFn{1.0, 1.0, 1.0}}},
                   {{0, 1.0}}, FacilityCosts{2.0, {}});
    ValidationReport r3 = validate_instance(mixed);
    CHECK_FALSE(r3.eligible_sparse);
    CHECK_FALSE(r3.eligible_merge);
    CHECK(r3.merge_reason == "mixed class");

    // Unreachable facility candidates are reported.
    Instance unreachable("u", true, 3, {{0, 1, ConstantFn{1.0}}}, {{0, 1.0}},
                         FacilityCosts{1.0, {}});
    ValidationReport r4 = validate_instance(unreachable);
    REQUIRE(r4.unreachable_nodes.size() == 1);
    CHECK(r4.unreachable_nodes[0] == 2);
}

TEST_CASE("generated instances validate clean and are deterministic") {
    GenParams params;
    params.family = FnFamily::SharedFixed;
    params.n = 7;
    params.m = 10;
    params.n_sources = 3;
    Instance a = gen_random(params, 99);
    Instance b = gen_random(params, 99);
    CHECK(serialize_instance(a) == serialize_instance(b));
    ValidationReport report = validate_instance(a);
    for (const FnClass& cls : report.edge_classes) CHECK(cls.kind == FnClassKind::Good);
    CHECK(report.eligible_merge);

    GenParams tiny;
    tiny.n = 2;
    tiny.m = 1;
    tiny.n_sources = 1;
    Instance c = gen_random(tiny, 5);
    CHECK(c.num_edges() == 1);
    CHECK_THROWS_AS(gen_random(GenParams{4, 2, 1}, 1), std::invalid_argument);  // m < n-1
}
