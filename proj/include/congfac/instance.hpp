#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "congfac/cost_fn.hpp"

namespace congfac {

struct Edge {
    int u = -1;
    int v = -1;
    CostFn fn;
};

struct SourceDemand {
    int node = -1;
    double demand = 0.0;  // > 0
};

// Facility opening costs: either one common value for every node or an
// explicit per-node vector. Both forms round-trip through the file format.
struct FacilityCosts {
    std::optional<double> common;
    std::vector<double> per_node;  // size n when common is absent
};

// Thrown when a requested computation has no feasible answer (unreachable
// facilities, disconnected reductions, ...). CLI maps it to exit code 2.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Arc {
    int to = -1;
    int edge = -1;
};

// A problem instance: graph, edge cost functions, source demands, and
// facility opening costs. Instances are immutable after construction and
// safe to share across threads.
class Instance {
public:
    Instance(std::string name, bool directed, int num_nodes, std::vector<Edge> edges,
             std::vector<SourceDemand> sources, FacilityCosts facility_costs);

    const std::string& name() const { return name_; }
    bool directed() const { return directed_; }
    int num_nodes() const { return n_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
    const std::vector<SourceDemand>& sources() const { return sources_; }
    const FacilityCosts& facility_costs() const { return facility_costs_; }

    double facility_cost(int node) const {
        return facility_costs_.common ? *facility_costs_.common
                                      : facility_costs_.per_node[static_cast<std::size_t>(node)];
    }
    std::optional<double> common_facility_cost() const;

    double total_demand() const { return total_demand_; }
    double min_source_demand() const { return min_demand_; }

    // Arcs leaving `node`; for undirected instances each edge contributes an
    // arc in both directions, sorted by (to, edge) for deterministic scans.
    const std::vector<Arc>& out_arcs(int node) const {
        return adjacency_[static_cast<std::size_t>(node)];
    }

private:
    std::string name_;
    bool directed_ = false;
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<SourceDemand> sources_;
    FacilityCosts facility_costs_;
    double total_demand_ = 0.0;
    double min_demand_ = 0.0;
    std::vector<std::vector<Arc>> adjacency_;
};

bool instance_equal(const Instance& a, const Instance& b);

// Per-solver eligibility plus structural findings. Report-only: building the
// report never throws.
struct ValidationReport {
    std::vector<std::string> issues;       // warnings; empty means clean
    std::vector<FnClass> edge_classes;     // one per edge, at W = total demand
    std::vector<int> unreachable_nodes;    // reachable from no source
    bool eligible_sparse = false;          // |S| = 1, directed, all nondecreasing-Lipschitz
    bool eligible_merge = false;           // undirected, all good, common opening cost
    std::string sparse_reason;             // empty when eligible
    std::string merge_reason;
};

ValidationReport validate_instance(const Instance& inst);

// JSON file format (strict: unknown keys are errors):
//   {"name": ..., "directed": ..., "n": ...,
//    "edges": [{"u","v","fn":{"kind",...}}],
//    "sources": [{"node","w"}],
//    "facility_costs": {"common": B} | {"per_node": [...]}}
Instance parse_instance(const std::string& text);
std::string serialize_instance(const Instance& inst);

}  // namespace congfac
