#include "congfac/instance.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace congfac {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

Instance::Instance(std::string name, bool directed, int num_nodes, std::vector<Edge> edges,
                   std::vector<SourceDemand> sources, FacilityCosts facility_costs)
    : name_(std::move(name)),
      directed_(directed),
      n_(num_nodes),
      edges_(std::move(edges)),
      sources_(std::move(sources)),
      facility_costs_(std::move(facility_costs)) {
    if (n_ < 1) bad("instance: node count must be positive");
    if (sources_.empty()) bad("instance: at least one source required");

    std::set<int> seen_sources;
    total_demand_ = 0.0;
    min_demand_ = std::numeric_limits<double>::infinity();
    for (const auto& s : sources_) {
        if (s.node < 0 || s.node >= n_) bad("instance: source node id out of range");
        if (!(s.demand > 0.0)) bad("instance: demands must be strictly positive");
        if (!seen_sources.insert(s.node).second) bad("instance: duplicate source node");
        total_demand_ += s.demand;
        min_demand_ = std::min(min_demand_, s.demand);
    }

    for (auto& e : edges_) {
        if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_) bad("instance: edge endpoint out of range");
        if (e.u == e.v) bad("instance: self-loops are not allowed");
        // PowerShare floors default to the minimum source demand when unset.
        if (auto* ps = std::get_if<PowerShareFn>(&e.fn); ps && ps->w_floor <= 0.0)
            ps->w_floor = min_demand_;
        check_cost_fn(e.fn);
    }

    if (facility_costs_.common) {
        if (*facility_costs_.common < 0.0) bad("instance: facility cost must be nonnegative");
        if (!facility_costs_.per_node.empty()) bad("instance: give common or per-node costs, not both");
    } else {
        if (static_cast<int>(facility_costs_.per_node.size()) != n_)
            bad("instance: per-node facility costs must have one entry per node");
        for (double b : facility_costs_.per_node)
            if (b < 0.0) bad("instance: facility cost must be nonnegative");
    }

    adjacency_.assign(static_cast<std::size_t>(n_), {});
    for (int e = 0; e < num_edges(); ++e) {
        const Edge& ed = edges_[static_cast<std::size_t>(e)];
        adjacency_[static_cast<std::size_t>(ed.u)].push_back({ed.v, e});
        if (!directed_) adjacency_[static_cast<std::size_t>(ed.v)].push_back({ed.u, e});
    }
    for (auto& arcs : adjacency_)
        std::sort(arcs.begin(), arcs.end(),
                  [](const Arc& a, const Arc& b) { return a.to != b.to ? a.to < b.to : a.edge < b.edge; });
}

std::optional<double> Instance::common_facility_cost() const {
    if (facility_costs_.common) return facility_costs_.common;
    // An all-equal per-node vector is a common cost in disguise.
    double first = facility_costs_.per_node.front();
    for (double b : facility_costs_.per_node)
        if (b != first) return std::nullopt;
    return first;
}

bool instance_equal(const Instance& a, const Instance& b) {
    if (a.name() != b.name() || a.directed() != b.directed() || a.num_nodes() != b.num_nodes())
        return false;
    if (a.num_edges() != b.num_edges() || a.sources().size() != b.sources().size()) return false;
    for (int e = 0; e < a.num_edges(); ++e) {
        const Edge& x = a.edge(e);
        const Edge& y = b.edge(e);
        if (x.u != y.u || x.v != y.v || !fn_equal(x.fn, y.fn)) return false;
    }
    for (std::size_t i = 0; i < a.sources().size(); ++i) {
        if (a.sources()[i].node != b.sources()[i].node) return false;
        if (a.sources()[i].demand != b.sources()[i].demand) return false;
    }
    if (a.facility_costs().common.has_value() != b.facility_costs().common.has_value()) return false;
    if (a.facility_costs().common)
        return *a.facility_costs().common == *b.facility_costs().common;
    return a.facility_costs().per_node == b.facility_costs().per_node;
}

ValidationReport validate_instance(const Instance& inst) {
    ValidationReport report;
    const double demand = inst.total_demand();

    bool all_nondecreasing = true;
    bool all_good = true;
    report.edge_classes.reserve(static_cast<std::size_t>(inst.num_edges()));
    for (const auto& e : inst.edges()) {
        FnClass cls = classify(e.fn, demand);
        report.edge_classes.push_back(cls);
        all_nondecreasing = all_nondecreasing && cls.kind == FnClassKind::NondecreasingLipschitz;
        all_good = all_good && cls.kind == FnClassKind::Good;
    }

    // Nodes no source can reach cannot host a useful facility.
    std::vector<char> reachable(static_cast<std::size_t>(inst.num_nodes()), 0);
    std::vector<int> stack;
    for (const auto& s : inst.sources()) {
        if (reachable[static_cast<std::size_t>(s.node)]) continue;
        reachable[static_cast<std::size_t>(s.node)] = 1;
        stack.push_back(s.node);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (const Arc& arc : inst.out_arcs(u)) {
                if (!reachable[static_cast<std::size_t>(arc.to)]) {
                    reachable[static_cast<std::size_t>(arc.to)] = 1;
                    stack.push_back(arc.to);
                }
            }
        }
    }
    for (int v = 0; v < inst.num_nodes(); ++v)
        if (!reachable[static_cast<std::size_t>(v)]) report.unreachable_nodes.push_back(v);
    if (!report.unreachable_nodes.empty())
        report.issues.push_back("some facility candidates are unreachable from every source");

    bool mixed = !all_nondecreasing && !all_good;

    if (inst.sources().size() != 1)
        report.sparse_reason = "requires a single source";
    else if (!inst.directed())
        report.sparse_reason = "requires a directed network";
    else if (mixed)
        report.sparse_reason = "mixed class";
    else if (!all_nondecreasing)
        report.sparse_reason = "requires nondecreasing Lipschitz cost functions on every edge";
    report.eligible_sparse = report.sparse_reason.empty();

    if (inst.directed())
        report.merge_reason = "requires an undirected network";
    else if (mixed)
        report.merge_reason = "mixed class";
    else if (!all_good)
        report.merge_reason = "requires good cost functions on every edge";
    else if (!inst.common_facility_cost())
        report.merge_reason = "requires a common facility opening cost";
    report.eligible_merge = report.merge_reason.empty();

    return report;
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const std::string& where) {
    if (!obj.is_object()) bad(where + ": expected a JSON object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key())) bad(where + ": unknown key \"" + item.key() + "\"");
    for (const auto& key : required)
        if (!obj.contains(key)) bad(where + ": missing key \"" + key + "\"");
}

double get_number(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number()) bad(where + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

CostFn parse_fn(const json& j, const std::string& where) {
    require_keys(j, {"kind", "a", "b", "coeffs", "c", "l", "w_min", "beta", "w_floor"}, {"kind"},
                 where);
    std::string kind = j.at("kind").get<std::string>();
    CostFn fn;
    if (kind == "constant") {
        require_keys(j, {"kind", "b"}, {"kind", "b"}, where);
        fn = ConstantFn{get_number(j, "b", where)};
    } else if (kind == "affine") {
        require_keys(j, {"kind", "a", "b"}, {"kind", "a", "b"}, where);
        fn = AffineFn{get_number(j, "a", where), get_number(j, "b", where)};
    } else if (kind == "polynomial") {
        require_keys(j, {"kind", "coeffs"}, {"kind", "coeffs"}, where);
        PolynomialFn p;
        for (const auto& c : j.at("coeffs")) p.coeffs.push_back(c.get<double>());
        fn = std::move(p);
    } else if (kind == "shared_fixed") {
        require_keys(j, {"kind", "c", "l", "w_min"}, {"kind", "c", "l", "w_min"}, where);
        fn = SharedFixedFn{get_number(j, "c", where), get_number(j, "l", where),
                           get_number(j, "w_min", where)};
    } else if (kind == "power_share") {
        require_keys(j, {"kind", "c", "beta", "w_floor"}, {"kind", "c", "beta"}, where);
        // w_floor may be omitted; the instance fills in the min source demand.
        double w_floor = j.contains("w_floor") ? get_number(j, "w_floor", where) : 0.0;
        fn = PowerShareFn{get_number(j, "c", where), get_number(j, "beta", where), w_floor};
    } else {
        bad(where + ": unknown cost function kind \"" + kind + "\"");
    }
    return fn;
}

ordered_json fn_to_json(const CostFn& fn) {
    ordered_json j;
    j["kind"] = fn_kind_name(fn);
    if (const auto* f = std::get_if<ConstantFn>(&fn)) {
        j["b"] = f->b;
    } else if (const auto* f = std::get_if<AffineFn>(&fn)) {
        j["a"] = f->a;
        j["b"] = f->b;
    } else if (const auto* f = std::get_if<PolynomialFn>(&fn)) {
        j["coeffs"] = f->coeffs;
    } else if (const auto* f = std::get_if<SharedFixedFn>(&fn)) {
        j["c"] = f->c;
        j["l"] = f->l;
        j["w_min"] = f->w_min;
    } else {
        const auto& ps = std::get<PowerShareFn>(fn);
        j["c"] = ps.c;
        j["beta"] = ps.beta;
        j["w_floor"] = ps.w_floor;
    }
    return j;
}

}  // namespace

Instance parse_instance(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("instance: invalid JSON: ") + e.what());
    }
    require_keys(j, {"name", "directed", "n", "edges", "sources", "facility_costs"},
                 {"directed", "n", "edges", "sources", "facility_costs"}, "instance");

    std::string name = j.contains("name") ? j.at("name").get<std::string>() : "";
    bool directed = j.at("directed").get<bool>();
    int n = j.at("n").get<int>();

    std::vector<Edge> edges;
    for (const auto& je : j.at("edges")) {
        require_keys(je, {"u", "v", "fn"}, {"u", "v", "fn"}, "edge");
        edges.push_back({je.at("u").get<int>(), je.at("v").get<int>(), parse_fn(je.at("fn"), "fn")});
    }

    std::vector<SourceDemand> sources;
    for (const auto& js : j.at("sources")) {
        require_keys(js, {"node", "w"}, {"node", "w"}, "source");
        sources.push_back({js.at("node").get<int>(), get_number(js, "w", "source")});
    }

    const auto& jc = j.at("facility_costs");
    FacilityCosts costs;
    if (jc.contains("common")) {
        require_keys(jc, {"common"}, {"common"}, "facility_costs");
        costs.common = get_number(jc, "common", "facility_costs");
    } else {
        require_keys(jc, {"per_node"}, {"per_node"}, "facility_costs");
        for (const auto& b : jc.at("per_node")) costs.per_node.push_back(b.get<double>());
    }

    return Instance(std::move(name), directed, n, std::move(edges), std::move(sources),
                    std::move(costs));
}

std::string serialize_instance(const Instance& inst) {
    ordered_json j;
    j["name"] = inst.name();
    j["directed"] = inst.directed();
    j["n"] = inst.num_nodes();
    j["edges"] = ordered_json::array();
    for (const auto& e : inst.edges()) {
        ordered_json je;
        je["u"] = e.u;
        je["v"] = e.v;
        je["fn"] = fn_to_json(e.fn);
        j["edges"].push_back(std::move(je));
    }
    j["sources"] = ordered_json::array();
    for (const auto& s : inst.sources()) {
        ordered_json js;
        js["node"] = s.node;
        js["w"] = s.demand;
        j["sources"].push_back(std::move(js));
    }
    if (inst.facility_costs().common)
        j["facility_costs"] = ordered_json{{"common", *inst.facility_costs().common}};
    else
        j["facility_costs"] = ordered_json{{"per_node", inst.facility_costs().per_node}};
    return j.dump(2) + "\n";
}

}  // namespace congfac
