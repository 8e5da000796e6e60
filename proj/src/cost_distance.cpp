#include "congfac/cost_distance.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace congfac {

namespace {
[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

void check_cost_distance(const CostDistanceInstance& cd) {
    if (cd.num_nodes < 1) bad("cost-distance: node count must be positive");
    if (cd.sink < 0 || cd.sink >= cd.num_nodes) bad("cost-distance: sink out of range");
    if (cd.sources.empty()) bad("cost-distance: at least one source required");
    std::set<int> seen;
    for (const auto& s : cd.sources) {
        if (s.node < 0 || s.node >= cd.num_nodes) bad("cost-distance: source out of range");
        if (!(s.demand > 0.0)) bad("cost-distance: demands must be strictly positive");
        if (!seen.insert(s.node).second) bad("cost-distance: duplicate source node");
    }
    for (const auto& e : cd.edges) {
        if (e.u < 0 || e.u >= cd.num_nodes || e.v < 0 || e.v >= cd.num_nodes)
            bad("cost-distance: edge endpoint out of range");
        if (e.u == e.v) bad("cost-distance: self-loops are not allowed");
        if (e.cost < 0.0 || e.length < 0.0) bad("cost-distance: costs and lengths must be nonnegative");
    }
}

CostDistanceInstance parse_cost_distance(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        bad(std::string("cost-distance: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) bad("cost-distance: expected a JSON object");
    for (const auto& item : j.items()) {
        const std::string& k = item.key();
        if (k != "name" && k != "n" && k != "edges" && k != "sources" && k != "sink")
            bad("cost-distance: unknown key \"" + k + "\"");
    }
    for (const char* k : {"edges", "sources", "sink"})
        if (!j.contains(k)) bad(std::string("cost-distance: missing key \"") + k + "\"");

    CostDistanceInstance cd;
    if (j.contains("name")) cd.name = j.at("name").get<std::string>();
    cd.sink = j.at("sink").get<int>();
    int max_id = cd.sink;
    for (const auto& je : j.at("edges")) {
        for (const auto& item : je.items()) {
            const std::string& k = item.key();
            if (k != "u" && k != "v" && k != "c" && k != "l")
                bad("cost-distance edge: unknown key \"" + k + "\"");
        }
        CostDistanceEdge e{je.at("u").get<int>(), je.at("v").get<int>(), je.at("c").get<double>(),
                           je.at("l").get<double>()};
        max_id = std::max({max_id, e.u, e.v});
        cd.edges.push_back(e);
    }
    for (const auto& js : j.at("sources")) {
        for (const auto& item : js.items()) {
            const std::string& k = item.key();
            if (k != "node" && k != "w") bad("cost-distance source: unknown key \"" + k + "\"");
        }
        CostDistanceSource s{js.at("node").get<int>(), js.at("w").get<double>()};
        max_id = std::max(max_id, s.node);
        cd.sources.push_back(s);
    }
    cd.num_nodes = j.contains("n") ? j.at("n").get<int>() : max_id + 1;
    check_cost_distance(cd);
    return cd;
}

std::string serialize_cost_distance(const CostDistanceInstance& cd) {
    nlohmann::ordered_json j;
    j["name"] = cd.name;
    j["n"] = cd.num_nodes;
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : cd.edges)
        j["edges"].push_back({{"u", e.u}, {"v", e.v}, {"c", e.cost}, {"l", e.length}});
    j["sources"] = nlohmann::ordered_json::array();
    for (const auto& s : cd.sources) j["sources"].push_back({{"node", s.node}, {"w", s.demand}});
    j["sink"] = cd.sink;
    return j.dump(2) + "\n";
}

}  // namespace congfac
