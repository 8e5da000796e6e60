#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "congfac/equilibrium.hpp"
#include "congfac/merge_solver.hpp"
#include "congfac/oracle.hpp"
#include "congfac/reductions.hpp"
#include "congfac/sparse_solver.hpp"
#include "json.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using congfac::Instance;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << text;
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct LoadedInstance {
    Instance instance;
    std::string hash;
};

LoadedInstance load_instance(const std::string& path) {
    std::string text = read_file(path);
    return {congfac::parse_instance(text), fnv1a64_hex(text)};
}

ordered_json base_report(const std::string& command, const LoadedInstance* loaded) {
    ordered_json j;
    j["tool"] = "congfac";
    j["version"] = kVersion;
    j["command"] = command;
    if (loaded) {
        j["instance"] = loaded->instance.name();
        j["instance_hash"] = loaded->hash;
    }
    return j;
}

void emit(const ordered_json& report) { std::cout << report.dump(2) << "\n"; }

ordered_json solution_json(const Instance& inst, const congfac::Solution& sol) {
    return ordered_json::parse(congfac::solution_to_json(inst, sol));
}

std::vector<int> parse_id_list(const std::string& csv) {
    std::vector<int> ids;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        ids.push_back(std::stoi(item));
    }
    if (ids.empty()) throw std::invalid_argument("expected a comma-separated id list");
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

int default_threads() {
    if (const char* env = std::getenv("CONGFAC_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw std::invalid_argument("cannot write file: " + path);
        out << "k,seed,phases,routing_cost,facility_cost,total,wall_ms\n";
    }
    void row(int k, std::uint64_t seed, int phases, double routing, double facility, double total,
             double wall_ms) {
        out << k << "," << seed << "," << phases << "," << routing << "," << facility << ","
            << total << "," << wall_ms << "\n";
    }
};

ordered_json certificate_json(const congfac::NashCertificate& cert) {
    ordered_json j;
    j["holds"] = cert.holds;
    j["c_min"] = cert.c_min;
    j["c_max"] = cert.c_max;
    j["c_sp"] = cert.c_sp;
    j["min_path"] = cert.min_path;
    j["max_path"] = cert.max_path;
    j["sp_path"] = cert.sp_path;
    return j;
}

ordered_json phase_log_json(const congfac::PhaseLogEntry& entry) {
    ordered_json j;
    j["phase"] = entry.phase;
    j["matching_exact"] = entry.matching_exact;
    j["forced_pair"] = entry.forced_pair;
    j["pairs"] = ordered_json::array();
    for (const auto& p : entry.pairs)
        j["pairs"].push_back({{"u", p.u}, {"v", p.v}, {"z", p.meeting}, {"K", p.k_cost}});
    j["unmatched"] = entry.unmatched;
    j["movements"] = ordered_json::array();
    for (const auto& m : entry.movements) {
        ordered_json jm;
        jm["kind"] = m.kind == congfac::MovementKind::ToMeeting ? "to_meeting" : "back";
        jm["weight"] = m.weight;
        jm["path"] = m.path_nodes;
        jm["cost"] = m.cost;
        j["movements"].push_back(std::move(jm));
    }
    j["phase_cost"] = entry.phase_cost;
    return j;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"Solvers for facility location with congesting or selfish commuters"};
    app.require_subcommand(1);
    int threads = default_threads();
    app.add_option("--threads", threads, "worker threads (env CONGFAC_THREADS)");

    std::string instance_path, solution_path, out_path, csv_path, which;
    double eps = 0.25, tol = 1e-8, c_k = 1.0, poa = 1.0;
    int max_path_len = -1, k = 0, max_iters = 10000, repeats = 8, gap_k = 4, gap_d = 1;
    double gap_eps = 0.01;
    std::uint64_t seed = 0, guard_iters = 10000000;
    bool all_k = false, exhaustive = false;
    std::string facilities_csv, phase_log_path, family = "affine";
    congfac::GenParams gen_params;

    auto* validate = app.add_subcommand("validate", "check an instance and report eligibility");
    validate->add_option("instance", instance_path)->required();

    auto* solve = app.add_subcommand("solve", "run an approximation solver");
    solve->require_subcommand(1);
    auto* sparse = solve->add_subcommand("sparse", "k-multiset search for single-source FLSC");
    sparse->add_option("instance", instance_path)->required();
    sparse->add_option("--eps", eps, "target equilibrium slack")->check(CLI::PositiveNumber);
    sparse->add_option("--max-path-len", max_path_len, "path length cap M (default n-1)");
    sparse->add_option("--k", k, "override the multiset size formula");
    sparse->add_option("--c-k", c_k, "constant in the k formula");
    sparse->add_option("--guard-iters", guard_iters, "multiset count guard");

    auto* merge = solve->add_subcommand("merge", "matching-and-merge scheme for good FLCC");
    merge->add_option("instance", instance_path)->required();
    merge->add_option("--seed", seed, "PRNG seed")->required();
    merge->add_option("--k", k, "facility count for the k-median variant");
    merge->add_flag("--all-k", all_k, "sweep k = 1..|S| and keep the best total");
    merge->add_option("--repeats", repeats, "independent repetitions per k");
    merge->add_option("--emit-phase-log", phase_log_path, "write one JSON object per phase");
    merge->add_option("--csv", csv_path, "write per-run rows to this CSV file");

    auto* nash = app.add_subcommand("nash", "Nash flow for a fixed facility set");
    nash->add_option("instance", instance_path)->required();
    nash->add_option("--facilities", facilities_csv, "comma-separated node ids")->required();
    nash->add_option("--tol", tol, "duality gap target, scaled by total demand");
    nash->add_option("--max-iters", max_iters);

    auto* verify = app.add_subcommand("verify-nash", "check a solution for eps-Nash");
    verify->add_option("instance", instance_path)->required();
    verify->add_option("--solution", solution_path, "solution JSON file")->required();
    verify->add_option("--eps", eps)->required()->check(CLI::NonNegativeNumber);
    verify->add_flag("--exhaustive", exhaustive, "literal definition over all path pairs");

    auto* oracle = app.add_subcommand("oracle", "exact brute-force baselines (desk scale)");
    oracle->add_option("which", which, "flcc | flsc | routing-good | routing-convex | cost-distance")
        ->required();
    oracle->add_option("file", instance_path)->required();
    oracle->add_option("--facilities", facilities_csv, "for the routing oracles");
    oracle->add_option("--tol", tol, "for the convex routing oracle");
    oracle->add_option("--poa", poa, "report the FLSC bound at this price of anarchy");

    auto* reduce = app.add_subcommand("reduce", "Cost-Distance -> FLCC reduction");
    reduce->add_option("file", instance_path, "Cost-Distance JSON")->required();
    reduce->add_option("-o,--out", out_path, "write the reduced instance here");

    auto* gen = app.add_subcommand("gen", "instance generators");
    gen->require_subcommand(1);
    auto* local_gap = gen->add_subcommand("local-gap", "local-search counterexample");
    local_gap->add_option("--k", gap_k, "number of sources")->required();
    local_gap->add_option("--d", gap_d, "polynomial degree")->required();
    local_gap->add_option("--eps", gap_eps, "opening cost of the private facilities");
    local_gap->add_option("-o,--out", out_path);
    auto* random = gen->add_subcommand("random", "seeded connected random instance");
    random->add_option("--seed", seed)->required();
    random->add_option("--n", gen_params.n);
    random->add_option("--m", gen_params.m);
    random->add_option("--sources", gen_params.n_sources);
    random->add_option("--family", family, "constant|affine|polynomial|shared_fixed|power_share");
    random->add_flag("--directed", gen_params.directed);
    random->add_option("--w-min", gen_params.w_min);
    random->add_option("--w-max", gen_params.w_max);
    random->add_option("--coef-min", gen_params.coef_min);
    random->add_option("--coef-max", gen_params.coef_max);
    random->add_option("--b", gen_params.common_b, "common facility cost");
    random->add_option("--source-b", gen_params.source_b,
                       "per-node costs with sources priced at this value");
    random->add_option("-o,--out", out_path);

    auto* bench = app.add_subcommand("bench", "timed merge sweep, rows to CSV");
    bench->add_option("instance", instance_path)->required();
    bench->add_option("--seed", seed)->required();
    bench->add_option("--repeats", repeats);
    bench->add_option("--csv", csv_path, "CSV output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*validate) {
        LoadedInstance loaded = load_instance(instance_path);
        congfac::ValidationReport report = congfac::validate_instance(loaded.instance);
        ordered_json j = base_report("validate", &loaded);
        j["issues"] = report.issues;
        j["unreachable_nodes"] = report.unreachable_nodes;
        j["edge_classes"] = ordered_json::array();
        for (const auto& cls : report.edge_classes) {
            ordered_json jc;
            jc["class"] = congfac::fn_class_name(cls.kind);
            if (cls.kind == congfac::FnClassKind::NondecreasingLipschitz)
                jc["lipschitz"] = cls.lipschitz;
            j["edge_classes"].push_back(std::move(jc));
        }
        ordered_json eligible = ordered_json::array();
        if (report.eligible_sparse) eligible.push_back("sparse_solver");
        if (report.eligible_merge) eligible.push_back("merge_solver");
        j["eligible"] = eligible;
        if (!report.eligible_sparse) j["sparse_reason"] = report.sparse_reason;
        if (!report.eligible_merge) j["merge_reason"] = report.merge_reason;
        emit(j);
        return 0;
    }

    if (*sparse) {
        LoadedInstance loaded = load_instance(instance_path);
        congfac::SparseOptions options;
        options.eps = eps;
        options.max_path_len = max_path_len;
        if (sparse->count("--k")) options.k_override = k;
        options.c_k = c_k;
        options.iteration_guard = guard_iters;
        options.threads = threads;
        congfac::SparseResult result = congfac::solve_flsc_sparse(loaded.instance, options);
        ordered_json j = base_report("solve sparse", &loaded);
        j["params"] = {{"eps", result.params.eps},
                       {"a", result.params.a},
                       {"max_path_len", result.params.max_path_len},
                       {"k", result.params.k},
                       {"c_k", result.params.c_k}};
        j["combinations"] = result.combinations;
        j["found"] = result.found;
        if (!result.found) {
            j["error"] = "no candidate passed the eps-Nash test; raise --eps or --max-path-len";
            emit(j);
            return 2;
        }
        j["total_cost"] = result.total_cost;
        j["multiset"] = result.best_multiset;
        j["certificate"] = certificate_json(result.certificate);
        j["solution"] = solution_json(loaded.instance, result.solution);
        emit(j);
        return 0;
    }

    if (*merge) {
        LoadedInstance loaded = load_instance(instance_path);
        std::optional<CsvWriter> csv;
        if (!csv_path.empty()) csv.emplace(csv_path);
        ordered_json j = base_report("solve merge", &loaded);
        j["seed"] = seed;
        j["repeats"] = repeats;
        std::vector<congfac::PhaseLogEntry> log;
        if (all_k) {
            congfac::MergeResult result =
                congfac::solve_flcc_merge(loaded.instance, seed, repeats, threads);
            j["k"] = result.k;
            j["phases"] = result.phases;
            j["routing_cost"] = result.routing_cost;
            j["facility_cost"] = result.facility_cost;
            j["total_cost"] = result.total_cost;
            j["sweep"] = ordered_json::array();
            for (const auto& row : result.sweep) {
                j["sweep"].push_back({{"k", row.k},
                                      {"phases", row.phases},
                                      {"routing_cost", row.routing_cost},
                                      {"facility_cost", row.facility_cost},
                                      {"total", row.total_cost}});
                if (csv)
                    csv->row(row.k, seed, row.phases, row.routing_cost, row.facility_cost,
                             row.total_cost, row.wall_ms);
            }
            j["solution"] = solution_json(loaded.instance, result.solution);
            log = std::move(result.phase_log);
        } else {
            if (k < 1) throw std::invalid_argument("solve merge: give --k or --all-k");
            auto t0 = std::chrono::steady_clock::now();
            congfac::KMedianResult result =
                congfac::solve_k_median(loaded.instance, k, seed, repeats, threads);
            auto t1 = std::chrono::steady_clock::now();
            j["k"] = k;
            j["phases"] = result.phases;
            j["routing_cost"] = result.routing_cost;
            j["best_run"] = result.best_run;
            j["run_costs"] = result.run_costs;
            j["solution"] = solution_json(loaded.instance, result.solution);
            if (csv)
                csv->row(k, seed, result.phases, result.routing_cost, 0.0, result.routing_cost,
                         std::chrono::duration<double, std::milli>(t1 - t0).count());
            log = std::move(result.phase_log);
        }
        if (!phase_log_path.empty()) {
            std::string lines;
            for (const auto& entry : log) lines += phase_log_json(entry).dump() + "\n";
            write_file(phase_log_path, lines);
        }
        emit(j);
        return 0;
    }

    if (*nash) {
        LoadedInstance loaded = load_instance(instance_path);
        std::vector<int> facilities = parse_id_list(facilities_csv);
        congfac::EquilibriumResult eq =
            congfac::nash_flow(loaded.instance, facilities, tol, max_iters);
        ordered_json j = base_report("nash", &loaded);
        j["facilities"] = facilities;
        j["converged"] = eq.converged;
        j["iterations"] = eq.iterations;
        j["potential"] = eq.potential_value;
        j["duality_gap"] = eq.gap;
        j["certified_eps"] = eq.certified_eps;
        congfac::Solution sol{facilities, eq.assignment};
        j["routing_cost"] = congfac::routing_cost(loaded.instance,
                                                  congfac::edge_flow(loaded.instance, eq.assignment));
        j["solution"] = solution_json(loaded.instance, sol);
        emit(j);
        return eq.converged ? 0 : 2;
    }

    if (*verify) {
        LoadedInstance loaded = load_instance(instance_path);
        congfac::Solution sol =
            congfac::solution_from_json(loaded.instance, read_file(solution_path));
        ordered_json j = base_report("verify-nash", &loaded);
        j["eps"] = eps;
        if (exhaustive) {
            j["mode"] = "exhaustive";
            j["holds"] = congfac::verify_eps_nash_exhaustive(loaded.instance, sol, eps);
        } else {
            j["mode"] = "dag";
            congfac::NashCertificate cert = congfac::verify_eps_nash(loaded.instance, sol, eps);
            j["holds"] = cert.holds;
            j["certificate"] = certificate_json(cert);
        }
        emit(j);
        return 0;
    }

    if (*oracle) {
        if (which == "cost-distance") {
            std::string text = read_file(instance_path);
            congfac::CostDistanceInstance cd = congfac::parse_cost_distance(text);
            congfac::CostDistanceOracleResult result = congfac::brute_force_cost_distance(cd);
            ordered_json j = base_report("oracle cost-distance", nullptr);
            j["instance"] = cd.name;
            j["instance_hash"] = fnv1a64_hex(text);
            j["edges"] = result.edges;
            j["cost"] = result.cost;
            emit(j);
            return 0;
        }
        LoadedInstance loaded = load_instance(instance_path);
        ordered_json j = base_report("oracle " + which, &loaded);
        if (which == "flcc" || which == "flsc") {
            congfac::BruteForceResult result = which == "flcc"
                                                   ? congfac::brute_force_flcc(loaded.instance)
                                                   : congfac::brute_force_flsc(loaded.instance);
            j["facilities"] = result.facilities;
            j["cost"] = result.cost;
            j["warnings"] = result.warnings;
            double routing = congfac::routing_cost(
                loaded.instance, congfac::edge_flow(loaded.instance, result.solution.assignment));
            j["routing_cost"] = routing;
            if (oracle->count("--poa"))
                j["flsc_bound"] = congfac::report_flsc_bound(routing, result.cost - routing, poa);
            j["solution"] = solution_json(loaded.instance, result.solution);
        } else if (which == "routing-good" || which == "routing-convex") {
            std::vector<int> facilities = parse_id_list(facilities_csv);
            congfac::RoutingOracleResult result =
                which == "routing-good"
                    ? congfac::min_routing_fixed_F_good(loaded.instance, facilities)
                    : congfac::min_routing_fixed_F_convex(loaded.instance, facilities, tol);
            j["facilities"] = facilities;
            j["cost"] = result.cost;
            j["solution"] =
                solution_json(loaded.instance, congfac::Solution{facilities, result.assignment});
        } else {
            throw std::invalid_argument("unknown oracle \"" + which + "\"");
        }
        emit(j);
        return 0;
    }

    if (*reduce) {
        std::string text = read_file(instance_path);
        congfac::CostDistanceInstance cd = congfac::parse_cost_distance(text);
        Instance reduced = congfac::reduce_cost_distance(cd);
        std::string serialized = congfac::serialize_instance(reduced);
        ordered_json j = base_report("reduce", nullptr);
        j["instance"] = cd.name;
        j["instance_hash"] = fnv1a64_hex(text);
        j["opening_cost"] = congfac::reduction_opening_cost(cd);
        j["sources"] = reduced.sources().size();
        if (out_path.empty())
            j["reduced"] = ordered_json::parse(serialized);
        else
            write_file(out_path, serialized);
        emit(j);
        return 0;
    }

    if (*local_gap) {
        Instance inst = congfac::gen_local_search_gap(gap_k, gap_d, gap_eps);
        std::string serialized = congfac::serialize_instance(inst);
        ordered_json j = base_report("gen local-gap", nullptr);
        j["instance"] = inst.name();
        j["instance_hash"] = fnv1a64_hex(serialized);
        j["n"] = inst.num_nodes();
        j["hub"] = 2 * gap_k;
        j["hub_cost"] = inst.facility_cost(2 * gap_k);
        if (out_path.empty())
            j["generated"] = ordered_json::parse(serialized);
        else
            write_file(out_path, serialized);
        emit(j);
        return 0;
    }

    if (*random) {
        gen_params.family = congfac::fn_family_from_name(family);
        Instance inst = congfac::gen_random(gen_params, seed);
        std::string serialized = congfac::serialize_instance(inst);
        ordered_json j = base_report("gen random", nullptr);
        j["seed"] = seed;
        j["instance"] = inst.name();
        j["instance_hash"] = fnv1a64_hex(serialized);
        if (out_path.empty())
            j["generated"] = ordered_json::parse(serialized);
        else
            write_file(out_path, serialized);
        emit(j);
        return 0;
    }

    if (*bench) {
        LoadedInstance loaded = load_instance(instance_path);
        CsvWriter csv(csv_path);
        congfac::MergeResult result =
            congfac::solve_flcc_merge(loaded.instance, seed, repeats, threads);
        for (const auto& row : result.sweep)
            csv.row(row.k, seed, row.phases, row.routing_cost, row.facility_cost, row.total_cost,
                    row.wall_ms);
        ordered_json j = base_report("bench", &loaded);
        j["seed"] = seed;
        j["repeats"] = repeats;
        j["best_k"] = result.k;
        j["best_total"] = result.total_cost;
        j["rows"] = result.sweep.size();
        emit(j);
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const congfac::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const congfac::NotADagError& e) {
        std::cerr << "not a DAG: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
