#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ringdiag/diagnosis.hpp"
#include "ringdiag/experiments.hpp"
#include "ringdiag/ring.hpp"
#include "ringdiag/serialize.hpp"
#include "ringdiag/topology_io.hpp"
#include "ringdiag/walk.hpp"

namespace {

using namespace ringdiag;

void emit(const std::string& data, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << data;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw error("cannot open output file: " + out_path);
    f << data;
}

SwitchId parse_switch(const Topology& t, const std::string& token) {
    for (SwitchId s = 0; s < t.num_switches(); ++s)
        if (s < t.labels.size() && t.labels[s] == token) return s;
    try {
        unsigned long v = std::stoul(token);
        if (v < t.num_switches()) return static_cast<SwitchId>(v);
    } catch (...) {
    }
    throw error("unknown switch: " + token);
}

std::pair<SwitchId, SwitchId> parse_pair(const Topology& t, const std::string& spec) {
    auto comma = spec.find(',');
    if (comma == std::string::npos) throw error("expected u,v but got: " + spec);
    return {parse_switch(t, spec.substr(0, comma)), parse_switch(t, spec.substr(comma + 1))};
}

EdgeId find_edge(const Topology& t, SwitchId u, SwitchId v) {
    for (const Edge& e : t.edges)
        if ((e.a == u && e.b == v) || (e.a == v && e.b == u)) return e.id;
    throw error("no edge between " + t.label(u) + " and " + t.label(v));
}

Strategy parse_strategy(const std::string& s) {
    if (s == "single" || s == "sequential") return Strategy::single;
    if (s == "parallel") return Strategy::parallel;
    if (s == "bidirectional") return Strategy::bidirectional;
    if (s == "multi") return Strategy::multi;
    throw error("unknown strategy: " + s);
}

// re-run one recorded probe against the fabric and dump its packet trace
std::string replay_trace(const RingView& ring, const InjectionPlan& plan,
                         const ProbeRecord& rec, const FailureState& fail) {
    std::size_t idx = 0;
    while (idx < plan.points.size() && plan.points[idx] != rec.from) ++idx;
    if (idx == plan.points.size()) return "";
    const Fabric& fabric = plan.fabrics[idx];
    ProbeOutcome out;
    if (rec.kind == "verify" && rec.direction == "cw")
        out = fabric.inject(ring.cw_start_arc(rec.from), ring.verify_header(rec.from), fail);
    else if (rec.kind == "verify")
        out = fabric.inject(ring.ccw_start_arc(rec.from), ring.ccw_lap_header(rec.from), fail);
    else if (rec.direction == "cw")
        out = fabric.inject(ring.cw_start_arc(rec.from),
                            ring.cw_bounce_header(rec.from, *rec.target), fail);
    else
        out = fabric.inject(ring.ccw_start_arc(rec.from),
                            ring.ccw_bounce_header(rec.from, *rec.target), fail);
    return trace_jsonl(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static-rule diagnostic rings for forwarding planes"};
    app.require_subcommand(1);

    std::string corpus_dir;
    std::string out_path;
    std::string format = "csv";
    double tau_us = 100.0;
    std::size_t m = 1;
    std::size_t k = 4;
    std::size_t max_edges = 20;
    std::size_t pattern_cap = 200000;
    std::uint64_t seed = 0;
    bool asymmetric = false;
    bool verbose = false;
    bool strict = false;
    bool force_exact = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "write output to a file instead of stdout");
        cmd->add_option("--format", format, "output format: json or csv")
            ->check(CLI::IsMember({"json", "csv", "table"}));
        cmd->add_option("--tau-us", tau_us, "per-hop latency in microseconds");
        cmd->add_option("--m", m, "probes per round");
        cmd->add_option("--seed", seed, "seed for any sampling");
        cmd->add_flag("--force-exact-matching", force_exact,
                      "exact odd-vertex pairing regardless of size");
        cmd->add_flag("--verbose", verbose, "dump packet traces as JSON lines to stderr");
        cmd->add_flag("--strict", strict, "exit 2 if any topology was skipped with an error");
    };

    auto* ratio = app.add_subcommand("ratio", "rule cost over the lower bound, per topology");
    ratio->add_option("--corpus", corpus_dir, "directory of topology files")->required();
    add_common(ratio);

    auto* multifail =
        app.add_subcommand("multifail", "exhaustive k-failure localization averages");
    multifail->add_option("--corpus", corpus_dir, "directory of topology files")->required();
    multifail->add_option("--k", k, "simultaneous link failures");
    multifail->add_option("--max-edges", max_edges, "skip topologies above this edge count");
    multifail->add_option("--pattern-cap", pattern_cap, "max failure patterns per topology");
    add_common(multifail);

    std::size_t ring_length = 65536;
    double bounds_tau = 1.0;
    std::vector<std::size_t> bounds_ms;
    auto* bounds = app.add_subcommand("bounds", "worst-case message and latency table");
    bounds->add_option("--ring-length", ring_length, "ring length L");
    bounds->add_option("--bounds-tau-us", bounds_tau, "per-hop latency in microseconds");
    bounds->add_option("--m-values", bounds_ms, "parallelism column values");
    add_common(bounds);

    std::string topo_path;
    std::vector<std::string> fail_specs;
    std::vector<std::string> fail_arc_specs;
    std::vector<std::string> domain_specs;
    std::string strategy_name = "single";
    bool check_reverse = false;
    auto* diagnose_cmd = app.add_subcommand("diagnose", "run the full pipeline on one topology");
    diagnose_cmd->add_option("topology", topo_path, "topology file")->required();
    diagnose_cmd->add_option("--fail", fail_specs, "failed link as u,v (repeatable)");
    diagnose_cmd->add_option("--fail-arc", fail_arc_specs,
                             "failed direction as tail,head (repeatable, asymmetric)");
    diagnose_cmd->add_option("--domain", domain_specs, "controllable switches, comma separated");
    diagnose_cmd->add_option("--strategy", strategy_name,
                             "single | parallel | bidirectional | multi");
    diagnose_cmd->add_flag("--asymmetric", asymmetric,
                           "directed ring; failures may hit one direction only");
    diagnose_cmd->add_flag("--check-reverse", check_reverse,
                           "follow a clean clockwise verify with a reverse lap");
    add_common(diagnose_cmd);

    std::string inject_spec;
    auto* rules_cmd = app.add_subcommand("rules", "compile and dump the static rule sets");
    rules_cmd->add_option("topology", topo_path, "topology file")->required();
    rules_cmd->add_flag("--asymmetric", asymmetric, "compile over the directed Euler ring");
    rules_cmd->add_option("--inject", inject_spec,
                          "also dump loopback rules for this ring position (1-based)");
    add_common(rules_cmd);

    CLI11_PARSE(app, argc, argv);

    CppOptions copts;
    copts.force_exact_matching = force_exact;

    try {
        if (*ratio) {
            ExperimentConfig cfg;
            cfg.corpus_dir = corpus_dir;
            cfg.tau_us = tau_us;
            cfg.m = m;
            cfg.seed = seed;
            cfg.force_exact_matching = force_exact;
            RatioResult res = run_ratio(cfg);
            emit(format == "json" ? ratio_json(res).dump(2) + "\n" : csv_ratio(res), out_path);
            std::size_t ones = 0;
            for (const auto& r : res.records)
                if (r.rule_cost == r.lower_bound) ++ones;
            std::cerr << "ratio=1 on " << ones << "/" << res.records.size()
                      << " topologies, max ratio " << res.max_ratio << "\n";
            for (const auto& s : res.skipped)
                std::cerr << "skipped " << s.file << ": " << s.reason << "\n";
            return (strict && !res.skipped.empty()) ? 2 : 0;
        }
        if (*multifail) {
            ExperimentConfig cfg;
            cfg.corpus_dir = corpus_dir;
            cfg.failures_k = k;
            cfg.max_edges = max_edges;
            cfg.pattern_cap = pattern_cap;
            cfg.tau_us = tau_us;
            cfg.m = m;
            cfg.seed = seed;
            cfg.force_exact_matching = force_exact;
            MultifailResult res = run_multifail(cfg);
            emit(format == "json" ? multifail_json(res).dump(2) + "\n" : csv_multifail(res),
                 out_path);
            for (const auto& s : res.skipped)
                std::cerr << "skipped " << s.file << ": " << s.reason << "\n";
            return (strict && !res.skipped.empty()) ? 2 : 0;
        }
        if (*bounds) {
            if (bounds_ms.empty()) bounds_ms = bounds_default_parallelism();
            auto rows = bounds_table(ring_length, bounds_tau, bounds_ms);
            emit(format == "json" ? bounds_json(ring_length, bounds_tau, rows).dump(2) + "\n"
                                  : csv_bounds(rows),
                 out_path);
            CostBounds single = cost_bounds(ring_length, 1, bounds_tau);
            std::cerr << "single bisection latency between " << single.latency_best_us / 1e3
                      << " ms and " << single.latency_single_worst_us / 1e6 << " s\n";
            return 0;
        }
        if (*diagnose_cmd) {
            Topology t = load_topology(topo_path);
            check_valid(t);
            if (!is_connected(t)) throw error("topology is disconnected");

            FailureState fail;
            for (const std::string& spec : fail_specs) {
                auto [u, v] = parse_pair(t, spec);
                fail.failed_edges.insert(find_edge(t, u, v));
            }
            for (const std::string& spec : fail_arc_specs) {
                auto [u, v] = parse_pair(t, spec);
                fail.failed_arcs.insert({find_edge(t, u, v), u});
            }
            if (!fail.failed_arcs.empty() && !asymmetric)
                throw error("--fail-arc requires --asymmetric");

            ControlDomain domain;
            for (const std::string& spec : domain_specs) {
                std::string rest = spec;
                while (!rest.empty()) {
                    auto comma = rest.find(',');
                    std::string tok = rest.substr(0, comma);
                    if (!tok.empty()) domain.switches.push_back(parse_switch(t, tok));
                    if (comma == std::string::npos) break;
                    rest = rest.substr(comma + 1);
                }
            }
            if (domain.switches.empty())
                for (SwitchId s = 0; s < t.num_switches(); ++s) domain.switches.push_back(s);

            DiagnoseOptions opts;
            opts.tau_us = tau_us;
            opts.m = m;
            opts.check_reverse = check_reverse || asymmetric;

            Walk walk = asymmetric ? euler_cycle_directed(t) : improve_walk(t, solve_cpp(t, 0, copts));
            RingView ring = make_ring(t, walk);
            InjectionPlan plan = plan_injections(ring, domain);
            DiagnosisReport rep = diagnose(ring, plan, fail, parse_strategy(strategy_name), opts);

            Json out;
            out["topology"] = topology_summary_json(t);
            out["walk"] = walk_json(walk);
            out["injection_points"] = plan.points;
            out["report"] = report_json(rep);
            emit(out.dump(2) + "\n", out_path);
            if (verbose)
                for (const ProbeRecord& rec : rep.probes)
                    std::cerr << replay_trace(ring, plan, rec, fail);
            return 0;
        }
        if (*rules_cmd) {
            Topology t = load_topology(topo_path);
            check_valid(t);
            if (!is_connected(t)) throw error("topology is disconnected");
            Walk walk = asymmetric ? euler_cycle_directed(t) : improve_walk(t, solve_cpp(t, 0, copts));
            RingView ring = make_ring(t, walk);
            auto sets = ring.static_rule_sets();
            if (!inject_spec.empty()) {
                unsigned long pos = std::stoul(inject_spec);
                if (pos < 1 || pos > ring.length()) throw error("--inject out of range");
                sets.push_back(compile_loopback(t, ring.cw, static_cast<RingPosition>(pos),
                                                ring.controller, ring.cw_rules, ring.ccw_rules));
            }
            if (format == "json") {
                Json out;
                out["topology"] = topology_summary_json(t);
                out["walk"] = walk_json(ring.cw);
                out["rule_sets"] = rulesets_json(sets);
                out["total_rules"] = total_static_rules(sets);
                emit(out.dump(2) + "\n", out_path);
            } else {
                WalkMetrics wm = walk_metrics(ring.cw);
                std::string table = render_rule_table(t, sets);
                table += "total " + std::to_string(total_static_rules(sets)) + " rules, L=" +
                         std::to_string(wm.length) + ", kappa=" + std::to_string(wm.kappa) +
                         "\n";
                emit(table, out_path);
            }
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
