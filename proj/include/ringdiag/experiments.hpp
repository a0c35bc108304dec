#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <future>
#include <string>
#include <vector>

#include "ringdiag/diagnosis.hpp"
#include "ringdiag/ring.hpp"
#include "ringdiag/serialize.hpp"
#include "ringdiag/topology_io.hpp"
#include "ringdiag/walk.hpp"

namespace ringdiag {

struct ExperimentConfig {
    std::filesystem::path corpus_dir;
    std::size_t failures_k = 4;
    std::size_t max_edges = 20;
    std::uint64_t seed = 0;
    double tau_us = 100.0;
    std::size_t m = 1;
    std::size_t pattern_cap = 200000;  // C(|E|, k) enumeration ceiling per topology
    bool force_exact_matching = false;
};

struct SkipRecord {
    std::string file;
    std::string reason;
};

struct Corpus {
    std::vector<Topology> entries;
    std::vector<SkipRecord> skipped;
};

// Loads every recognized file in a directory, sorted by filename. Unreadable,
// disconnected or trivially small graphs land in `skipped` with a reason.
inline Corpus load_corpus(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw error("corpus directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        if (ext == ".graphml" || ext == ".xml" || ext == ".edges" || ext == ".edgelist" ||
            ext == ".txt")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    Corpus corpus;
    for (const fs::path& f : files) {
        try {
            Topology t = load_topology(f.string());
            if (t.num_edges() < 2) {
                corpus.skipped.push_back({f.filename().string(), "fewer than 2 edges"});
                continue;
            }
            if (!is_connected(t)) {
                corpus.skipped.push_back({f.filename().string(), "disconnected"});
                continue;
            }
            corpus.entries.push_back(std::move(t));
        } catch (const std::exception& ex) {
            corpus.skipped.push_back({f.filename().string(), ex.what()});
        }
    }
    return corpus;
}

struct RatioRecord {
    std::string topology;
    std::size_t edges = 0;
    std::size_t bridges = 0;
    std::size_t L_opt = 0;
    std::size_t kappa = 0;
    std::size_t rule_cost = 0;
    std::size_t lower_bound = 0;
    double ratio = 1.0;
};

struct RatioResult {
    std::vector<RatioRecord> records;
    std::vector<SkipRecord> skipped;
    double fraction_at_one = 0.0;
    double max_ratio = 0.0;
};

inline RatioRecord ratio_record(const Topology& t, const CppOptions& opts = {}) {
    Walk w = improve_walk(t, solve_cpp(t, 0, opts));
    WalkMetrics m = walk_metrics(w);
    RatioRecord r;
    r.topology = t.name;
    r.edges = t.num_edges();
    r.bridges = find_bridges(t).size();
    r.L_opt = m.length;
    r.kappa = m.kappa;
    r.rule_cost = m.rule_cost;
    r.lower_bound = rule_lower_bound(t);
    r.ratio = static_cast<double>(r.rule_cost) / static_cast<double>(r.lower_bound);
    return r;
}

inline RatioResult run_ratio(const ExperimentConfig& cfg) {
    Corpus corpus = load_corpus(cfg.corpus_dir);
    RatioResult res;
    res.skipped = std::move(corpus.skipped);
    CppOptions copts;
    copts.force_exact_matching = cfg.force_exact_matching;
    for (const Topology& t : corpus.entries) {
        try {
            res.records.push_back(ratio_record(t, copts));
        } catch (const std::exception& ex) {
            res.skipped.push_back({t.name, ex.what()});
        }
    }
    std::sort(res.records.begin(), res.records.end(),
              [](const RatioRecord& a, const RatioRecord& b) { return a.topology < b.topology; });
    std::size_t ones = 0;
    for (const RatioRecord& r : res.records) {
        if (r.rule_cost == r.lower_bound) ++ones;
        res.max_ratio = std::max(res.max_ratio, r.ratio);
    }
    if (!res.records.empty())
        res.fraction_at_one =
            static_cast<double>(ones) / static_cast<double>(res.records.size());
    return res;
}

struct MultifailRecord {
    std::string topology;
    std::size_t edges = 0;
    std::size_t k = 0;
    std::size_t patterns = 0;  // failure subsets enumerated
    std::size_t pairs = 0;     // (pattern, domain) diagnoses
    double avg_located = 0.0;
    std::size_t min_located = 0;
    std::size_t max_located = 0;
    std::size_t beta_max = 0;
    bool within_two_beta = true;  // every diagnosis located <= 2 * beta(domain)
    std::vector<std::string> notes;
};

struct MultifailResult {
    std::vector<MultifailRecord> records;
    std::vector<SkipRecord> skipped;
};

namespace experiments_detail {

// number of k-subsets, saturating at `cap + 1`
inline std::size_t choose_capped(std::size_t n, std::size_t k, std::size_t cap) {
    if (k > n) return 0;
    unsigned long long c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > cap) return cap + 1;
    }
    return static_cast<std::size_t>(c);
}

inline MultifailRecord multifail_one(const Topology& t, std::size_t k, std::size_t cap,
                                     const DiagnoseOptions& opts,
                                     const CppOptions& copts = {}) {
    MultifailRecord rec;
    rec.topology = t.name;
    rec.edges = t.num_edges();
    rec.k = k;

    std::size_t n = t.num_edges();
    if (k > n) throw error("fewer edges than simultaneous failures");
    if (choose_capped(n, k, cap) > cap)
        throw error("failure pattern count exceeds cap of " + std::to_string(cap));

    Walk walk = improve_walk(t, solve_cpp(t, 0, copts));
    RingView ring = make_ring(t, walk);

    // one single-switch domain per switch; plans built once
    std::vector<InjectionPlan> plans;
    std::vector<std::size_t> betas;
    for (SwitchId s = 0; s < t.num_switches(); ++s) {
        ControlDomain d{{s}};
        auto pts = ring.injection_points(d);
        if (pts.empty()) {
            rec.notes.push_back("no injection point for " + t.label(s));
            continue;
        }
        plans.push_back(plan_injections(ring, d));
        betas.push_back(pts.size());
        rec.beta_max = std::max(rec.beta_max, pts.size());
    }
    if (plans.empty()) throw error("no usable injection domain");

    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    unsigned long long located_sum = 0;
    rec.min_located = static_cast<std::size_t>(-1);
    bool more = k <= n;
    while (more) {
        ++rec.patterns;
        FailureState fail;
        for (std::size_t i : pick) fail.failed_edges.insert(static_cast<EdgeId>(i));
        for (std::size_t d = 0; d < plans.size(); ++d) {
            DiagnosisReport rep = diagnose_multi(ring, plans[d], fail, opts);
            std::size_t found = rep.located.size();
            located_sum += found;
            ++rec.pairs;
            rec.min_located = std::min(rec.min_located, found);
            rec.max_located = std::max(rec.max_located, found);
            if (found > 2 * betas[d]) rec.within_two_beta = false;
        }
        // next k-combination
        more = false;
        for (std::size_t i = k; i-- > 0;) {
            if (pick[i] + (k - i) < n) {
                ++pick[i];
                for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
                more = true;
                break;
            }
        }
    }
    if (rec.pairs > 0)
        rec.avg_located = static_cast<double>(located_sum) / static_cast<double>(rec.pairs);
    return rec;
}

}  // namespace experiments_detail

inline MultifailResult run_multifail(const ExperimentConfig& cfg) {
    Corpus corpus = load_corpus(cfg.corpus_dir);
    MultifailResult res;
    res.skipped = std::move(corpus.skipped);

    DiagnoseOptions opts;
    opts.tau_us = cfg.tau_us;
    opts.m = cfg.m;

    std::vector<const Topology*> eligible;
    for (const Topology& t : corpus.entries) {
        if (t.num_edges() > cfg.max_edges) {
            res.skipped.push_back({t.name, "more than " + std::to_string(cfg.max_edges) +
                                               " edges"});
            continue;
        }
        eligible.push_back(&t);
    }

    CppOptions copts;
    copts.force_exact_matching = cfg.force_exact_matching;
    std::vector<std::future<MultifailRecord>> futures;
    futures.reserve(eligible.size());
    for (const Topology* t : eligible)
        futures.push_back(std::async(std::launch::async, [t, &cfg, &opts, &copts] {
            return experiments_detail::multifail_one(*t, cfg.failures_k, cfg.pattern_cap, opts,
                                                     copts);
        }));
    for (std::size_t i = 0; i < futures.size(); ++i) {
        try {
            res.records.push_back(futures[i].get());
        } catch (const std::exception& ex) {
            res.skipped.push_back({eligible[i]->name, ex.what()});
        }
    }
    std::sort(res.records.begin(), res.records.end(),
              [](const MultifailRecord& a, const MultifailRecord& b) {
                  return a.topology < b.topology;
              });
    return res;
}

struct BoundsRow {
    std::size_t m = 1;
    std::size_t rounds = 0;
    std::size_t messages = 0;
    double t_ub_s = 0.0;
    double t_bidirectional_s = 0.0;
};

// the classic worst-case table rows for a given ring
inline std::vector<BoundsRow> bounds_table(std::size_t L, double tau_us,
                                           const std::vector<std::size_t>& ms) {
    std::vector<BoundsRow> rows;
    for (std::size_t m : ms) {
        CostBounds b = cost_bounds(L, m, tau_us);
        rows.push_back({m, b.rounds, b.messages_worst, b.latency_worst_us / 1e6,
                        b.latency_bidirectional_us / 1e6});
    }
    return rows;
}

inline const std::vector<std::size_t>& bounds_default_parallelism() {
    static const std::vector<std::size_t> ms{1, 2, 3, 4, 40, 255, 65535};
    return ms;
}

// Full pipeline on one topology: plan the ring, compile, fail the requested
// links, diagnose. Asymmetric mode rides the directed Euler ring, where both
// orientations of every edge are distinct ring arcs.
inline DiagnosisReport run_diagnose(const Topology& t, const FailureState& fail,
                                    const ControlDomain& domain, Strategy strategy,
                                    const DiagnoseOptions& opts, bool asymmetric,
                                    Json* detail_out = nullptr,
                                    const CppOptions& copts = {}) {
    Walk walk = asymmetric ? euler_cycle_directed(t) : improve_walk(t, solve_cpp(t, 0, copts));
    RingView ring = make_ring(t, walk);
    InjectionPlan plan = plan_injections(ring, domain);
    DiagnosisReport rep = diagnose(ring, plan, fail, strategy, opts);
    if (detail_out) {
        (*detail_out)["topology"] = topology_summary_json(t);
        (*detail_out)["walk"] = walk_json(walk);
        (*detail_out)["injection_points"] = plan.points;
        (*detail_out)["report"] = report_json(rep);
    }
    return rep;
}

// CSV renderers (deterministic column order and formatting)

inline std::string csv_ratio(const RatioResult& res) {
    std::string out = "topology,edges,bridges,L_opt,kappa,rule_cost,lower_bound,ratio\n";
    char buf[64];
    for (const RatioRecord& r : res.records) {
        std::snprintf(buf, sizeof buf, "%.6g", r.ratio);
        out += r.topology + "," + std::to_string(r.edges) + "," + std::to_string(r.bridges) +
               "," + std::to_string(r.L_opt) + "," + std::to_string(r.kappa) + "," +
               std::to_string(r.rule_cost) + "," + std::to_string(r.lower_bound) + "," + buf +
               "\n";
    }
    return out;
}

inline std::string csv_multifail(const MultifailResult& res) {
    std::string out =
        "topology,edges,k,patterns,pairs,avg_located,min_located,max_located,beta_max,"
        "within_two_beta\n";
    char buf[64];
    for (const MultifailRecord& r : res.records) {
        std::snprintf(buf, sizeof buf, "%.6g", r.avg_located);
        out += r.topology + "," + std::to_string(r.edges) + "," + std::to_string(r.k) + "," +
               std::to_string(r.patterns) + "," + std::to_string(r.pairs) + "," + buf + "," +
               std::to_string(r.min_located) + "," + std::to_string(r.max_located) + "," +
               std::to_string(r.beta_max) + "," + (r.within_two_beta ? "yes" : "no") + "\n";
    }
    return out;
}

inline std::string csv_bounds(const std::vector<BoundsRow>& rows) {
    std::string out = "m,rounds,messages,t_ub_s,t_bidirectional_s\n";
    char a[64], b[64];
    for (const BoundsRow& r : rows) {
        std::snprintf(a, sizeof a, "%.3g", r.t_ub_s);
        std::snprintf(b, sizeof b, "%.3g", r.t_bidirectional_s);
        out += std::to_string(r.m) + "," + std::to_string(r.rounds) + "," +
               std::to_string(r.messages) + "," + a + "," + b + "\n";
    }
    return out;
}

inline Json ratio_json(const RatioResult& res) {
    Json j;
    j["records"] = Json::array();
    for (const RatioRecord& r : res.records)
        j["records"].push_back(Json{{"topology", r.topology},
                                    {"edges", r.edges},
                                    {"bridges", r.bridges},
                                    {"L_opt", r.L_opt},
                                    {"kappa", r.kappa},
                                    {"rule_cost", r.rule_cost},
                                    {"lower_bound", r.lower_bound},
                                    {"ratio", r.ratio}});
    j["fraction_at_one"] = res.fraction_at_one;
    j["max_ratio"] = res.max_ratio;
    j["skipped"] = Json::array();
    for (const SkipRecord& s : res.skipped)
        j["skipped"].push_back(Json{{"file", s.file}, {"reason", s.reason}});
    return j;
}

inline Json multifail_json(const MultifailResult& res) {
    Json j;
    j["records"] = Json::array();
    for (const MultifailRecord& r : res.records) {
        Json rec{{"topology", r.topology}, {"edges", r.edges},
                 {"k", r.k},               {"patterns", r.patterns},
                 {"pairs", r.pairs},       {"avg_located", r.avg_located},
                 {"min_located", r.min_located},
                 {"max_located", r.max_located},
                 {"beta_max", r.beta_max},
                 {"within_two_beta", r.within_two_beta}};
        rec["notes"] = r.notes;
        j["records"].push_back(rec);
    }
    j["skipped"] = Json::array();
    for (const SkipRecord& s : res.skipped)
        j["skipped"].push_back(Json{{"file", s.file}, {"reason", s.reason}});
    return j;
}

inline Json bounds_json(std::size_t L, double tau_us, const std::vector<BoundsRow>& rows) {
    Json j;
    j["ring_length"] = L;
    j["tau_us"] = tau_us;
    j["rows"] = Json::array();
    for (const BoundsRow& r : rows)
        j["rows"].push_back(Json{{"m", r.m},
                                 {"rounds", r.rounds},
                                 {"messages", r.messages},
                                 {"t_ub_s", r.t_ub_s},
                                 {"t_bidirectional_s", r.t_bidirectional_s}});
    CostBounds single = cost_bounds(L, 1, tau_us);
    j["single_best_s"] = single.latency_best_us / 1e6;
    j["single_worst_s"] = single.latency_single_worst_us / 1e6;
    return j;
}

}  // namespace ringdiag
