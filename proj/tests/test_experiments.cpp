#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "ringdiag/experiments.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace ringdiag;
namespace rt = ringdiag::testing;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

fs::path scratch_corpus_dir() {
    fs::path dir = fs::temp_directory_path() / "ringdiag_experiments_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void put(const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
}

}  // namespace

TEST_CASE("load_corpus reads the bundled data directory", "[experiments]") {
    Corpus corpus = load_corpus(rt::data_dir());

    REQUIRE(corpus.skipped.empty());
    REQUIRE(corpus.entries.size() == 23);

    std::vector<std::string> names;
    for (const Topology& t : corpus.entries) {
        check_valid(t);
        REQUIRE(is_connected(t));
        REQUIRE(t.num_edges() >= 2);
        names.push_back(t.name);
    }
    CHECK(std::is_sorted(names.begin(), names.end()));
    CHECK(names.front() == "bowtie");
    CHECK(names.back() == "usnet14");
    CHECK(std::find(names.begin(), names.end(), "fig1") != names.end());
    CHECK(std::find(names.begin(), names.end(), "metro3") != names.end());
    CHECK(std::find(names.begin(), names.end(), "ring16") != names.end());
}

TEST_CASE("load_corpus skip reasons and bad directory", "[experiments]") {
    CHECK_THROWS_WITH(load_corpus("/no/such/dir/anywhere"),
                      ContainsSubstring("corpus directory not found"));

    fs::path dir = scratch_corpus_dir();
    put(dir / "good.edges", "a b\nb c\n");
    put(dir / "single.edges", "a b\n");
    put(dir / "disco.edges", "a b\nc d\n");
    put(dir / "broken.graphml", "<graphml><graph");
    put(dir / "ignored.json", "{}");  // extension not in the loader's list

    Corpus corpus = load_corpus(dir);
    REQUIRE(corpus.entries.size() == 1);
    CHECK(corpus.entries[0].name == "good");

    REQUIRE(corpus.skipped.size() == 3);
    auto reason_of = [&](const std::string& file) {
        for (const SkipRecord& s : corpus.skipped)
            if (s.file == file) return s.reason;
        return std::string("<missing>");
    };
    CHECK(reason_of("single.edges") == "fewer than 2 edges");
    CHECK(reason_of("disco.edges") == "disconnected");
    CHECK_THAT(reason_of("broken.graphml"), ContainsSubstring("graphml"));

    fs::remove_all(dir);
}

TEST_CASE("ratio_record on the seven-switch fixture", "[experiments]") {
    RatioRecord r = ratio_record(rt::fig1());
    CHECK(r.topology == "fig1");
    CHECK(r.edges == 9);
    CHECK(r.bridges == 0);
    CHECK(r.L_opt == 11);
    CHECK(r.kappa == 2);
    CHECK(r.rule_cost == 9);
    CHECK(r.lower_bound == 9);
    CHECK(r.ratio == 1.0);
}

TEST_CASE("ratio_record can sit above the lower bound", "[experiments]") {
    // K4: the bound counts arcs of some strongly connected orientation (6),
    // but no optimal-length closed walk re-uses enough arcs to reach it.
    RatioRecord r = ratio_record(rt::complete_graph(4));
    CHECK(r.edges == 6);
    CHECK(r.bridges == 0);
    CHECK(r.L_opt == 8);
    CHECK(r.lower_bound == 6);
    CHECK(r.rule_cost >= 7);
    CHECK(r.ratio == Approx(double(r.rule_cost) / 6.0));
    CHECK(r.ratio > 1.0);
}

TEST_CASE("run_ratio across the data corpus", "[experiments]") {
    ExperimentConfig cfg;
    cfg.corpus_dir = rt::data_dir();

    RatioResult res = run_ratio(cfg);
    REQUIRE(res.skipped.empty());
    REQUIRE(res.records.size() == 23);

    std::vector<std::string> names;
    for (const RatioRecord& r : res.records) {
        CHECK(r.ratio >= 1.0);
        CHECK(r.rule_cost == r.L_opt - r.kappa);
        CHECK(r.lower_bound >= r.edges);
        names.push_back(r.topology);
    }
    CHECK(std::is_sorted(names.begin(), names.end()));

    // Bridge-free Eulerian graphs admit a perfect walk: one rule per edge.
    const std::set<std::string> eulerian = {"bowtie",  "cycle3",     "cycle4", "cycle5",
                                            "cycle6",  "cycle8",     "k5",     "metro3",
                                            "octahedron", "parallel2", "ring16", "usnet14"};
    for (const RatioRecord& r : res.records) {
        if (!eulerian.count(r.topology)) continue;
        INFO(r.topology);
        CHECK(r.L_opt == r.edges);
        CHECK(r.kappa == 0);
        CHECK(r.rule_cost == r.edges);
        CHECK(r.ratio == 1.0);
    }

    // every bundled graph happens to be walk-optimal
    CHECK(res.fraction_at_one == 1.0);
    CHECK(res.max_ratio == 1.0);

    // exact matching is forced below the size cutoff anyway, so nothing moves
    cfg.force_exact_matching = true;
    RatioResult forced = run_ratio(cfg);
    REQUIRE(forced.records.size() == res.records.size());
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        CHECK(forced.records[i].topology == res.records[i].topology);
        CHECK(forced.records[i].L_opt == res.records[i].L_opt);
        CHECK(forced.records[i].kappa == res.records[i].kappa);
        CHECK(forced.records[i].ratio == res.records[i].ratio);
    }
}

TEST_CASE("multifail_one single failures on the seven-switch fixture", "[experiments]") {
    DiagnoseOptions opts;
    MultifailRecord rec = experiments_detail::multifail_one(rt::fig1(), 1, 200000, opts);

    CHECK(rec.topology == "fig1");
    CHECK(rec.edges == 9);
    CHECK(rec.k == 1);
    CHECK(rec.patterns == 9);
    CHECK(rec.pairs == 63);  // 9 patterns x 7 single-switch domains
    CHECK(rec.avg_located == 1.0);
    CHECK(rec.min_located == 1);
    CHECK(rec.max_located == 1);
    CHECK(rec.beta_max == 2);
    CHECK(rec.within_two_beta);
    CHECK(rec.notes.empty());
}

TEST_CASE("multifail_one with two failures on a short path", "[experiments]") {
    // ring e0 e1 e1 e0; killing both edges leaves each end switch able to see
    // only its own incident edge while the middle switch still recovers both
    Topology t = rt::path_graph(2);
    DiagnoseOptions opts;
    MultifailRecord rec = experiments_detail::multifail_one(t, 2, 200000, opts);

    CHECK(rec.patterns == 1);
    CHECK(rec.pairs == 3);
    CHECK(rec.avg_located == Approx(4.0 / 3.0));
    CHECK(rec.min_located == 1);
    CHECK(rec.max_located == 2);
    CHECK(rec.beta_max == 2);
    CHECK(rec.within_two_beta);
}

TEST_CASE("multifail_one guards", "[experiments]") {
    DiagnoseOptions opts;
    CHECK_THROWS_WITH(experiments_detail::multifail_one(rt::complete_graph(5), 4, 10, opts),
                      ContainsSubstring("exceeds cap of 10"));
    CHECK_THROWS_WITH(experiments_detail::multifail_one(rt::path_graph(2), 4, 200000, opts),
                      ContainsSubstring("fewer edges than simultaneous failures"));
}

TEST_CASE("run_multifail across small graphs", "[experiments]") {
    ExperimentConfig cfg;
    cfg.corpus_dir = rt::data_dir();
    cfg.failures_k = 4;
    cfg.max_edges = 6;

    MultifailResult res = run_multifail(cfg);
    CHECK(res.records.size() + res.skipped.size() == 23);
    REQUIRE(!res.records.empty());

    std::vector<std::string> names;
    for (const MultifailRecord& r : res.records) {
        INFO(r.topology);
        CHECK(r.k == 4);
        CHECK(r.edges >= 4);
        CHECK(r.edges <= 6);
        CHECK(r.patterns >= 1);
        CHECK(r.pairs >= r.patterns);
        CHECK(r.avg_located >= 1.0);
        CHECK(r.min_located >= 1);
        CHECK(r.max_located >= r.min_located);
        CHECK(r.within_two_beta);
        CHECK(r.notes.empty());
        names.push_back(r.topology);
    }
    CHECK(std::is_sorted(names.begin(), names.end()));

    for (const SkipRecord& s : res.skipped) {
        INFO(s.file << ": " << s.reason);
        bool known = s.reason == "more than 6 edges" ||
                     s.reason == "fewer edges than simultaneous failures";
        CHECK(known);
    }
}

TEST_CASE("run_multifail single failures are always pinpointed", "[experiments]") {
    ExperimentConfig cfg;
    cfg.corpus_dir = rt::data_dir();
    cfg.failures_k = 1;

    MultifailResult res = run_multifail(cfg);
    REQUIRE(res.skipped.empty());
    REQUIRE(res.records.size() == 23);
    for (const MultifailRecord& r : res.records) {
        INFO(r.topology);
        CHECK(r.patterns == r.edges);
        CHECK(r.avg_located == 1.0);
        CHECK(r.min_located == 1);
        CHECK(r.max_located == 1);
        CHECK(r.within_two_beta);
    }
}

TEST_CASE("bounds_table rows and renderers", "[experiments]") {
    std::vector<BoundsRow> rows = bounds_table(65536, 1.0, bounds_default_parallelism());
    REQUIRE(rows.size() == 7);

    CHECK(rows[0].m == 1);
    CHECK(rows[0].rounds == 16);
    CHECK(rows[0].messages == 17);
    CHECK(rows[0].t_ub_s == Approx(2.162688));
    CHECK(rows[0].t_bidirectional_s == Approx(1.114112));

    CHECK(rows[3].m == 4);
    CHECK(rows[3].rounds == 7);
    CHECK(rows[3].messages == 29);
    CHECK(rows[3].t_ub_s == Approx(0.983040));
    CHECK(rows[3].t_bidirectional_s == Approx(0.524288));

    CHECK(rows[6].m == 65535);
    CHECK(rows[6].rounds == 1);
    CHECK(rows[6].messages == 65536);
    CHECK(rows[6].t_ub_s == Approx(0.196608));
    CHECK(rows[6].t_bidirectional_s == Approx(0.131072));

    std::string csv = csv_bounds(rows);
    CHECK(csv.rfind("m,rounds,messages,t_ub_s,t_bidirectional_s\n", 0) == 0);
    CHECK_THAT(csv, ContainsSubstring("\n1,16,17,2.16,1.11\n"));
    CHECK_THAT(csv, ContainsSubstring("\n4,7,29,0.983,0.524\n"));

    Json j = bounds_json(65536, 1.0, rows);
    CHECK(j["ring_length"] == 65536);
    CHECK(j["tau_us"] == 1.0);
    CHECK(j["rows"].size() == 7);
    CHECK(j["rows"][0]["messages"] == 17);
    CHECK(j["single_best_s"].get<double>() == Approx(0.196606));
    CHECK(j["single_worst_s"].get<double>() == Approx(2.031618));
}

TEST_CASE("csv renderers for ratio and multifail results", "[experiments]") {
    RatioResult rr;
    rr.records.push_back(ratio_record(rt::fig1()));
    CHECK(csv_ratio(rr) ==
          "topology,edges,bridges,L_opt,kappa,rule_cost,lower_bound,ratio\n"
          "fig1,9,0,11,2,9,9,1\n");

    DiagnoseOptions opts;
    MultifailResult mr;
    mr.records.push_back(experiments_detail::multifail_one(rt::path_graph(2), 2, 200000, opts));
    CHECK(csv_multifail(mr) ==
          "topology,edges,k,patterns,pairs,avg_located,min_located,max_located,beta_max,"
          "within_two_beta\n"
          "path2,2,2,1,3,1.33333,1,2,2,yes\n");
}

TEST_CASE("experiment json shapes", "[experiments]") {
    RatioResult rr;
    rr.records.push_back(ratio_record(rt::fig1()));
    rr.fraction_at_one = 1.0;
    rr.max_ratio = 1.0;
    Json jr = ratio_json(rr);
    CHECK(jr["records"].size() == 1);
    CHECK(jr["records"][0]["topology"] == "fig1");
    CHECK(jr["records"][0]["rule_cost"] == 9);
    CHECK(jr["fraction_at_one"] == 1.0);
    CHECK(jr["max_ratio"] == 1.0);
    CHECK(jr["skipped"] == Json::array());

    DiagnoseOptions opts;
    MultifailResult mr;
    mr.records.push_back(experiments_detail::multifail_one(rt::fig1(), 1, 200000, opts));
    mr.skipped.push_back({"huge.edges", "more than 6 edges"});
    Json jm = multifail_json(mr);
    CHECK(jm["records"].size() == 1);
    CHECK(jm["records"][0]["pairs"] == 63);
    CHECK(jm["records"][0]["within_two_beta"] == true);
    CHECK(jm["records"][0]["notes"] == Json::array());
    CHECK(jm["skipped"][0]["file"] == "huge.edges");
}

TEST_CASE("run_diagnose full pipeline with detail output", "[experiments]") {
    Topology t = rt::fig1();
    FailureState fail = symmetric_failure(t, {6});
    ControlDomain domain{{0}};
    DiagnoseOptions opts;  // tau 100us

    Json detail;
    DiagnosisReport rep =
        run_diagnose(t, fail, domain, Strategy::single, opts, false, &detail);

    CHECK(rep.verdict == Verdict::located);
    REQUIRE(rep.located.size() == 1);
    CHECK(rep.located[0].edge == 6);
    CHECK(rep.total_hops == 49);

    CHECK(detail["topology"]["name"] == "fig1");
    CHECK(detail["topology"]["num_edges"] == 9);
    CHECK(detail["walk"]["metrics"]["L"] == 11);
    CHECK(detail["walk"]["metrics"]["rule_cost"] == 9);
    CHECK(detail["injection_points"] == Json::array({1}));
    CHECK(detail["report"]["total_hops"] == 49);
    CHECK(detail["report"]["located"] == Json::array({6}));
}

TEST_CASE("run_diagnose asymmetric rings see one-way failures", "[experiments]") {
    // directed cover ring visits both orientations, so a single failed arc is
    // one blocked offset and bisection lands on its edge
    Topology t = rt::cycle_graph(3);
    FailureState fail = asymmetric_failure(t, {Arc{0, 1, 0}});
    ControlDomain domain{{0, 1, 2}};
    DiagnoseOptions opts;

    DiagnosisReport rep = run_diagnose(t, fail, domain, Strategy::single, opts, true);
    CHECK(rep.verdict == Verdict::located);
    REQUIRE(rep.located.size() == 1);
    CHECK(rep.located[0].edge == 0);
}
