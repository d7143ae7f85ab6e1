#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "benchsel/cli.hpp"
#include "test_support.hpp"

using namespace benchsel;
using benchsel::support::data_path;
using benchsel::support::TempDir;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "benchsel");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> demo(std::vector<std::string> args) {
    for (const char* a : {"--scores", "", "--norms", "", "--min-games", "15", "--min-algos", "30", "--quiet"}) {
        args.emplace_back(a);
    }
    args[args.size() - 8] = data_path("demo/scores.csv");
    args[args.size() - 6] = data_path("normalization.csv");
    return args;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"--version"}).code, 0);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"search", "--size", "3"}).code, 2);
    TempDir dir("cli-codes");
    const auto bad = run(demo({"search", "--size", "3", "--include", "Not A Game", "--out", dir.str()}));
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("Not A Game"), std::string::npos);
}

TEST(Cli, BinaryReportsUsageErrors) {
    const std::string cli = BENCHSEL_CLI;
    EXPECT_EQ(std::system((cli + " --version > /dev/null").c_str()), 0);
    const int status = std::system((cli + " search > /dev/null 2>&1").c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 2);
}

TEST(Cli, SearchIsByteIdenticalAcrossThreadCounts) {
    TempDir a("cli-t1"), b("cli-t12");
    ASSERT_EQ(run(demo({"search", "--size", "3", "--threads", "1", "--out", a.str()})).code, 0);
    ASSERT_EQ(run(demo({"search", "--size", "3", "--threads", "12", "--out", b.str()})).code, 0);
    const auto ra = slurp(a.str("search_ranked.csv"));
    EXPECT_FALSE(ra.empty());
    EXPECT_EQ(ra, slurp(b.str("search_ranked.csv")));
    EXPECT_EQ(slurp(a.str("search_best_model.json")), slurp(b.str("search_best_model.json")));
    const auto best = load_model(a.str("search_best_model.json"));
    EXPECT_EQ(best.environment_ids.size(), 3u);
}

TEST(Cli, SearchHonoursInclude) {
    TempDir dir("cli-include");
    ASSERT_EQ(run(demo({"search", "--size", "2", "--include", "Pong", "--top-k", "50", "--out", dir.str()})).code, 0);
    std::istringstream in(slurp(dir.str("search_ranked.csv")));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("rank,", 0) == 0) continue;
        ++rows;
        EXPECT_NE(line.find("Pong"), std::string::npos) << line;
    }
    EXPECT_EQ(rows, 19u);
}

TEST(Cli, PipelineRefusesSmallTables) {
    TempDir dir("cli-small");
    std::string csv = "algorithm,Alien,Amidar,Assault,Bank Heist,Battle Zone,Beam Rider\n";
    for (int a = 0; a < 10; ++a) {
        csv += "a" + std::to_string(a);
        for (int e = 0; e < 6; ++e) csv += "," + std::to_string(1000 + 37 * a + 11 * e);
        csv += "\n";
    }
    write_text_file(dir.str("small.csv"), csv);
    const auto r = run({"pipeline", "--scores", dir.str("small.csv"), "--norms", data_path("normalization.csv"),
                        "--min-games", "1", "--min-algos", "1", "--out", dir.str()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("15"), std::string::npos) << r.err;
}

TEST(Cli, PipelineSuiteManifestIsReproducible) {
    TempDir a("cli-p1"), b("cli-p2");
    ASSERT_EQ(run(demo({"pipeline", "--seed", "7", "--threads", "3", "--out", a.str(), "--reference",
                        data_path("reference_subsets.json")}))
                  .code,
              0);
    ASSERT_EQ(run(demo({"pipeline", "--seed", "7", "--threads", "8", "--out", b.str(), "--reference",
                        data_path("reference_subsets.json")}))
                  .code,
              0);
    const auto m = slurp(a.str("suite_manifest.json"));
    ASSERT_FALSE(m.empty());
    EXPECT_EQ(m, slurp(b.str("suite_manifest.json")));
    for (const char* key : {"size-1", "size-3", "size-5", "size-10", "val-3", "val-5"}) {
        EXPECT_EQ(slurp(a.str(std::string("models/") + key + ".json")),
                  slurp(b.str(std::string("models/") + key + ".json")))
            << key;
    }
    const auto bank = load_bank(a.str("models/size-5-bank.json"));
    EXPECT_EQ(bank.models.size(), 20u);
}

TEST(Cli, PredictIsolatesBadRowsAndCountsInversions) {
    TempDir dir("cli-predict");
    write_text_file(dir.str("scores.csv"),
                    "algorithm,Battle Zone,Name This Game,Phoenix,true_median\n"
                    "low,5000,3000,1000,10\n"
                    "broken,5000,,1000,20\n"
                    "high,40000,9000,8000,110\n"
                    "mid,20000,6000,4000,50\n");
    const auto r = run({"predict", "--model", data_path("models/atari-3.json"), "--scores", dir.str("scores.csv"),
                        "--norms", data_path("normalization.csv"), "--true-summary", "true_median", "--baseline",
                        "high", "--out", dir.str()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("broken"), std::string::npos) << r.err;
    const auto csv = slurp(dir.str("predictions.csv"));
    EXPECT_EQ(count(csv, "\n"), 6u);
    EXPECT_NE(csv.find("broken,,20,,"), std::string::npos) << csv;
    EXPECT_NE(r.out.find("inversions"), std::string::npos) << r.out;
    EXPECT_FALSE(slurp(dir.str("predictions_rebased.csv")).empty());
    const auto doc = json::parse(slurp(dir.str("predictions.json")));
    EXPECT_EQ(doc.at("inversion_count").get<int>(), 0);
}

TEST(Cli, StrictChecksumMismatchFails) {
    TempDir dir("cli-strict");
    auto norms = slurp(data_path("normalization.csv"));
    norms.replace(norms.find("Pong,-20.71"), 11, "Pong,-20.70");
    write_text_file(dir.str("norms.csv"), norms);
    write_text_file(dir.str("scores.csv"), "algorithm,Battle Zone,Name This Game,Phoenix\nx,5000,3000,1000\n");
    std::vector<std::string> args{"predict", "--model", data_path("models/atari-3.json"), "--scores",
                                  dir.str("scores.csv"), "--norms", dir.str("norms.csv"), "--out", dir.str()};
    const auto lenient = run(args);
    EXPECT_EQ(lenient.code, 0);
    EXPECT_NE(lenient.err.find("checksum"), std::string::npos);
    args.push_back("--strict");
    EXPECT_EQ(run(args).code, 1);
}

TEST(Cli, CorrelateWritesTopPairsAsDot) {
    TempDir dir("cli-corr");
    const auto r = run(demo({"analyze", "correlate", "--top", "24", "--dot", "pairs.dot", "--categories",
                             data_path("categories.csv"), "--out", dir.str()}));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto dot = slurp(dir.str("pairs.dot"));
    EXPECT_EQ(dot.rfind("graph environment_correlation {", 0), 0u);
    EXPECT_EQ(count(dot, " -- "), 24u);
    EXPECT_EQ(count(slurp(dir.str("correlation_pairs.csv")), "\n"), 26u);
    EXPECT_EQ(count(slurp(dir.str("correlation_matrix.csv")), "\n"), 22u);
}

TEST(Cli, RankSingleAndFairness) {
    TempDir dir("cli-analyze");
    ASSERT_EQ(run(demo({"analyze", "rank-single", "--out", dir.str()})).code, 0);
    EXPECT_EQ(count(slurp(dir.str("rank_single.csv")), "\n"), 22u);

    ASSERT_EQ(run(demo({"search", "--size", "3", "--out", dir.str()})).code, 0);
    const auto f = run(demo({"analyze", "fairness", "--model", dir.str("search_best_model.json"), "--out", dir.str()}));
    ASSERT_EQ(f.code, 0) << f.err;
    const auto doc = json::parse(slurp(dir.str("fairness.json")));
    EXPECT_EQ(doc.at("groups").size(), 3u);
    EXPECT_FALSE(slurp(dir.str("fairness.txt")).empty());
}
