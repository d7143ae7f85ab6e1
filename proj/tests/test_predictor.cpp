#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "benchsel/model_io.hpp"
#include "benchsel/predictor.hpp"
#include "test_support.hpp"

using namespace benchsel;

namespace {

NormalizationTable norms() { return load_normalization(support::data_path("normalization.csv")); }

LinearModel fixture(const std::string& name) { return load_model(support::data_path("models/" + name + ".json")); }

std::map<std::string, double> random_scores(const LinearModel& m, const NormalizationTable& n) {
    std::map<std::string, double> raw;
    for (const auto& e : m.environment_ids) raw[e] = n.at(e).random;
    return raw;
}

PredictionReport report(std::string id, double truth, double predicted) {
    PredictionReport r;
    r.algorithm_id = std::move(id);
    r.true_summary = truth;
    r.predicted = predicted;
    r.relative_error = relative_error(truth, predicted).value;
    return r;
}

}  // namespace

TEST(PredictSummary, RandomScoresGiveZero) {
    const auto n = norms();
    for (const char* name : {"atari-1", "atari-3", "atari-5", "atari-10", "atari-3-val", "atari-5-val"}) {
        const auto m = fixture(name);
        EXPECT_EQ(predict_summary(m, random_scores(m, n), n), 0.0) << name;
    }
}

TEST(PredictSummary, AtariOneHandArithmetic) {
    const auto n = norms();
    const auto m = fixture("atari-1");
    const auto& e = n.at("Name This Game");
    // Raw score whose normalized value is 99.
    const double raw = e.random + 0.99 * (e.human - e.random);
    const double predicted = predict_summary(m, {{"NameThisGame", raw}}, n);
    EXPECT_NEAR(predicted, std::pow(10.0, 0.9976 * 2.0) - 1.0, 1e-9);
    EXPECT_NEAR(predicted, 97.90, 5e-3);
}

TEST(PredictSummary, MissingEnvironmentIsNamed) {
    const auto n = norms();
    const auto m = fixture("atari-3");
    try {
        predict_summary(m, {{"Battle Zone", 1.0}, {"Phoenix", 2.0}}, n);
        FAIL() << "expected missing_input_error";
    } catch (const missing_input_error& e) {
        EXPECT_NE(std::string(e.what()).find("Name This Game"), std::string::npos);
    }
}

TEST(PredictSummary, MonotoneInEachRawInput) {
    const auto n = norms();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> frac(-0.2, 30.0), bump(0.0, 5.0);
    for (const char* name : {"atari-3", "atari-5", "atari-10", "atari-5-val"}) {
        const auto m = fixture(name);
        ASSERT_TRUE(m.all_coefficients_nonnegative());
        for (int trial = 0; trial < 200; ++trial) {
            std::map<std::string, double> raw;
            for (const auto& e : m.environment_ids) {
                const auto& c = n.at(e);
                raw[e] = c.random + frac(rng) * (c.human - c.random);
            }
            const double base = predict_summary(m, raw, n);
            auto up = raw;
            const auto& env = m.environment_ids[static_cast<std::size_t>(trial) % m.environment_ids.size()];
            const auto& c = n.at(env);
            up[env] += bump(rng) * (c.human - c.random);
            EXPECT_GE(predict_summary(m, up, n), base);
        }
    }
}

TEST(PredictTable, RowErrorsAreIsolated) {
    const auto n = norms();
    const auto m = fixture("atari-3");
    const auto raw = parse_scores(
        "algorithm,Battle Zone,Name This Game,Phoenix\n"
        "full,37187.5,8049,7242.6\n"
        "partial,37187.5,,7242.6\n"
        "random,2360,2292.35,761.4\n");
    const std::vector<std::optional<double>> truth{100.0, 50.0, std::nullopt};
    const auto reports = predict_table(m, raw, n, &truth);
    ASSERT_EQ(reports.size(), 3u);
    EXPECT_NEAR(*reports[0].predicted, inverse_log_transform(0.9854 * log_transform(100.0)), 1e-9);
    EXPECT_TRUE(reports[0].relative_error.has_value());
    EXPECT_FALSE(reports[1].predicted.has_value());
    EXPECT_NE(reports[1].error.find("Name This Game"), std::string::npos);
    EXPECT_EQ(*reports[2].predicted, 0.0);
    EXPECT_FALSE(reports[2].relative_error.has_value());
}

TEST(PredictTable, InterceptCanGoBelowZeroAndIsFlagged) {
    const auto n = norms();
    LinearModel m{"neg", {"Pong"}, {1.0}, -0.5, {}, false, ""};
    const auto raw = parse_scores("algorithm,Pong\nA,-20.71\n");
    const auto reports = predict_table(m, raw, n);
    ASSERT_TRUE(reports[0].predicted);
    EXPECT_LT(*reports[0].predicted, 0.0);
    EXPECT_GT(*reports[0].predicted, -1.0);
    EXPECT_TRUE(reports[0].below_zero);
}

TEST(RelativeError, Examples) {
    EXPECT_NEAR(relative_error(2041, 2091).value, 0.0245, 5e-5);
    EXPECT_EQ(relative_error(5, 5).value, 0.0);
    EXPECT_NEAR(relative_error(147, 118).value, -0.197, 5e-4);
    EXPECT_NEAR(relative_error(147, 118).absolute(), 0.197, 5e-4);
    EXPECT_THROW(relative_error(0.0, 1.0), undefined_value_error);
    EXPECT_THROW(relative_error(1e-12, 1.0), undefined_value_error);
}

TEST(ApproxRelativeError, Examples) {
    EXPECT_NEAR(approx_relative_error_from_log_mae(0.104 / std::numbers::ln10), 0.104, 1e-12);
    EXPECT_NEAR(approx_relative_error_from_log_mae(0.0452), 0.104, 5e-4);
    EXPECT_EQ(approx_relative_error_from_log_mae(0.0), 0.0);
    EXPECT_THROW(approx_relative_error_from_log_mae(-1.0), validation_error);
    EXPECT_THROW(approx_relative_error_from_log_mae(0.1, 1.0), validation_error);
}

TEST(ApproxRelativeError, HandComputedGap) {
    const double delta = std::log10(111.0 / 101.0);
    EXPECT_NEAR(delta, 0.04100, 5e-6);
    EXPECT_NEAR(approx_relative_error_from_log_mae(delta), 0.0944, 5e-5);
    EXPECT_NEAR((110.0 - 100.0) / (1.0 + 100.0), 0.0990, 5e-5);
}

TEST(InversionCount, Examples) {
    const std::vector<std::string> a{"C51", "IQN", "C2D", "Rainbow"};
    EXPECT_EQ(inversion_count(a, a), 0u);
    EXPECT_EQ(inversion_count(a, {"IQN", "C51", "C2D", "Rainbow"}), 1u);
    EXPECT_EQ(inversion_count(a, {"Rainbow", "C2D", "IQN", "C51"}), 6u);
    EXPECT_THROW(inversion_count(a, {"C51", "IQN", "C2D"}), validation_error);
    EXPECT_THROW(inversion_count(a, {"C51", "IQN", "C2D", "DQN"}), validation_error);
}

TEST(InversionCount, SymmetricOnRandomPermutations) {
    std::mt19937_64 rng(3);
    std::vector<std::string> base;
    for (int i = 0; i < 12; ++i) base.push_back("a" + std::to_string(i));
    for (int trial = 0; trial < 100; ++trial) {
        auto x = base, y = base;
        std::shuffle(x.begin(), x.end(), rng);
        std::shuffle(y.begin(), y.end(), rng);
        EXPECT_EQ(inversion_count(x, y), inversion_count(y, x));
        EXPECT_EQ(inversion_count(x, x), 0u);
    }
}

TEST(RebaseScores, CaseStudyRows) {
    std::vector<PredictionReport> rs{report("C51", 109, 96), report("IQN", 129, 95), report("C2D", 133, 111),
                                     report("Rainbow", 147, 118)};
    const auto rebased = rebase_scores(rs, "Rainbow");
    EXPECT_NEAR(*rebased[2].true_summary, 0.90, 5e-3);
    EXPECT_NEAR(*rebased[2].predicted, 0.94, 5e-3);
    EXPECT_EQ(*rebased[3].true_summary, 1.0);
    EXPECT_EQ(*rebased[3].predicted, 1.0);
    EXPECT_EQ(*rebased[3].relative_error, 0.0);
    EXPECT_THROW(rebase_scores(rs, "DQN"), validation_error);
}

TEST(RebaseScores, AllEqualGivesOnes) {
    std::vector<PredictionReport> rs{report("a", 50, 40), report("b", 50, 40), report("c", 50, 40)};
    for (const auto& r : rebase_scores(rs, "b")) {
        EXPECT_EQ(*r.true_summary, 1.0);
        EXPECT_EQ(*r.predicted, 1.0);
    }
}

TEST(OrderBy, StableAscending) {
    std::vector<PredictionReport> rs{report("x", 3, 1), report("y", 1, 2), report("z", 2, 2)};
    EXPECT_EQ(order_by(rs, [](const PredictionReport& r) { return r.true_summary; }),
              (std::vector<std::string>{"y", "z", "x"}));
    EXPECT_EQ(order_by(rs, [](const PredictionReport& r) { return r.predicted; }),
              (std::vector<std::string>{"x", "y", "z"}));
}
