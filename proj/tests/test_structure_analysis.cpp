#include <gtest/gtest.h>

#include <random>
#include <set>

#include "benchsel/structure_analysis.hpp"
#include "test_support.hpp"

using namespace benchsel;
using benchsel::support::synthetic_dataset;

namespace {

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    const long double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    return static_cast<double>(cov / std::sqrt(vx * vy));
}

PreparedDataset with_columns(const std::vector<std::vector<std::optional<double>>>& cols,
                             const std::vector<std::string>& names, std::vector<double> targets) {
    const std::size_t na = targets.size();
    std::vector<std::optional<double>> logs;
    for (std::size_t a = 0; a < na; ++a) {
        for (const auto& c : cols) logs.push_back(c[a]);
    }
    return PreparedDataset(support::alg_names(na), names, logs, std::move(targets));
}

PredictionReport report(std::string id, double truth, double rel) {
    PredictionReport r;
    r.algorithm_id = std::move(id);
    r.true_summary = truth;
    r.predicted = truth * (1.0 + rel);
    r.relative_error = rel;
    return r;
}

}  // namespace

TEST(RankSingleGames, PerfectColumnRanksLast) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<double> t(25);
    std::vector<std::optional<double>> noisy(25), exact(25), other(25);
    for (std::size_t a = 0; a < 25; ++a) {
        t[a] = u(rng);
        exact[a] = t[a];
        noisy[a] = std::max(0.0, t[a] + 0.5 * (u(rng) - 1.5));
        other[a] = u(rng);
    }
    const auto d = with_columns({noisy, exact, other}, {"noisy", "exact", "other"}, t);
    const auto r = rank_single_games(d);
    ASSERT_EQ(r.ranked.size(), 3u);
    EXPECT_EQ(r.ranked.back().environment, "exact");
    EXPECT_NEAR(r.ranked.back().r_squared, 1.0, 1e-12);
    EXPECT_NEAR(r.ranked.back().slope, 1.0, 1e-12);
    EXPECT_NEAR(r.ranked.back().intercept, 0.0, 1e-12);
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
        EXPECT_GE(r.ranked[i].r_squared, 0.0);
        EXPECT_LE(r.ranked[i].r_squared, 1.0 + 1e-12);
        if (i) {
            EXPECT_LE(r.ranked[i - 1].r_squared, r.ranked[i].r_squared);
        }
    }
}

TEST(RankSingleGames, SparseEnvironmentExcluded) {
    std::vector<double> t{0.1, 0.5, 0.9, 1.3, 1.7};
    std::vector<std::optional<double>> full{0.2, 0.4, 0.8, 1.2, 1.9}, sparse{0.3, 1.0, std::nullopt, std::nullopt,
                                                                             std::nullopt};
    const auto d = with_columns({full, sparse}, {"full", "sparse"}, t);
    const auto r = rank_single_games(d);
    ASSERT_EQ(r.ranked.size(), 1u);
    ASSERT_EQ(r.excluded.size(), 1u);
    EXPECT_EQ(r.excluded[0].first, "sparse");
}

TEST(Pearson, MatchesOracleWithPairwiseCompleteRows) {
    const auto d = synthetic_dataset({.algorithms = 50, .environments = 7, .missing_rate = 0.2, .seed = 9,
                                      .weights = {{0, 1.0}}});
    const auto g = pearson_matrix(d, 3);
    for (std::size_t i = 0; i < d.n_environments(); ++i) {
        EXPECT_EQ(*g.pcc(i, i), 1.0);
        for (std::size_t j = 0; j < d.n_environments(); ++j) {
            std::vector<double> x, y;
            for (std::size_t a = 0; a < d.n_algorithms(); ++a) {
                if (d.has(a, i) && d.has(a, j)) {
                    x.push_back(d.value(a, i));
                    y.push_back(d.value(a, j));
                }
            }
            EXPECT_EQ(g.n_pairs(i, j), x.size());
            if (i == j) continue;
            EXPECT_NEAR(*g.pcc(i, j), oracle_pearson(x, y), 1e-12);
            EXPECT_EQ(*g.pcc(i, j), *g.pcc(j, i));
            EXPECT_LE(std::abs(*g.pcc(i, j)), 1.0);
        }
    }
}

TEST(Pearson, NegationAndUndefinedCells) {
    std::vector<double> t{1, 2, 3, 4, 5};
    std::vector<std::optional<double>> a{0.1, 0.5, 0.7, 1.5, 2.0}, neg, constant(5, 1.0),
        sparse{1.0, 2.0, std::nullopt, std::nullopt, std::nullopt};
    for (const auto& v : a) neg.push_back(3.0 - *v);
    const auto d = with_columns({a, neg, constant, sparse}, {"a", "neg", "const", "sparse"}, t);
    const auto g = pearson_matrix(d);
    EXPECT_NEAR(*g.pcc(0, 1), -1.0, 1e-12);
    EXPECT_FALSE(g.pcc(0, 2).has_value());
    EXPECT_FALSE(g.pcc(0, 3).has_value());
    EXPECT_FALSE(g.pcc(2, 2).has_value() && *g.pcc(2, 2) != 1.0);
    EXPECT_EQ(*g.pcc(3, 3), 1.0);
}

TEST(Pearson, AffineInvariance) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> scale(0.1, 5.0), shift(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = synthetic_dataset({.algorithms = 30, .environments = 5, .missing_rate = 0.1,
                                          .seed = static_cast<std::uint64_t>(trial), .weights = {{0, 1.0}}});
        const std::size_t col = static_cast<std::size_t>(trial) % 5;
        const double s = scale(rng), c = shift(rng);
        std::vector<std::optional<double>> logs;
        for (std::size_t a = 0; a < d.n_algorithms(); ++a) {
            for (std::size_t e = 0; e < d.n_environments(); ++e) {
                auto v = d.log_score(a, e);
                if (v && e == col) v = s * *v + c;
                logs.push_back(v);
            }
        }
        const PreparedDataset p(d.algorithms(), d.environments(), logs, d.targets());
        const auto g1 = pearson_matrix(d), g2 = pearson_matrix(p);
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(*g1.pcc(i, j), *g2.pcc(i, j), 1e-10);
        }
    }
}

TEST(Pearson, WorkerCountDoesNotChangeResult) {
    const auto d = synthetic_dataset({.algorithms = 40, .environments = 25, .missing_rate = 0.1, .seed = 2,
                                      .weights = {{0, 1.0}}});
    const auto a = pearson_matrix(d, 1), b = pearson_matrix(d, 8);
    for (std::size_t i = 0; i < 25; ++i) {
        for (std::size_t j = 0; j < 25; ++j) EXPECT_EQ(a.pcc(i, j), b.pcc(i, j));
    }
}

TEST(CorrelatedPairs, DuplicatedColumnFirstAndStrictThreshold) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<double> t(20);
    std::vector<std::optional<double>> a(20), b(20), c(20);
    for (std::size_t k = 0; k < 20; ++k) {
        a[k] = u(rng);
        b[k] = u(rng);
        c[k] = a[k];
        t[k] = 1.0;
    }
    const auto d = with_columns({a, b, c}, {"A", "B", "C"}, t);
    const auto g = pearson_matrix(d);
    const auto pairs = correlated_pairs(g, 0.9, 24);
    ASSERT_EQ(pairs.size(), 3u);
    EXPECT_EQ(pairs[0].a, "A");
    EXPECT_EQ(pairs[0].b, "C");
    EXPECT_NEAR(pairs[0].pcc, 1.0, 1e-12);
    EXPECT_TRUE(pairs[0].highly_correlated);
    for (const auto& p : correlated_pairs(g, 1.0, 24)) EXPECT_FALSE(p.highly_correlated);
    EXPECT_EQ(correlated_pairs(g, 0.9, 1).size(), 1u);
    EXPECT_THROW(correlated_pairs(g, 1.5, 1), validation_error);
}

TEST(NegativePairs, FlagsBelowMinusThreshold) {
    std::vector<double> t{1, 2, 3, 4, 5};
    std::vector<std::optional<double>> a{0.1, 0.5, 0.7, 1.5, 2.0}, neg, other{0.3, 0.1, 0.4, 0.1, 0.5};
    for (const auto& v : a) neg.push_back(3.0 - *v);
    const auto d = with_columns({a, neg, other}, {"a", "neg", "other"}, t);
    const auto pairs = negatively_correlated_pairs(pearson_matrix(d), 0.5);
    ASSERT_GE(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].a, "a");
    EXPECT_EQ(pairs[0].b, "neg");
    for (const auto& p : pairs) EXPECT_LT(p.pcc, -0.5);
}

TEST(ExportDot, EmptyGraph) {
    EXPECT_EQ(export_dot({}, {}), "graph environment_correlation {\n}\n");
}

TEST(ExportDot, SingleBoldPair) {
    const std::vector<CorrelatedPair> pairs{{"Alien", "Ms Pacman", 0.95, 40, true}};
    const auto dot = export_dot(pairs, {{"Alien", "maze"}, {"MsPacman", "maze"}});
    EXPECT_NE(dot.find("\"Alien\" -- \"Ms Pacman\" [label=\"0.95\", style=bold];"), std::string::npos) << dot;
    EXPECT_NE(dot.find("category=\"maze\""), std::string::npos);
    EXPECT_EQ(dot, export_dot(pairs, {{"Alien", "maze"}, {"MsPacman", "maze"}}));
}

TEST(ExportDot, EdgeAndNodeCounts) {
    const auto d = synthetic_dataset({.algorithms = 30, .environments = 12, .seed = 5, .weights = {{0, 1.0}}});
    const auto pairs = correlated_pairs(pearson_matrix(d), 0.9, 24);
    ASSERT_EQ(pairs.size(), 24u);
    std::set<std::string> endpoints;
    for (const auto& p : pairs) endpoints.insert({p.a, p.b});
    const auto dot = export_dot(pairs, {});
    std::size_t edges = 0, nodes = 0, pos = 0;
    while ((pos = dot.find(" -- ", pos)) != std::string::npos) ++edges, ++pos;
    for (const auto& e : endpoints) {
        if (dot.find("  \"" + e + "\" [") != std::string::npos) ++nodes;
    }
    EXPECT_EQ(edges, 24u);
    EXPECT_EQ(nodes, endpoints.size());
}

TEST(Categories, ShippedSidecarCoversEveryGame) {
    const auto cats = load_categories(support::data_path("categories.csv"));
    EXPECT_EQ(cats.size(), 57u);
    EXPECT_THROW(parse_categories("game,genre\nPong,sports\n"), schema_error);
}

TEST(WelchTest, IdenticalGroupsGiveZero) {
    const std::vector<double> a{0.1, 0.2, 0.3, 0.5}, b{0.5, 0.3, 0.2, 0.1};
    const auto w = welch_t_test(a, b);
    EXPECT_EQ(w.t, 0.0);
    EXPECT_NEAR(w.p_value, 1.0, 1e-12);
}

TEST(WelchTest, MatchesHandComputation) {
    const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8, 10};
    // means 2.5 / 6, variances 5/3 / 10
    const double qa = (5.0 / 3.0) / 4.0, qb = 10.0 / 5.0;
    const double t = (2.5 - 6.0) / std::sqrt(qa + qb);
    const double df = (qa + qb) * (qa + qb) / (qa * qa / 3.0 + qb * qb / 4.0);
    const auto w = welch_t_test(a, b);
    EXPECT_NEAR(w.t, t, 1e-12);
    EXPECT_NEAR(w.df, df, 1e-12);
    EXPECT_GT(w.p_value, 0.0);
    EXPECT_LT(w.p_value, 0.1);
    EXPECT_THROW(welch_t_test(std::vector<double>{1}, b), validation_error);
}

TEST(Fairness, TertilesPartitionWithRemainderBelow) {
    std::vector<PredictionReport> rs;
    for (int i = 0; i < 11; ++i) rs.push_back(report("a" + std::to_string(i), 10.0 + i, i % 2 ? 0.1 : -0.1));
    const auto f = fairness_report(rs);
    ASSERT_EQ(f.groups.size(), 3u);
    EXPECT_EQ(f.groups[0].algorithms.size(), 4u);
    EXPECT_EQ(f.groups[1].algorithms.size(), 4u);
    EXPECT_EQ(f.groups[2].algorithms.size(), 3u);
    std::set<std::string> all;
    for (const auto& g : f.groups) all.insert(g.algorithms.begin(), g.algorithms.end());
    EXPECT_EQ(all.size(), 11u);
    EXPECT_EQ(f.groups[0].algorithms.front(), "a0");
    EXPECT_EQ(f.tests.size(), 6u);
}

TEST(Fairness, SymmetricErrorsShowNoBias) {
    std::vector<PredictionReport> rs;
    for (int i = 0; i < 12; ++i) rs.push_back(report("a" + std::to_string(i), 10.0 + i, i % 2 ? 0.05 : -0.05));
    const auto f = fairness_report(rs);
    for (const auto& g : f.groups) {
        EXPECT_NEAR(g.mean_rel_error, 0.0, 1e-15);
        EXPECT_NEAR(g.mean_abs_rel_error, 0.05, 1e-15);
    }
    EXPECT_FALSE(f.any_significant());
}

TEST(Fairness, TooFewReports) {
    std::vector<PredictionReport> rs;
    for (int i = 0; i < 5; ++i) rs.push_back(report("a" + std::to_string(i), 1.0 + i, 0.1));
    EXPECT_THROW(fairness_report(rs), validation_error);
}
