#pragma once

// Diagnostics over a prepared dataset: single-environment predictive ranking,
// pairwise correlation structure, the tertile fairness audit of subset
// predictions, and a Graphviz export of the strongest correlations.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "benchsel/csv.hpp"
#include "benchsel/errors.hpp"
#include "benchsel/linreg.hpp"
#include "benchsel/parallel.hpp"
#include "benchsel/predictor.hpp"
#include "benchsel/score_table.hpp"

namespace benchsel {

// ---------------------------------------------------------------------------
// Single-environment ranking

struct SingleGameFit {
    std::string environment;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n_used = 0;
};

struct SingleGameRanking {
    std::vector<SingleGameFit> ranked;  // ascending by r_squared
    std::vector<std::pair<std::string, std::string>> excluded;  // environment, reason
};

/// Two-parameter fit target ~ a + b * log_score(env) per environment, on the
/// algorithms that have that environment. In-sample R^2, no cross-validation.
inline SingleGameRanking rank_single_games(const PreparedDataset& d) {
    SingleGameRanking out;
    for (std::size_t e = 0; e < d.n_environments(); ++e) {
        std::vector<double> xs, ts;
        for (std::size_t a = 0; a < d.n_algorithms(); ++a) {
            if (!d.has(a, e)) continue;
            xs.push_back(d.value(a, e));
            ts.push_back(d.targets()[a]);
        }
        const auto& name = d.environments()[e];
        if (xs.size() < 3) {
            out.excluded.emplace_back(name, "fewer than 3 usable algorithms");
            continue;
        }
        Matrix x(xs.size(), 1);
        for (std::size_t k = 0; k < xs.size(); ++k) x(k, 0) = xs[k];
        try {
            const auto m = fit_ols(x, ts, true, std::vector<std::string>{name});
            out.ranked.push_back({name, m.coefficients[0], *m.intercept, m.stats.r_squared, xs.size()});
        } catch (const singular_matrix_error&) {
            out.excluded.emplace_back(name, "constant log scores");
        }
    }
    std::stable_sort(out.ranked.begin(), out.ranked.end(),
                     [](const SingleGameFit& a, const SingleGameFit& b) { return a.r_squared < b.r_squared; });
    return out;
}

// ---------------------------------------------------------------------------
// Correlation structure

class CorrelationGraph {
public:
    CorrelationGraph() = default;
    CorrelationGraph(std::vector<std::string> environments, std::vector<double> pcc, std::vector<std::size_t> n_pairs)
        : environments_(std::move(environments)), pcc_(std::move(pcc)), n_pairs_(std::move(n_pairs)) {}

    const std::vector<std::string>& environments() const noexcept { return environments_; }
    std::size_t size() const noexcept { return environments_.size(); }

    /// Empty where fewer than 3 algorithms share both environments or one
    /// column is constant over the shared rows.
    std::optional<double> pcc(std::size_t i, std::size_t j) const {
        const double v = pcc_[i * size() + j];
        return std::isnan(v) ? std::nullopt : std::optional<double>(v);
    }
    std::size_t n_pairs(std::size_t i, std::size_t j) const { return n_pairs_[i * size() + j]; }

    std::map<std::string, std::string> categories;  // environment -> genre

private:
    std::vector<std::string> environments_;
    std::vector<double> pcc_;
    std::vector<std::size_t> n_pairs_;
};

inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Pairwise-complete Pearson correlation of log scores for every environment
/// pair. Rows of the upper triangle are shared among workers; each cell is
/// computed independently so the result does not depend on the worker count.
inline CorrelationGraph pearson_matrix(const PreparedDataset& d, std::size_t workers = 1) {
    const std::size_t n = d.n_environments();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> pcc(n * n, nan);
    std::vector<std::size_t> counts(n * n, 0);

    std::atomic<std::size_t> next_row{0};
    run_workers(std::max<std::size_t>(1, std::min(resolve_workers(workers), std::max<std::size_t>(n, 1))),
                [&](std::size_t) {
                    std::vector<double> xs, ys;
                    while (true) {
                        const std::size_t i = next_row.fetch_add(1);
                        if (i >= n) break;
                        for (std::size_t j = i; j < n; ++j) {
                            xs.clear();
                            ys.clear();
                            for (std::size_t a = 0; a < d.n_algorithms(); ++a) {
                                if (d.has(a, i) && d.has(a, j)) {
                                    xs.push_back(d.value(a, i));
                                    ys.push_back(d.value(a, j));
                                }
                            }
                            counts[i * n + j] = counts[j * n + i] = xs.size();
                            std::optional<double> r;
                            if (i == j) {
                                if (xs.size() >= 2) r = 1.0;
                            } else if (xs.size() >= 3) {
                                r = pearson(xs, ys);
                            }
                            if (r) pcc[i * n + j] = pcc[j * n + i] = *r;
                        }
                    }
                });
    return CorrelationGraph(d.environments(), std::move(pcc), std::move(counts));
}

struct CorrelatedPair {
    std::string a;
    std::string b;
    double pcc = 0.0;
    std::size_t n_pairs = 0;
    bool highly_correlated = false;
};

/// Defined off-diagonal pairs sorted by descending PCC (ties by names),
/// tagged highly correlated when PCC > threshold, truncated to top_n.
inline std::vector<CorrelatedPair> correlated_pairs(const CorrelationGraph& g, double threshold, std::size_t top_n) {
    if (threshold < 0.0 || threshold > 1.0) throw validation_error("threshold must lie in [0, 1]");
    std::vector<CorrelatedPair> pairs;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (auto r = g.pcc(i, j)) {
                pairs.push_back({g.environments()[i], g.environments()[j], *r, g.n_pairs(i, j), *r > threshold});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const CorrelatedPair& x, const CorrelatedPair& y) {
        if (x.pcc != y.pcc) return x.pcc > y.pcc;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    if (pairs.size() > top_n) pairs.resize(top_n);
    return pairs;
}

/// Pairs with PCC below -threshold, most negative first.
inline std::vector<CorrelatedPair> negatively_correlated_pairs(const CorrelationGraph& g, double threshold) {
    std::vector<CorrelatedPair> pairs;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (auto r = g.pcc(i, j); r && *r < -threshold) {
                pairs.push_back({g.environments()[i], g.environments()[j], *r, g.n_pairs(i, j), false});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const CorrelatedPair& x, const CorrelatedPair& y) {
        if (x.pcc != y.pcc) return x.pcc < y.pcc;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return pairs;
}

inline std::map<std::string, std::string> parse_categories(std::string_view text) {
    const auto records = csv::parse(text);
    if (records.empty() || records.front().fields.size() != 2 ||
        canonical_key(records.front().fields[0]) != "environment" ||
        canonical_key(records.front().fields[1]) != "category") {
        throw schema_error("header must be 'environment,category'", records.empty() ? 0 : records.front().line, 1);
    }
    std::map<std::string, std::string> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != 2) throw schema_error("expected 2 fields", rec.line, 1);
        out[rec.fields[0]] = rec.fields[1];
    }
    return out;
}

inline std::map<std::string, std::string> load_categories(const std::string& path) {
    return parse_categories(csv::read_file(path));
}

/// Graphviz "graph" document. Nodes are sorted by name and filled with a
/// colour per category; edges follow the input order, are labelled with the
/// PCC to two decimals and drawn bold when highly correlated.
inline std::string export_dot(const std::vector<CorrelatedPair>& pairs,
                              const std::map<std::string, std::string>& categories) {
    static constexpr const char* kPalette[] = {
        "lightblue", "lightcoral", "palegreen", "gold",      "plum",       "lightsalmon",
        "khaki",     "turquoise",  "pink",      "lightgray", "aquamarine", "wheat",
    };
    std::map<std::string, std::string> by_key;
    for (const auto& [env, cat] : categories) by_key[canonical_key(env)] = cat;

    std::set<std::string> nodes;
    for (const auto& p : pairs) {
        nodes.insert(p.a);
        nodes.insert(p.b);
    }
    std::set<std::string> used_categories;
    for (const auto& n : nodes) {
        if (auto it = by_key.find(canonical_key(n)); it != by_key.end()) used_categories.insert(it->second);
    }
    std::map<std::string, std::string> colour;
    std::size_t k = 0;
    for (const auto& c : used_categories) colour[c] = kPalette[k++ % std::size(kPalette)];

    const auto quote = [](const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        return out + "\"";
    };

    std::ostringstream os;
    os << "graph environment_correlation {\n";
    if (!pairs.empty()) os << "  node [style=filled, shape=ellipse];\n";
    for (const auto& n : nodes) {
        auto it = by_key.find(canonical_key(n));
        os << "  " << quote(n) << " [fillcolor=";
        if (it != by_key.end()) {
            os << quote(colour[it->second]) << ", category=" << quote(it->second);
        } else {
            os << "\"white\"";
        }
        os << "];\n";
    }
    for (const auto& p : pairs) {
        char label[32];
        std::snprintf(label, sizeof(label), "%.2f", p.pcc);
        os << "  " << quote(p.a) << " -- " << quote(p.b) << " [label=\"" << label << "\"";
        if (p.highly_correlated) os << ", style=bold";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Fairness audit

struct WelchTest {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Unequal-variance two-sample t-test, two-sided, Welch-Satterthwaite degrees
/// of freedom.
inline WelchTest welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw validation_error("each group needs at least 2 members for a t-test");
    const auto moments = [](std::span<const double> v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::pair{m, s / static_cast<double>(v.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double qa = va / na, qb = vb / nb;
    const double se2 = qa + qb;
    WelchTest out;
    if (se2 == 0.0) {
        out.df = na + nb - 2.0;
        if (ma == mb) {
            out.t = 0.0;
            out.p_value = 1.0;
        } else {
            out.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            out.p_value = 0.0;
        }
        return out;
    }
    out.t = (ma - mb) / std::sqrt(se2);
    out.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    const boost::math::students_t dist(out.df);
    out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t))));
    return out;
}

struct FairnessGroup {
    std::string label;  // low, mid, high
    std::vector<std::string> algorithms;
    double mean_abs_rel_error = 0.0;
    double mean_rel_error = 0.0;
};

struct FairnessTest {
    std::string group_a;
    std::string group_b;
    std::string metric;  // abs_rel_error or rel_error
    WelchTest test;
    bool significant = false;
};

struct FairnessReport {
    std::vector<FairnessGroup> groups;
    std::vector<FairnessTest> tests;
    double alpha = 0.05;

    bool any_significant() const {
        return std::any_of(tests.begin(), tests.end(), [](const FairnessTest& t) { return t.significant; });
    }
};

/// Sorts the reports by true summary, splits them into tertiles (the lower
/// tertiles take the remainder) and compares mean absolute and signed
/// relative error between every pair of tertiles.
inline FairnessReport fairness_report(const std::vector<PredictionReport>& reports, double alpha = 0.05) {
    std::vector<const PredictionReport*> rows;
    for (const auto& r : reports) {
        if (r.true_summary && r.relative_error) rows.push_back(&r);
    }
    if (rows.size() < 6) {
        throw validation_error("fairness audit needs at least 6 algorithms with true summaries and predictions, got " +
                               std::to_string(rows.size()));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto* a, const auto* b) { return *a->true_summary < *b->true_summary; });

    FairnessReport out;
    out.alpha = alpha;
    const std::size_t n = rows.size(), base = n / 3, extra = n % 3;
    const char* labels[] = {"low", "mid", "high"};
    std::vector<std::vector<double>> abs_err(3), signed_err(3);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < 3; ++g) {
        FairnessGroup group;
        group.label = labels[g];
        const std::size_t size = base + (g < extra ? 1 : 0);
        if (size < 2) throw validation_error("tertile '" + group.label + "' has fewer than 2 members");
        for (std::size_t k = 0; k < size; ++k, ++pos) {
            const auto* r = rows[pos];
            group.algorithms.push_back(r->algorithm_id);
            abs_err[g].push_back(std::abs(*r->relative_error));
            signed_err[g].push_back(*r->relative_error);
        }
        for (double v : abs_err[g]) group.mean_abs_rel_error += v;
        for (double v : signed_err[g]) group.mean_rel_error += v;
        group.mean_abs_rel_error /= static_cast<double>(size);
        group.mean_rel_error /= static_cast<double>(size);
        out.groups.push_back(std::move(group));
    }
    const std::pair<std::size_t, std::size_t> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& [i, j] : pairs) {
        for (int metric = 0; metric < 2; ++metric) {
            const auto& src = metric == 0 ? abs_err : signed_err;
            FairnessTest t;
            t.group_a = labels[i];
            t.group_b = labels[j];
            t.metric = metric == 0 ? "abs_rel_error" : "rel_error";
            t.test = welch_t_test(src[i], src[j]);
            t.significant = t.test.p_value < alpha;
            out.tests.push_back(std::move(t));
        }
    }
    return out;
}

}  // namespace benchsel
