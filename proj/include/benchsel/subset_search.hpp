#pragma once

// Exhaustive subset search. Every C-subset of the eligible environments is
// fitted against the target and scored by k-fold CV MSE; the nested pipeline
// chains several such searches into a family of named subsets.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "benchsel/errors.hpp"
#include "benchsel/linreg.hpp"
#include "benchsel/model_io.hpp"
#include "benchsel/parallel.hpp"
#include "benchsel/score_table.hpp"

namespace benchsel {

struct SearchConfig {
    std::size_t subset_size = 5;
    std::vector<std::string> must_include;
    std::vector<std::string> exclude;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    bool with_intercept = false;
    std::size_t top_k = 10;
    /// 0 = auto (see resolve_workers).
    std::size_t workers = 1;
    /// Candidates handed to a worker at a time.
    std::size_t block_size = 4096;
    /// One status line per million candidates when set.
    std::ostream* progress = nullptr;
};

struct SkipStats {
    std::uint64_t too_few_algorithms = 0;
    std::uint64_t singular = 0;

    std::uint64_t total() const noexcept { return too_few_algorithms + singular; }
};

struct RankedModel {
    std::vector<std::string> environments;  // dataset order
    LinearModel model;                      // refit on all usable algorithms
    double cv_mse = 0.0;
    std::size_t n_algorithms_used = 0;
};

struct SearchResult {
    std::vector<RankedModel> ranked;
    std::uint64_t candidates = 0;
    std::uint64_t scored = 0;
    SkipStats skipped;

    const RankedModel& best() const {
        if (ranked.empty()) throw empty_search_error("search produced no ranked models");
        return ranked.front();
    }
};

/// Binomial coefficient; throws when the value does not fit in 64 bits.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) throw validation_error("candidate count overflows");
    }
    return static_cast<std::uint64_t>(r);
}

namespace detail {

/// Combination with the given colex rank: positions c[0] < ... < c[r-1]
/// with rank = sum C(c[i], i + 1).
inline void colex_unrank(std::uint64_t rank, std::size_t r, std::vector<std::size_t>& c) {
    c.resize(r);
    for (std::size_t i = r; i-- > 0;) {
        std::size_t v = i;  // C(i, i+1) = 0 <= rank always holds
        while (binomial(v + 1, i + 1) <= rank) ++v;
        c[i] = v;
        rank -= binomial(v, i + 1);
    }
}

/// Advances to the colex successor. Returns false after the last one.
inline bool colex_next(std::vector<std::size_t>& c, std::size_t m) {
    const std::size_t r = c.size();
    for (std::size_t i = 0; i < r; ++i) {
        const std::size_t limit = (i + 1 < r) ? c[i + 1] : m;
        if (c[i] + 1 < limit) {
            ++c[i];
            for (std::size_t j = 0; j < i; ++j) c[j] = j;
            return true;
        }
    }
    return false;
}

struct ScoredCandidate {
    std::vector<std::size_t> columns;    // dataset indices, ascending
    std::vector<std::size_t> name_rank;  // sorted ranks of the names, for tie-breaks
    double cv_mse = 0.0;
    std::size_t n_used = 0;
};

/// Total order: cv_mse, then lexicographic environment names.
inline bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.cv_mse != b.cv_mse) return a.cv_mse < b.cv_mse;
    return a.name_rank < b.name_rank;
}

class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    void offer(ScoredCandidate&& c) {
        if (k_ == 0) return;
        if (items_.size() == k_ && !ranks_before(c, items_.back())) return;
        auto pos = std::upper_bound(items_.begin(), items_.end(), c, ranks_before);
        items_.insert(pos, std::move(c));
        if (items_.size() > k_) items_.pop_back();
    }

    std::vector<ScoredCandidate>& items() noexcept { return items_; }

private:
    std::size_t k_;
    std::vector<ScoredCandidate> items_;
};

/// Presence bitsets per environment for fast row intersection.
class PresenceIndex {
public:
    explicit PresenceIndex(const PreparedDataset& d)
        : words_((d.n_algorithms() + 63) / 64), bits_(d.n_environments() * words_, 0) {
        for (std::size_t e = 0; e < d.n_environments(); ++e) {
            for (std::size_t a = 0; a < d.n_algorithms(); ++a) {
                if (d.has(a, e)) bits_[e * words_ + a / 64] |= std::uint64_t{1} << (a % 64);
            }
        }
    }

    /// Algorithms (ascending) that have every listed environment.
    void rows_with_all(std::span<const std::size_t> envs, std::vector<std::size_t>& out,
                       std::vector<std::uint64_t>& scratch) const {
        scratch.assign(words_, ~std::uint64_t{0});
        for (auto e : envs) {
            for (std::size_t w = 0; w < words_; ++w) scratch[w] &= bits_[e * words_ + w];
        }
        out.clear();
        for (std::size_t w = 0; w < words_; ++w) {
            std::uint64_t word = scratch[w];
            while (word) {
                const int bit = __builtin_ctzll(word);
                out.push_back(w * 64 + static_cast<std::size_t>(bit));
                word &= word - 1;
            }
        }
    }

private:
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

inline std::vector<std::size_t> resolve_names(const PreparedDataset& d, const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& n : names) out.push_back(d.require_environment(n));
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
        throw validation_error("environment listed twice in a constraint set");
    }
    return out;
}

/// Design matrix and target restricted to `rows`, columns in the given order.
inline void gather(const PreparedDataset& d, std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                   std::vector<double>& x, std::vector<double>& t) {
    x.resize(rows.size() * cols.size());
    t.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t i = 0; i < cols.size(); ++i) x[k * cols.size() + i] = d.value(rows[k], cols[i]);
        t[k] = d.targets()[rows[k]];
    }
}

}  // namespace detail

/// Fits target ~ the given environments on every algorithm that has all of
/// them. The usable-row count lands in stats.n_observations.
inline LinearModel fit_subset(const PreparedDataset& d, const std::vector<std::string>& environments,
                              bool with_intercept, bool nonnegative = false) {
    std::vector<std::size_t> cols;
    for (const auto& n : environments) cols.push_back(d.require_environment(n));
    detail::PresenceIndex presence(d);
    std::vector<std::size_t> rows;
    std::vector<std::uint64_t> scratch;
    presence.rows_with_all(cols, rows, scratch);
    std::vector<double> xv, t;
    detail::gather(d, rows, cols, xv, t);
    Matrix x(rows.size(), cols.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t i = 0; i < cols.size(); ++i) x(k, i) = xv[k * cols.size() + i];
    }
    std::vector<std::string> names;
    for (auto c : cols) names.push_back(d.environments()[c]);
    return nonnegative ? fit_nnls(x, t, with_intercept, names) : fit_ols(x, t, with_intercept, names);
}

/// Fits and scores every C-subset that contains `must_include` and avoids
/// `exclude`. Algorithms missing any score of a candidate are dropped for
/// that candidate; candidates left with fewer than columns + 2 algorithms
/// (or fewer algorithms than folds) are skipped and counted, as are
/// candidates whose fit is singular.
inline SearchResult enumerate_and_score(const PreparedDataset& d, const SearchConfig& cfg) {
    const std::size_t C = cfg.subset_size;
    if (C == 0 || C > kMaxColumns) {
        throw validation_error("subset size must be between 1 and " + std::to_string(kMaxColumns));
    }
    if (cfg.folds < 2) throw validation_error("cross-validation needs at least 2 folds");
    const auto must = detail::resolve_names(d, cfg.must_include);
    const auto excl = detail::resolve_names(d, cfg.exclude);
    for (auto m : must) {
        if (std::binary_search(excl.begin(), excl.end(), m)) {
            throw validation_error("environment '" + d.environments()[m] + "' is both included and excluded");
        }
    }
    if (must.size() > C) throw validation_error("more required environments than the subset size");

    std::vector<std::size_t> pool;
    for (std::size_t e = 0; e < d.n_environments(); ++e) {
        if (!std::binary_search(excl.begin(), excl.end(), e) && !std::binary_search(must.begin(), must.end(), e)) {
            pool.push_back(e);
        }
    }
    const std::size_t r = C - must.size();
    if (pool.size() < r) {
        throw validation_error("only " + std::to_string(pool.size() + must.size()) +
                               " eligible environments for a subset of size " + std::to_string(C));
    }
    const std::uint64_t total = binomial(pool.size(), r);

    // Rank of each environment when names are sorted, for tie-breaking.
    std::vector<std::size_t> order(d.n_environments()), name_rank(d.n_environments());
    for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return d.environments()[a] < d.environments()[b]; });
    for (std::size_t i = 0; i < order.size(); ++i) name_rank[order[i]] = i;

    // Permutations and fold boundaries depend only on the usable row count.
    const std::size_t n_alg = d.n_algorithms();
    std::vector<std::vector<std::uint32_t>> perms(n_alg + 1);
    std::vector<std::vector<std::size_t>> bounds(n_alg + 1);
    for (std::size_t n = cfg.folds; n <= n_alg; ++n) {
        perms[n] = detail::seeded_permutation(n, cfg.seed);
        bounds[n] = detail::fold_bounds(n, cfg.folds);
    }

    const detail::PresenceIndex presence(d);
    const std::size_t workers = std::max<std::size_t>(1, resolve_workers(cfg.workers));
    const std::size_t block = std::max<std::size_t>(1, cfg.block_size);
    const std::uint64_t n_blocks = (total + block - 1) / block;

    std::atomic<std::uint64_t> next_block{0};
    std::atomic<std::uint64_t> processed{0};
    std::mutex progress_mu;

    struct WorkerState {
        explicit WorkerState(std::size_t k) : top(k) {}
        detail::TopK top;
        std::uint64_t scored = 0;
        SkipStats skipped;
    };
    std::vector<WorkerState> states;
    states.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) states.emplace_back(cfg.top_k);

    run_workers(workers, [&](std::size_t w) {
        auto& st = states[w];
        std::vector<std::size_t> combo, cols(C), rows;
        std::vector<std::uint64_t> scratch;
        std::vector<double> x, t;
        while (true) {
            const std::uint64_t b = next_block.fetch_add(1);
            if (b >= n_blocks) break;
            const std::uint64_t begin = b * block;
            const std::uint64_t end = std::min<std::uint64_t>(total, begin + block);
            detail::colex_unrank(begin, r, combo);
            for (std::uint64_t rank = begin; rank < end; ++rank) {
                // must_include and the combination, merged in dataset order
                std::size_t k = 0;
                for (std::size_t i = 0; i < r; ++i) cols[k++] = pool[combo[i]];
                for (auto m : must) cols[k++] = m;
                std::sort(cols.begin(), cols.end());

                presence.rows_with_all(cols, rows, scratch);
                const std::size_t n = rows.size();
                if (n < C + 2 || n < cfg.folds) {
                    ++st.skipped.too_few_algorithms;
                } else {
                    detail::gather(d, rows, cols, x, t);
                    try {
                        const double mse =
                            detail::cv_mse_raw(x.data(), t.data(), n, C, cfg.with_intercept, perms[n], bounds[n]);
                        ++st.scored;
                        if (cfg.top_k > 0) {
                            detail::ScoredCandidate cand;
                            cand.cv_mse = mse;
                            cand.n_used = n;
                            cand.columns = cols;
                            cand.name_rank.reserve(C);
                            for (auto c : cols) cand.name_rank.push_back(name_rank[c]);
                            std::sort(cand.name_rank.begin(), cand.name_rank.end());
                            st.top.offer(std::move(cand));
                        }
                    } catch (const singular_matrix_error&) {
                        ++st.skipped.singular;
                    }
                }
                if (rank + 1 < end) detail::colex_next(combo, pool.size());
            }
            const std::uint64_t before = processed.fetch_add(end - begin);
            const std::uint64_t after = before + (end - begin);
            if (cfg.progress && after / 1000000 != before / 1000000) {
                std::lock_guard lock(progress_mu);
                *cfg.progress << "search C=" << C << ": " << (after / 1000000) << "M of " << total
                              << " candidates\n";
                cfg.progress->flush();
            }
        }
    });

    SearchResult result;
    result.candidates = total;
    detail::TopK merged(cfg.top_k);
    for (auto& st : states) {
        result.scored += st.scored;
        result.skipped.too_few_algorithms += st.skipped.too_few_algorithms;
        result.skipped.singular += st.skipped.singular;
        for (auto& c : st.top.items()) merged.offer(std::move(c));
    }
    if (result.scored == 0) {
        throw empty_search_error("no viable candidate among " + std::to_string(total) + " subsets of size " +
                                 std::to_string(C) + " (skipped: " +
                                 std::to_string(result.skipped.too_few_algorithms) + " with too few algorithms, " +
                                 std::to_string(result.skipped.singular) + " singular)");
    }

    for (const auto& c : merged.items()) {
        RankedModel rm;
        for (auto col : c.columns) rm.environments.push_back(d.environments()[col]);
        rm.model = fit_subset(d, rm.environments, cfg.with_intercept);
        rm.model.stats.cv_mse = c.cv_mse;
        rm.cv_mse = c.cv_mse;
        rm.n_algorithms_used = c.n_used;
        result.ranked.push_back(std::move(rm));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Per-game model banks and variance explained

/// For each dataset environment g, fits log-score(g) ~ subset log scores with
/// an intercept on algorithms having g and every subset score. Subset members
/// get exact identity models. Fits with fewer than |subset| + 3 algorithms,
/// or singular fits, are marked unusable.
inline ModelBank per_game_models(const PreparedDataset& d, const std::vector<std::string>& subset,
                                 std::string name = {}) {
    std::vector<std::size_t> cols;
    std::vector<std::string> names;
    for (const auto& s : subset) {
        cols.push_back(d.require_environment(s));
        names.push_back(d.environments()[cols.back()]);
    }
    ModelBank bank;
    bank.name = std::move(name);
    bank.subset = names;

    const detail::PresenceIndex presence(d);
    std::vector<std::size_t> base_rows, rows;
    std::vector<std::uint64_t> scratch;
    presence.rows_with_all(cols, base_rows, scratch);

    for (std::size_t g = 0; g < d.n_environments(); ++g) {
        GameModel gm;
        gm.environment = d.environments()[g];
        rows.clear();
        for (auto a : base_rows) {
            if (d.has(a, g)) rows.push_back(a);
        }
        gm.n_used = rows.size();

        const auto self = std::find(cols.begin(), cols.end(), g);
        if (self != cols.end()) {
            LinearModel m;
            m.name = bank.name + "/" + gm.environment;
            m.environment_ids = names;
            m.coefficients.assign(cols.size(), 0.0);
            m.coefficients[static_cast<std::size_t>(self - cols.begin())] = 1.0;
            m.intercept = 0.0;
            m.stats.r_squared = 1.0;
            m.stats.n_observations = rows.size();
            gm.identity = true;
            gm.model = std::move(m);
            bank.models.push_back(std::move(gm));
            continue;
        }
        if (rows.size() < cols.size() + 3) {
            gm.reason = "only " + std::to_string(rows.size()) + " usable algorithms";
            bank.models.push_back(std::move(gm));
            continue;
        }
        Matrix x(rows.size(), cols.size());
        std::vector<double> t(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (std::size_t i = 0; i < cols.size(); ++i) x(k, i) = d.value(rows[k], cols[i]);
            t[k] = d.value(rows[k], g);
        }
        try {
            auto m = fit_ols(x, t, true, names);
            m.name = bank.name + "/" + gm.environment;
            gm.model = std::move(m);
        } catch (const singular_matrix_error& e) {
            gm.reason = e.what();
        }
        bank.models.push_back(std::move(gm));
    }
    return bank;
}

/// Pooled 1 - SS_res / SS_tot over every present cell the bank can predict
/// (the algorithm has the environment and all subset scores). SS_tot is taken
/// about each environment's mean over those cells. Environments whose model is
/// unusable are left out of both sums.
inline double variance_explained(const ModelBank& bank, const PreparedDataset& d) {
    std::vector<std::size_t> cols;
    for (const auto& s : bank.subset) cols.push_back(d.require_environment(s));
    const detail::PresenceIndex presence(d);
    std::vector<std::size_t> base_rows;
    std::vector<std::uint64_t> scratch;
    presence.rows_with_all(cols, base_rows, scratch);

    double ss_res = 0.0, ss_tot = 0.0;
    std::vector<double> inputs(cols.size());
    for (std::size_t g = 0; g < d.n_environments(); ++g) {
        const auto* gm = bank.find(d.environments()[g]);
        if (!gm) throw validation_error("model bank has no entry for '" + d.environments()[g] + "'");
        if (!gm->model) continue;
        std::vector<double> actual, predicted;
        for (auto a : base_rows) {
            if (!d.has(a, g)) continue;
            for (std::size_t i = 0; i < cols.size(); ++i) inputs[i] = d.value(a, cols[i]);
            actual.push_back(d.value(a, g));
            predicted.push_back(predict_linear(*gm->model, std::span<const double>(inputs)));
        }
        if (actual.empty()) continue;
        double mean = 0.0;
        for (double v : actual) mean += v;
        mean /= static_cast<double>(actual.size());
        for (std::size_t k = 0; k < actual.size(); ++k) {
            ss_res += (actual[k] - predicted[k]) * (actual[k] - predicted[k]);
            ss_tot += (actual[k] - mean) * (actual[k] - mean);
        }
    }
    if (ss_tot == 0.0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

// ---------------------------------------------------------------------------
// Nested pipeline

inline constexpr std::size_t kPipelineMinEnvironments = 15;

struct PipelineStage {
    std::string key;  // size-1, size-3, size-5, size-10, val-3, val-5
    RankedModel selected;
    std::uint64_t candidates = 0;
    std::uint64_t scored = 0;
    SkipStats skipped;
};

struct SubsetSuite {
    std::vector<PipelineStage> stages;  // in execution order
    std::map<std::string, ModelBank> banks;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    /// cv_mse(size-1) >= cv_mse(size-3) >= cv_mse(size-5) on this run.
    bool cv_chain_monotone = true;

    const PipelineStage& stage(std::string_view key) const {
        for (const auto& s : stages) {
            if (s.key == key) return s;
        }
        throw lookup_error("suite has no stage '" + std::string(key) + "'");
    }
    const std::vector<std::string>& subset(std::string_view key) const { return stage(key).selected.environments; }
};

struct PipelineConfig {
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t block_size = 4096;
    std::ostream* progress = nullptr;
};

namespace detail {

inline std::vector<std::string> complement(const PreparedDataset& d, const std::vector<std::string>& keep) {
    std::vector<std::string> out;
    for (const auto& e : d.environments()) {
        const bool kept = std::any_of(keep.begin(), keep.end(),
                                      [&](const std::string& k) { return canonical_key(k) == canonical_key(e); });
        if (!kept) out.push_back(e);
    }
    return out;
}

inline bool is_subset(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::all_of(a.begin(), a.end(), [&](const std::string& x) {
        return std::find(b.begin(), b.end(), x) != b.end();
    });
}

inline bool disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::none_of(a.begin(), a.end(), [&](const std::string& x) {
        return std::find(b.begin(), b.end(), x) != b.end();
    });
}

}  // namespace detail

/// Re-checks the nesting and disjointness relations between named subsets.
inline void check_suite_invariants(const SubsetSuite& s) {
    const auto& s1 = s.subset("size-1");
    const auto& s3 = s.subset("size-3");
    const auto& s5 = s.subset("size-5");
    const auto& s10 = s.subset("size-10");
    const auto& v3 = s.subset("val-3");
    const auto& v5 = s.subset("val-5");
    if (!detail::is_subset(s1, s3) || !detail::is_subset(s3, s5) || !detail::is_subset(s5, s10)) {
        throw validation_error("suite nesting violated: size-1 within size-3 within size-5 within size-10");
    }
    if (!detail::is_subset(v3, v5)) throw validation_error("suite nesting violated: val-3 within val-5");
    if (!detail::disjoint(v5, s5)) throw validation_error("val-5 overlaps size-5");
    std::vector<std::string> extra;
    for (const auto& e : s10) {
        if (std::find(s5.begin(), s5.end(), e) == s5.end()) extra.push_back(e);
    }
    if (!detail::disjoint(extra, v5)) throw validation_error("size-10 additions overlap val-5");
}

/// Runs the ordered searches: size-5 overall; size-3 within size-5; size-1
/// within size-3; val-3 avoiding size-5; val-5 = val-3 plus two more avoiding
/// size-5; size-10 = size-5 plus five more avoiding val-5.
inline SubsetSuite nested_pipeline(const PreparedDataset& d, const PipelineConfig& cfg) {
    if (d.n_environments() < kPipelineMinEnvironments) {
        throw validation_error("the nested pipeline needs at least " + std::to_string(kPipelineMinEnvironments) +
                               " environments; dataset has " + std::to_string(d.n_environments()));
    }
    SubsetSuite suite;
    suite.folds = cfg.folds;
    suite.seed = cfg.seed;

    const auto run = [&](std::string key, std::size_t size, std::vector<std::string> must,
                         std::vector<std::string> exclude) -> const PipelineStage& {
        SearchConfig sc;
        sc.subset_size = size;
        sc.must_include = std::move(must);
        sc.exclude = std::move(exclude);
        sc.folds = cfg.folds;
        sc.seed = cfg.seed;
        sc.with_intercept = false;
        sc.top_k = 1;
        sc.workers = cfg.workers;
        sc.block_size = cfg.block_size;
        sc.progress = cfg.progress;
        try {
            auto res = enumerate_and_score(d, sc);
            PipelineStage st;
            st.key = key;
            st.selected = res.best();
            st.selected.model.name = key;
            st.candidates = res.candidates;
            st.scored = res.scored;
            st.skipped = res.skipped;
            suite.stages.push_back(std::move(st));
            return suite.stages.back();
        } catch (const empty_search_error& e) {
            throw empty_search_error("pipeline stage " + key + ": " + e.what());
        } catch (const validation_error& e) {
            throw validation_error("pipeline stage " + key + ": " + e.what());
        }
    };

    const auto size5 = run("size-5", 5, {}, {}).selected.environments;
    const auto size3 = run("size-3", 3, {}, detail::complement(d, size5)).selected.environments;
    run("size-1", 1, {}, detail::complement(d, size3));
    const auto val3 = run("val-3", 3, {}, size5).selected.environments;
    const auto val5 = run("val-5", 5, val3, size5).selected.environments;
    run("size-10", 10, size5, val5);

    check_suite_invariants(suite);
    const double c1 = suite.stage("size-1").selected.cv_mse;
    const double c3 = suite.stage("size-3").selected.cv_mse;
    const double c5 = suite.stage("size-5").selected.cv_mse;
    suite.cv_chain_monotone = c1 >= c3 && c3 >= c5;
    return suite;
}

inline json to_json(const RankedModel& rm) {
    json j;
    j["environments"] = rm.environments;
    j["cv_mse"] = rm.cv_mse;
    j["n_algorithms_used"] = rm.n_algorithms_used;
    j["model"] = to_json(rm.model);
    return j;
}

inline json to_json(const SkipStats& s) {
    return json{{"too_few_algorithms", s.too_few_algorithms}, {"singular", s.singular}, {"total", s.total()}};
}

}  // namespace benchsel
