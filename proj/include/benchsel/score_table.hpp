#pragma once

// Score ingestion and preparation: raw score tables, normalization constants,
// the human-normalized and log transforms, dataset filtering and the
// per-algorithm summary target.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "benchsel/checksum.hpp"
#include "benchsel/csv.hpp"
#include "benchsel/errors.hpp"

namespace benchsel {

/// Matching key for environment names: ASCII letters and digits only,
/// lowercased. "Q*Bert", "Qbert" and "q bert" all map to "qbert".
inline std::string canonical_key(std::string_view name) {
    std::string key;
    key.reserve(name.size());
    for (unsigned char c : name) {
        if (std::isalnum(c)) key.push_back(static_cast<char>(std::tolower(c)));
    }
    return key;
}

enum class SummaryStat { median, mean };

inline std::string_view to_string(SummaryStat s) { return s == SummaryStat::median ? "median" : "mean"; }

inline SummaryStat parse_summary_stat(std::string_view s) {
    if (s == "median") return SummaryStat::median;
    if (s == "mean") return SummaryStat::mean;
    throw validation_error("unknown summary statistic '" + std::string(s) + "' (expected median or mean)");
}

struct FilterConfig {
    int min_games = 40;
    int min_algorithms = 40;
};

/// Algorithms x environments matrix with explicit missing entries. Used for
/// raw scores and, after normalize(), for human-normalized scores.
class ScoreTable {
public:
    ScoreTable() = default;

    ScoreTable(std::vector<std::string> algorithms, std::vector<std::string> environments,
               std::vector<std::optional<double>> cells, std::vector<std::string> provenance = {})
        : algorithms_(std::move(algorithms)),
          environments_(std::move(environments)),
          cells_(std::move(cells)),
          provenance_(std::move(provenance)) {
        if (cells_.size() != algorithms_.size() * environments_.size()) {
            throw validation_error("score matrix has " + std::to_string(cells_.size()) + " cells, expected " +
                                   std::to_string(algorithms_.size() * environments_.size()));
        }
        if (!provenance_.empty() && provenance_.size() != algorithms_.size()) {
            throw validation_error("provenance list does not match algorithm count");
        }
        std::unordered_set<std::string> seen;
        for (const auto& a : algorithms_) {
            if (!seen.insert(a).second) throw validation_error("duplicate algorithm id '" + a + "'");
        }
        seen.clear();
        for (std::size_t e = 0; e < environments_.size(); ++e) {
            auto key = canonical_key(environments_[e]);
            if (!seen.insert(key).second) {
                throw validation_error("duplicate environment id '" + environments_[e] + "'");
            }
            env_index_.emplace(std::move(key), e);
        }
        for (const auto& c : cells_) {
            if (c && !std::isfinite(*c)) throw validation_error("non-finite score in table");
        }
    }

    const std::vector<std::string>& algorithms() const noexcept { return algorithms_; }
    const std::vector<std::string>& environments() const noexcept { return environments_; }
    const std::vector<std::string>& provenance() const noexcept { return provenance_; }
    std::size_t n_algorithms() const noexcept { return algorithms_.size(); }
    std::size_t n_environments() const noexcept { return environments_.size(); }

    const std::optional<double>& at(std::size_t algorithm, std::size_t environment) const {
        return cells_[algorithm * environments_.size() + environment];
    }

    std::optional<std::size_t> find_environment(std::string_view name) const {
        auto it = env_index_.find(canonical_key(name));
        if (it == env_index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> find_algorithm(std::string_view name) const {
        auto it = std::find(algorithms_.begin(), algorithms_.end(), name);
        if (it == algorithms_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - algorithms_.begin());
    }

    std::size_t present_in_row(std::size_t algorithm) const {
        std::size_t n = 0;
        for (std::size_t e = 0; e < n_environments(); ++e) n += at(algorithm, e).has_value();
        return n;
    }

    std::size_t present_in_column(std::size_t environment) const {
        std::size_t n = 0;
        for (std::size_t a = 0; a < n_algorithms(); ++a) n += at(a, environment).has_value();
        return n;
    }

    std::size_t missing_count() const {
        return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return !c; }));
    }

    /// Subtable keeping the given rows and columns, in the given order.
    ScoreTable select(std::span<const std::size_t> rows, std::span<const std::size_t> columns) const {
        std::vector<std::string> algs, envs, prov;
        std::vector<std::optional<double>> cells;
        cells.reserve(rows.size() * columns.size());
        for (auto r : rows) {
            algs.push_back(algorithms_[r]);
            if (!provenance_.empty()) prov.push_back(provenance_[r]);
            for (auto c : columns) cells.push_back(at(r, c));
        }
        for (auto c : columns) envs.push_back(environments_[c]);
        return ScoreTable(std::move(algs), std::move(envs), std::move(cells), std::move(prov));
    }

    /// Removes one column and returns it alongside the remaining table. Used to
    /// split a "true summary" column off a score file.
    std::pair<ScoreTable, std::vector<std::optional<double>>> split_column(std::string_view name) const {
        auto idx = find_environment(name);
        if (!idx) throw lookup_error("column '" + std::string(name) + "' not found");
        std::vector<std::optional<double>> column;
        std::vector<std::size_t> rows(n_algorithms()), keep;
        for (std::size_t a = 0; a < n_algorithms(); ++a) {
            rows[a] = a;
            column.push_back(at(a, *idx));
        }
        for (std::size_t e = 0; e < n_environments(); ++e) {
            if (e != *idx) keep.push_back(e);
        }
        return {select(rows, keep), std::move(column)};
    }

private:
    std::vector<std::string> algorithms_;
    std::vector<std::string> environments_;
    std::vector<std::optional<double>> cells_;
    std::vector<std::string> provenance_;
    std::unordered_map<std::string, std::size_t> env_index_;
};

using RawScoreTable = ScoreTable;

struct NormalizationEntry {
    std::string environment;
    double random = 0.0;
    double human = 0.0;
};

/// Per-environment random (r) and human (h) reference scores.
class NormalizationTable {
public:
    NormalizationTable() = default;

    explicit NormalizationTable(std::vector<NormalizationEntry> entries, std::string checksum = {})
        : entries_(std::move(entries)), checksum_(std::move(checksum)) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            if (!std::isfinite(e.random) || !std::isfinite(e.human)) {
                throw validation_error("non-finite normalization constant for '" + e.environment + "'");
            }
            if (e.human == e.random) {
                throw validation_error("human and random scores coincide for '" + e.environment + "'");
            }
            if (!index_.emplace(canonical_key(e.environment), i).second) {
                throw validation_error("duplicate environment '" + e.environment + "' in normalization table");
            }
        }
    }

    const std::vector<NormalizationEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// FNV-1a checksum of the file this table was loaded from (empty when
    /// constructed in memory).
    const std::string& checksum() const noexcept { return checksum_; }

    const NormalizationEntry* find(std::string_view environment) const {
        auto it = index_.find(canonical_key(environment));
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    const NormalizationEntry& at(std::string_view environment) const {
        if (const auto* e = find(environment)) return *e;
        throw lookup_error("environment '" + std::string(environment) + "' has no normalization constants");
    }

private:
    std::vector<NormalizationEntry> entries_;
    std::string checksum_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Loading

inline RawScoreTable parse_scores(std::string_view text) {
    const auto records = csv::parse(text);
    if (records.empty()) throw schema_error("score file is empty", 0, 0);
    const auto& header = records.front();
    if (header.fields.empty() || canonical_key(header.fields[0]) != "algorithm") {
        throw schema_error("first header cell must be 'algorithm'", header.line, 1);
    }

    std::vector<std::string> envs;
    std::vector<std::size_t> env_cols;
    std::optional<std::size_t> provenance_col;
    for (std::size_t c = 1; c < header.fields.size(); ++c) {
        const auto& name = header.fields[c];
        if (name.empty()) throw schema_error("empty column name in header", header.line, c + 1);
        const auto key = canonical_key(name);
        if (key == "provenance" || key == "source") {
            provenance_col = c;
            continue;
        }
        envs.push_back(name);
        env_cols.push_back(c);
    }

    std::vector<std::string> algs, prov;
    std::vector<std::optional<double>> cells;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.fields.size()) {
            throw schema_error("expected " + std::to_string(header.fields.size()) + " fields, found " +
                                   std::to_string(rec.fields.size()),
                               rec.line, std::min(rec.fields.size(), header.fields.size()) + 1);
        }
        if (rec.fields[0].empty()) throw schema_error("empty algorithm name", rec.line, 1);
        algs.push_back(rec.fields[0]);
        if (provenance_col) prov.push_back(rec.fields[*provenance_col]);
        for (auto c : env_cols) {
            const auto& cell = rec.fields[c];
            if (csv::trim(cell).empty()) {
                cells.emplace_back();
                continue;
            }
            auto value = csv::parse_real(cell);
            if (!value) throw schema_error("not a finite number: '" + cell + "'", rec.line, c + 1);
            cells.emplace_back(*value);
        }
    }
    return RawScoreTable(std::move(algs), std::move(envs), std::move(cells), std::move(prov));
}

inline RawScoreTable load_scores(const std::string& path) { return parse_scores(csv::read_file(path)); }

inline NormalizationTable parse_normalization(std::string_view text) {
    const auto records = csv::parse(text);
    if (records.empty()) throw schema_error("normalization file is empty", 0, 0);
    const auto& header = records.front();
    if (header.fields.size() != 3 || canonical_key(header.fields[0]) != "environment" ||
        canonical_key(header.fields[1]) != "random" || canonical_key(header.fields[2]) != "human") {
        throw schema_error("header must be 'environment,random,human'", header.line, 1);
    }
    std::vector<NormalizationEntry> entries;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != 3) {
            throw schema_error("expected 3 fields, found " + std::to_string(rec.fields.size()), rec.line,
                               std::min<std::size_t>(rec.fields.size(), 3) + 1);
        }
        if (rec.fields[0].empty()) throw schema_error("empty environment name", rec.line, 1);
        auto random = csv::parse_real(rec.fields[1]);
        if (!random) throw schema_error("not a finite number: '" + rec.fields[1] + "'", rec.line, 2);
        auto human = csv::parse_real(rec.fields[2]);
        if (!human) throw schema_error("not a finite number: '" + rec.fields[2] + "'", rec.line, 3);
        entries.push_back({rec.fields[0], *random, *human});
    }
    return NormalizationTable(std::move(entries), checksum_hex(text));
}

inline NormalizationTable load_normalization(const std::string& path) {
    return parse_normalization(csv::read_file(path));
}

// ---------------------------------------------------------------------------
// Transforms

/// Human-normalized score: random maps to 0, human to 100. Written as
/// 100 * ((x - r) / (h - r)) so that x == h gives exactly 100.
inline double normalize_score(double raw, double random, double human) {
    return 100.0 * ((raw - random) / (human - random));
}

inline double normalize_score(double raw, const NormalizationEntry& n) {
    return normalize_score(raw, n.random, n.human);
}

/// log10(1 + max(0, x)). Evaluated through log1p for accuracy near zero.
inline double log_transform(double normalized) {
    return std::log1p(std::max(0.0, normalized)) / std::numbers::ln10;
}

/// 10^y - 1. Evaluated through expm1 for accuracy near zero.
inline double inverse_log_transform(double log_score) { return std::expm1(log_score * std::numbers::ln10); }

/// Applies the human normalization to every present cell. Environment names
/// in the result take the normalization table's spelling.
inline ScoreTable normalize(const RawScoreTable& raw, const NormalizationTable& norms) {
    std::vector<const NormalizationEntry*> per_env;
    std::vector<std::string> envs;
    for (const auto& name : raw.environments()) {
        const auto& entry = norms.at(name);
        per_env.push_back(&entry);
        envs.push_back(entry.environment);
    }
    std::vector<std::optional<double>> cells;
    cells.reserve(raw.n_algorithms() * raw.n_environments());
    for (std::size_t a = 0; a < raw.n_algorithms(); ++a) {
        for (std::size_t e = 0; e < raw.n_environments(); ++e) {
            const auto& x = raw.at(a, e);
            cells.push_back(x ? std::optional<double>(normalize_score(*x, *per_env[e])) : std::nullopt);
        }
    }
    return ScoreTable(raw.algorithms(), std::move(envs), std::move(cells), raw.provenance());
}

/// Drops algorithms with fewer than `min_games` present scores, then
/// environments with fewer than `min_algorithms` present scores among the
/// algorithms that survived. A single pass in that order.
inline RawScoreTable filter_dataset(const RawScoreTable& raw, int min_games, int min_algorithms) {
    if (min_games < 1 || min_algorithms < 1) {
        throw validation_error("filter thresholds must be at least 1");
    }
    std::vector<std::size_t> rows;
    for (std::size_t a = 0; a < raw.n_algorithms(); ++a) {
        if (raw.present_in_row(a) >= static_cast<std::size_t>(min_games)) rows.push_back(a);
    }
    std::vector<std::size_t> cols;
    for (std::size_t e = 0; e < raw.n_environments(); ++e) {
        std::size_t n = 0;
        for (auto a : rows) n += raw.at(a, e).has_value();
        if (n >= static_cast<std::size_t>(min_algorithms)) cols.push_back(e);
    }
    if (rows.empty() || cols.empty()) {
        throw degenerate_dataset_error("filtering (min_games=" + std::to_string(min_games) +
                                       ", min_algorithms=" + std::to_string(min_algorithms) + ") left " +
                                       std::to_string(rows.size()) + " algorithms and " +
                                       std::to_string(cols.size()) + " environments");
    }
    return raw.select(rows, cols);
}

/// Median (midpoint of the two central values for even counts) or mean.
inline double summary_statistic(std::vector<double> values, SummaryStat stat) {
    if (values.empty()) throw validation_error("summary statistic of an empty set");
    if (stat == SummaryStat::mean) {
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), mid);
    return lower + (upper - lower) / 2.0;
}

/// Per-algorithm summary over present normalized scores, before the log
/// transform.
inline std::vector<double> summary_scores(const ScoreTable& normalized, SummaryStat stat) {
    std::vector<double> out;
    out.reserve(normalized.n_algorithms());
    for (std::size_t a = 0; a < normalized.n_algorithms(); ++a) {
        std::vector<double> present;
        for (std::size_t e = 0; e < normalized.n_environments(); ++e) {
            if (const auto& v = normalized.at(a, e)) present.push_back(*v);
        }
        if (present.empty()) {
            throw validation_error("algorithm '" + normalized.algorithms()[a] + "' has no scores");
        }
        out.push_back(summary_statistic(std::move(present), stat));
    }
    return out;
}

/// Target vector: log_transform(stat(normalized scores)) per algorithm.
inline std::vector<double> compute_target(const ScoreTable& normalized, SummaryStat stat) {
    auto out = summary_scores(normalized, stat);
    for (auto& v : out) v = log_transform(v);
    return out;
}

// ---------------------------------------------------------------------------
// Prepared dataset

/// Log-normalized score matrix plus targets. Immutable once built; cells are
/// stored densely with a presence mask so the search inner loop can gather
/// without optional overhead.
class PreparedDataset {
public:
    PreparedDataset(std::vector<std::string> algorithms, std::vector<std::string> environments,
                    std::vector<std::optional<double>> log_scores, std::vector<double> targets,
                    SummaryStat stat = SummaryStat::median, FilterConfig filter = {1, 1},
                    std::vector<double> summaries = {})
        : algorithms_(std::move(algorithms)),
          environments_(std::move(environments)),
          targets_(std::move(targets)),
          summaries_(std::move(summaries)),
          stat_(stat),
          filter_(filter) {
        const std::size_t n = algorithms_.size() * environments_.size();
        if (log_scores.size() != n) throw validation_error("log score matrix has the wrong size");
        if (targets_.size() != algorithms_.size()) throw validation_error("one target per algorithm required");
        if (summaries_.empty()) {
            for (double t : targets_) summaries_.push_back(inverse_log_transform(t));
        }
        if (summaries_.size() != algorithms_.size()) throw validation_error("one summary per algorithm required");
        values_.resize(n, 0.0);
        present_.resize(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (log_scores[i]) {
                if (!std::isfinite(*log_scores[i]) || *log_scores[i] < 0.0) {
                    throw validation_error("log scores must be finite and non-negative");
                }
                values_[i] = *log_scores[i];
                present_[i] = 1;
            }
        }
        for (double t : targets_) {
            if (!std::isfinite(t)) throw validation_error("non-finite target");
        }
        for (std::size_t e = 0; e < environments_.size(); ++e) {
            if (!env_index_.emplace(canonical_key(environments_[e]), e).second) {
                throw validation_error("duplicate environment id '" + environments_[e] + "'");
            }
        }
        std::unordered_set<std::string> seen;
        for (const auto& a : algorithms_) {
            if (!seen.insert(a).second) throw validation_error("duplicate algorithm id '" + a + "'");
        }
        for (std::size_t a = 0; a < algorithms_.size(); ++a) {
            std::size_t k = 0;
            for (std::size_t e = 0; e < environments_.size(); ++e) k += has(a, e);
            if (k < static_cast<std::size_t>(filter_.min_games)) {
                throw validation_error("algorithm '" + algorithms_[a] + "' has fewer than min_games scores");
            }
        }
        for (std::size_t e = 0; e < environments_.size(); ++e) {
            std::size_t k = 0;
            for (std::size_t a = 0; a < algorithms_.size(); ++a) k += has(a, e);
            if (k < static_cast<std::size_t>(filter_.min_algorithms)) {
                throw validation_error("environment '" + environments_[e] + "' has fewer than min_algorithms scores");
            }
        }
    }

    const std::vector<std::string>& algorithms() const noexcept { return algorithms_; }
    const std::vector<std::string>& environments() const noexcept { return environments_; }
    std::size_t n_algorithms() const noexcept { return algorithms_.size(); }
    std::size_t n_environments() const noexcept { return environments_.size(); }
    const std::vector<double>& targets() const noexcept { return targets_; }
    /// Summary statistic in normalized units (the un-logged target).
    const std::vector<double>& summaries() const noexcept { return summaries_; }
    SummaryStat target_stat() const noexcept { return stat_; }
    FilterConfig filter_config() const noexcept { return filter_; }

    bool has(std::size_t algorithm, std::size_t environment) const noexcept {
        return present_[algorithm * environments_.size() + environment] != 0;
    }
    /// Unchecked value; meaningful only where has() is true.
    double value(std::size_t algorithm, std::size_t environment) const noexcept {
        return values_[algorithm * environments_.size() + environment];
    }
    std::optional<double> log_score(std::size_t algorithm, std::size_t environment) const {
        return has(algorithm, environment) ? std::optional<double>(value(algorithm, environment)) : std::nullopt;
    }

    std::optional<std::size_t> find_environment(std::string_view name) const {
        auto it = env_index_.find(canonical_key(name));
        if (it == env_index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t require_environment(std::string_view name) const {
        if (auto idx = find_environment(name)) return *idx;
        throw lookup_error("environment '" + std::string(name) + "' is not in the dataset");
    }

    /// Content fingerprint over ids, mask, values and targets.
    std::string fingerprint() const {
        fnv1a64 h;
        for (const auto& a : algorithms_) h.update(a + '\n');
        for (const auto& e : environments_) h.update(e + '\n');
        for (std::size_t i = 0; i < values_.size(); ++i) h.update(present_[i] ? values_[i] : -1.0);
        for (double t : targets_) h.update(t);
        return h.hex();
    }

private:
    std::vector<std::string> algorithms_;
    std::vector<std::string> environments_;
    std::vector<double> values_;
    std::vector<unsigned char> present_;
    std::vector<double> targets_;
    std::vector<double> summaries_;
    SummaryStat stat_;
    FilterConfig filter_;
    std::unordered_map<std::string, std::size_t> env_index_;
};

/// filter -> normalize -> summary target -> log transform.
inline PreparedDataset prepare_dataset(const RawScoreTable& raw, const NormalizationTable& norms,
                                       FilterConfig filter = {}, SummaryStat stat = SummaryStat::median) {
    const auto filtered = filter_dataset(raw, filter.min_games, filter.min_algorithms);
    const auto normalized = normalize(filtered, norms);
    auto summaries = summary_scores(normalized, stat);
    std::vector<double> targets;
    targets.reserve(summaries.size());
    for (double s : summaries) targets.push_back(log_transform(s));

    std::vector<std::optional<double>> logs;
    logs.reserve(normalized.n_algorithms() * normalized.n_environments());
    for (std::size_t a = 0; a < normalized.n_algorithms(); ++a) {
        for (std::size_t e = 0; e < normalized.n_environments(); ++e) {
            const auto& z = normalized.at(a, e);
            logs.push_back(z ? std::optional<double>(log_transform(*z)) : std::nullopt);
        }
    }
    return PreparedDataset(normalized.algorithms(), normalized.environments(), std::move(logs), std::move(targets),
                           stat, filter, std::move(summaries));
}

}  // namespace benchsel
