#pragma once

// End-to-end application of a fitted model to raw scores, and the error
// metrics used to judge the predictions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "benchsel/errors.hpp"
#include "benchsel/linreg.hpp"
#include "benchsel/score_table.hpp"

namespace benchsel {

inline constexpr double kMinRelativeDenominator = 1e-9;

struct RelativeError {
    double value = 0.0;  // (predicted - true) / true

    double absolute() const noexcept { return std::abs(value); }
};

inline RelativeError relative_error(double true_value, double predicted) {
    if (!(std::abs(true_value) > kMinRelativeDenominator)) {
        throw undefined_value_error("relative error undefined for true value " + std::to_string(true_value));
    }
    return {(predicted - true_value) / true_value};
}

/// ln(base) * mean absolute log residual: the first-order estimate of the
/// mean relative error when residuals are measured in log_base units.
inline double approx_relative_error_from_log_mae(double mae_log, double log_base = 10.0) {
    if (!(mae_log >= 0.0)) throw validation_error("mean absolute error must be non-negative");
    if (!(log_base > 1.0)) throw validation_error("log base must exceed 1");
    return std::log(log_base) * mae_log;
}

struct PredictionReport {
    std::string algorithm_id;
    /// Normalized-score units. Empty when the row could not be predicted.
    std::optional<double> predicted;
    std::optional<double> true_summary;
    std::optional<double> relative_error;
    std::map<std::string, double> inputs_used;
    /// Set when the prediction is below zero (possible with an intercept).
    bool below_zero = false;
    std::string error;

    std::optional<double> abs_relative_error() const {
        if (!relative_error) return std::nullopt;
        return std::abs(*relative_error);
    }
};

namespace detail {

inline void attach_truth(PredictionReport& r, std::optional<double> truth) {
    r.true_summary = truth;
    r.relative_error.reset();
    if (truth && r.predicted && std::abs(*truth) > kMinRelativeDenominator) {
        r.relative_error = relative_error(*truth, *r.predicted).value;
    }
}

}  // namespace detail

/// raw -> normalized -> log -> linear model -> inverse log. Keys of
/// `raw_scores` are matched to model environments by canonical name.
inline double predict_summary(const LinearModel& model, const std::map<std::string, double>& raw_scores,
                              const NormalizationTable& norms) {
    std::unordered_map<std::string, double> by_key;
    for (const auto& [name, value] : raw_scores) by_key.emplace(canonical_key(name), value);
    std::vector<double> logs;
    logs.reserve(model.environment_ids.size());
    for (const auto& env : model.environment_ids) {
        auto it = by_key.find(canonical_key(env));
        if (it == by_key.end()) throw missing_input_error("missing raw score for environment '" + env + "'");
        logs.push_back(log_transform(normalize_score(it->second, norms.at(env))));
    }
    return inverse_log_transform(predict_linear(model, std::span<const double>(logs)));
}

/// One report per algorithm row of `raw`. A row missing one of the model's
/// environments gets an error message instead of a prediction; the other rows
/// are unaffected. `truth`, when given, is one optional value per row.
inline std::vector<PredictionReport> predict_table(const LinearModel& model, const RawScoreTable& raw,
                                                   const NormalizationTable& norms,
                                                   const std::vector<std::optional<double>>* truth = nullptr) {
    if (truth && truth->size() != raw.n_algorithms()) throw validation_error("one truth value per row required");
    std::vector<std::optional<std::size_t>> cols;
    for (const auto& env : model.environment_ids) {
        norms.at(env);  // every model environment must be normalizable
        cols.push_back(raw.find_environment(env));
    }
    std::vector<PredictionReport> out;
    for (std::size_t a = 0; a < raw.n_algorithms(); ++a) {
        PredictionReport r;
        r.algorithm_id = raw.algorithms()[a];
        std::map<std::string, double> inputs;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (!cols[i] || !raw.at(a, *cols[i])) {
                r.error = "missing raw score for environment '" + model.environment_ids[i] + "'";
                break;
            }
            inputs[model.environment_ids[i]] = *raw.at(a, *cols[i]);
        }
        if (r.error.empty()) {
            r.predicted = predict_summary(model, inputs, norms);
            r.below_zero = *r.predicted < 0.0;
            r.inputs_used = std::move(inputs);
        }
        detail::attach_truth(r, truth ? (*truth)[a] : std::nullopt);
        out.push_back(std::move(r));
    }
    return out;
}

/// Number of pairs ordered differently by the two rankings.
inline std::uint64_t inversion_count(const std::vector<std::string>& order_a, const std::vector<std::string>& order_b) {
    if (order_a.size() != order_b.size()) throw validation_error("rankings have different lengths");
    std::unordered_map<std::string, std::size_t> pos_b;
    for (std::size_t i = 0; i < order_b.size(); ++i) {
        if (!pos_b.emplace(order_b[i], i).second) throw validation_error("duplicate entry '" + order_b[i] + "'");
    }
    std::vector<std::size_t> seq;
    std::unordered_set<std::string> seen;
    for (const auto& id : order_a) {
        if (!seen.insert(id).second) throw validation_error("duplicate entry '" + id + "'");
        auto it = pos_b.find(id);
        if (it == pos_b.end()) throw validation_error("'" + id + "' appears in only one ranking");
        seq.push_back(it->second);
    }
    std::uint64_t inversions = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        for (std::size_t j = i + 1; j < seq.size(); ++j) inversions += seq[i] > seq[j];
    }
    return inversions;
}

/// Ids ordered by a value, ascending; ties keep the input order.
template <class Key>
std::vector<std::string> order_by(const std::vector<PredictionReport>& reports, Key key) {
    std::vector<const PredictionReport*> rows;
    for (const auto& r : reports) {
        if (key(r)) rows.push_back(&r);
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const auto* a, const auto* b) { return *key(*a) < *key(*b); });
    std::vector<std::string> out;
    for (const auto* r : rows) out.push_back(r->algorithm_id);
    return out;
}

/// Divides every true and predicted summary by the baseline algorithm's.
inline std::vector<PredictionReport> rebase_scores(const std::vector<PredictionReport>& reports,
                                                   const std::string& baseline_algorithm) {
    auto base = std::find_if(reports.begin(), reports.end(),
                             [&](const PredictionReport& r) { return r.algorithm_id == baseline_algorithm; });
    if (base == reports.end()) throw validation_error("baseline '" + baseline_algorithm + "' not among the reports");
    if (!base->predicted || !base->true_summary || *base->predicted == 0.0 || *base->true_summary == 0.0) {
        throw validation_error("baseline '" + baseline_algorithm + "' needs non-zero predicted and true summaries");
    }
    const double p0 = *base->predicted, t0 = *base->true_summary;
    std::vector<PredictionReport> out;
    for (const auto& r : reports) {
        PredictionReport x = r;
        if (x.predicted) x.predicted = *x.predicted / p0;
        std::optional<double> truth;
        if (r.true_summary) truth = *r.true_summary / t0;
        if (r.algorithm_id == baseline_algorithm) {
            x.predicted = 1.0;
            truth = 1.0;
        }
        detail::attach_truth(x, truth);
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace benchsel
