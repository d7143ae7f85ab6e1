#pragma once

// Small dense least squares: ordinary and non-negative fits through the
// normal equations, R^2, and seeded k-fold cross-validated MSE. Designs have
// at most kMaxColumns predictors, so all solver workspace lives on the stack.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "benchsel/errors.hpp"

namespace benchsel {

inline constexpr std::size_t kMaxColumns = 16;
inline constexpr double kSingularPivot = 1e-10;

/// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t r = 0; r < m.rows_; ++r) {
            if (rows[r].size() != m.cols_) throw validation_error("ragged matrix rows");
            std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    const double* data() const noexcept { return data_.data(); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct FitStats {
    double r_squared = 0.0;
    std::optional<double> cv_mse;
    /// In-sample mean absolute residual, log-normalized units.
    std::optional<double> log_mae;
    std::size_t n_observations = 0;
};

/// s_log = c + sum_i coefficients[i] * x_i over environment_ids.
struct LinearModel {
    std::string name;
    std::vector<std::string> environment_ids;
    std::vector<double> coefficients;
    /// Absent means the model was fitted without an intercept (c = 0).
    std::optional<double> intercept;
    FitStats stats;
    bool constrained_nonnegative = false;
    /// Checksum of the normalization table the model was fitted against.
    std::string norms_checksum;

    double intercept_or_zero() const noexcept { return intercept.value_or(0.0); }

    bool all_coefficients_nonnegative() const noexcept {
        return std::all_of(coefficients.begin(), coefficients.end(), [](double c) { return c >= 0.0; });
    }
};

namespace detail {

using Workspace = std::array<double, (kMaxColumns + 1) * (kMaxColumns + 1)>;
using Vec = std::array<double, kMaxColumns + 1>;

/// Solves G x = b for symmetric positive-definite G (p x p, row-major in `g`)
/// by Cholesky. `g` is overwritten with the factor, `b` with the solution.
/// Throws when a pivot falls below kSingularPivot times the largest diagonal.
inline void cholesky_solve(double* g, double* b, std::size_t p) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, g[i * p + i]);
    const double threshold = kSingularPivot * max_diag;

    for (std::size_t j = 0; j < p; ++j) {
        double d = g[j * p + j];
        for (std::size_t k = 0; k < j; ++k) d -= g[j * p + k] * g[j * p + k];
        if (!(d > threshold) || max_diag <= 0.0) {
            throw singular_matrix_error("rank-deficient design: column " + std::to_string(j) +
                                            " is (nearly) a linear combination of earlier columns",
                                        j);
        }
        const double l = std::sqrt(d);
        g[j * p + j] = l;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = g[i * p + j];
            for (std::size_t k = 0; k < j; ++k) s -= g[i * p + k] * g[j * p + k];
            g[i * p + j] = s / l;
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= g[i * p + k] * b[k];
        b[i] = s / g[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < p; ++k) s -= g[k * p + i] * b[k];
        b[i] = s / g[i * p + i];
    }
}

/// Adds row contributions to the (augmented) Gram matrix and moment vector.
/// With an intercept the constant column is placed last.
inline void accumulate_gram(const double* x, double t, std::size_t cols, bool intercept, double* g, double* b) {
    const std::size_t p = cols + (intercept ? 1 : 0);
    for (std::size_t i = 0; i < cols; ++i) {
        const double xi = x[i];
        b[i] += xi * t;
        for (std::size_t j = 0; j <= i; ++j) g[i * p + j] += xi * x[j];
        if (intercept) g[cols * p + i] += xi;
    }
    if (intercept) {
        b[cols] += t;
        g[cols * p + cols] += 1.0;
    }
}

inline void symmetrize(double* g, std::size_t p) {
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) g[i * p + j] = g[j * p + i];
    }
}

inline void check_shape(std::size_t rows, std::size_t cols, std::size_t targets, bool intercept) {
    if (rows != targets) {
        throw validation_error("design has " + std::to_string(rows) + " rows but " + std::to_string(targets) +
                               " targets");
    }
    if (cols == 0) throw validation_error("design has no columns");
    if (cols > kMaxColumns) {
        throw validation_error("design has " + std::to_string(cols) + " columns; at most " +
                               std::to_string(kMaxColumns) + " supported");
    }
    if (rows <= cols + (intercept ? 1 : 0)) {
        throw validation_error("need more rows (" + std::to_string(rows) + ") than parameters (" +
                               std::to_string(cols + (intercept ? 1 : 0)) + ")");
    }
}

/// Deterministic Fisher-Yates permutation of 0..n-1. Uses mt19937_64 (whose
/// output sequence is fixed by the standard) with a plain modulo draw so the
/// permutation is identical across standard library implementations.
inline std::vector<std::uint32_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::uint32_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

/// Start offset of each fold when n rows are cut into `folds` contiguous
/// chunks; the first n % folds chunks get one extra row. Size folds + 1.
inline std::vector<std::size_t> fold_bounds(std::size_t n, std::size_t folds) {
    std::vector<std::size_t> bounds(folds + 1, 0);
    const std::size_t base = n / folds, extra = n % folds;
    for (std::size_t f = 0; f < folds; ++f) bounds[f + 1] = bounds[f] + base + (f < extra ? 1 : 0);
    return bounds;
}

/// Cross-validated MSE over a row-major design `x` (n x cols) and targets
/// `t`, with a precomputed permutation. Per-fold Gram matrices are
/// accumulated once and summed in fold order for each training split.
inline double cv_mse_raw(const double* x, const double* t, std::size_t n, std::size_t cols, bool intercept,
                         std::span<const std::uint32_t> perm, std::span<const std::size_t> bounds) {
    if (bounds.size() < 2 || bounds.back() != n || perm.size() != n) {
        throw validation_error("fold layout does not match the row count");
    }
    const std::size_t folds = bounds.size() - 1;
    const std::size_t p = cols + (intercept ? 1 : 0);
    const std::size_t pp = p * p;

    // Per-fold Gram (lower triangle) and moment vectors.
    std::vector<double> fold_g(folds * pp, 0.0), fold_b(folds * p, 0.0);
    for (std::size_t f = 0; f < folds; ++f) {
        for (std::size_t k = bounds[f]; k < bounds[f + 1]; ++k) {
            const std::size_t r = perm[k];
            accumulate_gram(x + r * cols, t[r], cols, intercept, &fold_g[f * pp], &fold_b[f * p]);
        }
    }

    double total = 0.0;
    Workspace g;
    Vec beta;
    for (std::size_t f = 0; f < folds; ++f) {
        std::fill(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(pp), 0.0);
        std::fill(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(p), 0.0);
        for (std::size_t o = 0; o < folds; ++o) {
            if (o == f) continue;
            for (std::size_t i = 0; i < pp; ++i) g[i] += fold_g[o * pp + i];
            for (std::size_t i = 0; i < p; ++i) beta[i] += fold_b[o * p + i];
        }
        symmetrize(g.data(), p);
        cholesky_solve(g.data(), beta.data(), p);

        double sse = 0.0;
        for (std::size_t k = bounds[f]; k < bounds[f + 1]; ++k) {
            const std::size_t r = perm[k];
            double pred = intercept ? beta[cols] : 0.0;
            for (std::size_t i = 0; i < cols; ++i) pred += beta[i] * x[r * cols + i];
            const double e = t[r] - pred;
            sse += e * e;
        }
        total += sse / static_cast<double>(bounds[f + 1] - bounds[f]);
    }
    return total / static_cast<double>(folds);
}

}  // namespace detail

/// 1 - SS_res / SS_tot with SS_tot about the mean of t whatever the intercept
/// mode. Returns 0 when SS_tot is 0.
inline double r_squared_from_predictions(std::span<const double> predictions, std::span<const double> t) {
    if (predictions.size() != t.size()) throw validation_error("prediction/target size mismatch");
    if (t.empty()) return 0.0;
    double mean = 0.0;
    for (double v : t) mean += v;
    mean /= static_cast<double>(t.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        ss_res += (t[k] - predictions[k]) * (t[k] - predictions[k]);
        ss_tot += (t[k] - mean) * (t[k] - mean);
    }
    if (ss_tot == 0.0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

inline std::vector<double> predict_rows(const LinearModel& model, const Matrix& x) {
    if (x.cols() != model.coefficients.size()) throw validation_error("design/model column mismatch");
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double s = model.intercept_or_zero();
        for (std::size_t i = 0; i < x.cols(); ++i) s += model.coefficients[i] * x(r, i);
        out[r] = s;
    }
    return out;
}

inline double r_squared(const LinearModel& model, const Matrix& x, std::span<const double> t) {
    const auto pred = predict_rows(model, x);
    return r_squared_from_predictions(pred, t);
}

namespace detail {

inline void fill_in_sample_stats(LinearModel& model, const Matrix& x, std::span<const double> t) {
    const auto pred = predict_rows(model, x);
    model.stats.r_squared = r_squared_from_predictions(pred, t);
    double mae = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) mae += std::abs(t[k] - pred[k]);
    model.stats.log_mae = mae / static_cast<double>(t.size());
    model.stats.n_observations = t.size();
}

inline std::vector<std::string> default_names(std::size_t cols, std::span<const std::string> names) {
    if (!names.empty()) {
        if (names.size() != cols) throw validation_error("one name per design column required");
        return {names.begin(), names.end()};
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < cols; ++i) out.push_back("x" + std::to_string(i));
    return out;
}

[[noreturn]] inline void rethrow_named(const singular_matrix_error& e, std::span<const std::string> names) {
    if (e.column() < names.size()) {
        throw singular_matrix_error("rank-deficient design: column '" + names[e.column()] +
                                        "' is (nearly) a linear combination of the others",
                                    e.column());
    }
    if (e.column() == names.size()) {
        throw singular_matrix_error("rank-deficient design: intercept column is collinear with the predictors",
                                    e.column());
    }
    throw e;
}

}  // namespace detail

/// Least-squares fit of t on the columns of x, optionally with an
/// unconstrained intercept. `names` labels the columns (defaults to x0, x1...).
inline LinearModel fit_ols(const Matrix& x, std::span<const double> t, bool with_intercept,
                           std::span<const std::string> names = {}) {
    detail::check_shape(x.rows(), x.cols(), t.size(), with_intercept);
    const std::size_t cols = x.cols();
    const std::size_t p = cols + (with_intercept ? 1 : 0);

    LinearModel model;
    model.environment_ids = detail::default_names(cols, names);

    detail::Workspace g{};
    detail::Vec b{};
    for (std::size_t r = 0; r < x.rows(); ++r) {
        detail::accumulate_gram(x.row(r).data(), t[r], cols, with_intercept, g.data(), b.data());
    }
    detail::symmetrize(g.data(), p);
    try {
        detail::cholesky_solve(g.data(), b.data(), p);
    } catch (const singular_matrix_error& e) {
        detail::rethrow_named(e, model.environment_ids);
    }
    model.coefficients.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(cols));
    if (with_intercept) model.intercept = b[cols];
    detail::fill_in_sample_stats(model, x, t);
    return model;
}

/// Least squares subject to every coefficient >= 0 (Lawson-Hanson active
/// set on the normal equations). An intercept, when requested, stays
/// unconstrained and is profiled out by centering.
inline LinearModel fit_nnls(const Matrix& x, std::span<const double> t, bool with_intercept,
                            std::span<const std::string> names = {}) {
    detail::check_shape(x.rows(), x.cols(), t.size(), with_intercept);
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();

    LinearModel model;
    model.environment_ids = detail::default_names(p, names);
    model.constrained_nonnegative = true;

    std::vector<double> x_mean(p, 0.0);
    double t_mean = 0.0;
    if (with_intercept) {
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t i = 0; i < p; ++i) x_mean[i] += x(r, i);
            t_mean += t[r];
        }
        for (auto& m : x_mean) m /= static_cast<double>(n);
        t_mean /= static_cast<double>(n);
    }

    std::vector<double> gram(p * p, 0.0), moment(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double tr = t[r] - t_mean;
        for (std::size_t i = 0; i < p; ++i) {
            const double xi = x(r, i) - x_mean[i];
            moment[i] += xi * tr;
            for (std::size_t j = 0; j < p; ++j) gram[i * p + j] += xi * (x(r, j) - x_mean[j]);
        }
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < p; ++i) scale = std::max(scale, gram[i * p + i]);
    const double tol = 1e-12 * std::max(scale, 1.0);

    std::vector<double> beta(p, 0.0);
    std::vector<bool> passive(p, false);
    const auto gradient = [&](std::vector<double>& w) {
        for (std::size_t i = 0; i < p; ++i) {
            double s = moment[i];
            for (std::size_t j = 0; j < p; ++j) s -= gram[i * p + j] * beta[j];
            w[i] = s;
        }
    };
    // Solves the unconstrained problem restricted to the passive set.
    const auto solve_passive = [&](std::vector<double>& s) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < p; ++i) {
            if (passive[i]) idx.push_back(i);
        }
        const std::size_t k = idx.size();
        detail::Workspace g{};
        detail::Vec b{};
        for (std::size_t a = 0; a < k; ++a) {
            b[a] = moment[idx[a]];
            for (std::size_t c = 0; c < k; ++c) g[a * k + c] = gram[idx[a] * p + idx[c]];
        }
        try {
            detail::cholesky_solve(g.data(), b.data(), k);
        } catch (const singular_matrix_error& e) {
            detail::rethrow_named(singular_matrix_error(e.what(), idx[e.column()]), model.environment_ids);
        }
        std::fill(s.begin(), s.end(), 0.0);
        for (std::size_t a = 0; a < k; ++a) s[idx[a]] = b[a];
    };

    std::vector<double> w(p), s(p);
    gradient(w);
    const std::size_t max_outer = 3 * p + 10;
    for (std::size_t outer = 0; outer < max_outer; ++outer) {
        std::optional<std::size_t> enter;
        for (std::size_t i = 0; i < p; ++i) {
            if (!passive[i] && w[i] > tol && (!enter || w[i] > w[*enter])) enter = i;
        }
        if (!enter) break;
        passive[*enter] = true;

        for (std::size_t inner = 0; inner <= p; ++inner) {
            solve_passive(s);
            bool feasible = true;
            for (std::size_t i = 0; i < p; ++i) {
                if (passive[i] && s[i] <= 0.0) feasible = false;
            }
            if (feasible) {
                beta = s;
                break;
            }
            double alpha = 1.0;
            for (std::size_t i = 0; i < p; ++i) {
                if (passive[i] && s[i] <= 0.0) alpha = std::min(alpha, beta[i] / (beta[i] - s[i]));
            }
            for (std::size_t i = 0; i < p; ++i) {
                if (!passive[i]) continue;
                beta[i] += alpha * (s[i] - beta[i]);
                if (beta[i] <= tol) {
                    beta[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
        gradient(w);
    }

    model.coefficients = beta;
    if (with_intercept) {
        double c = t_mean;
        for (std::size_t i = 0; i < p; ++i) c -= x_mean[i] * beta[i];
        model.intercept = c;
    }
    detail::fill_in_sample_stats(model, x, t);
    return model;
}

/// Mean over folds of held-out MSE. Rows are permuted by a seeded shuffle and
/// cut into contiguous near-equal folds. Same inputs give a bit-identical
/// result.
inline double cross_validated_mse(const Matrix& x, std::span<const double> t, std::size_t folds, std::uint64_t seed,
                                  bool with_intercept) {
    if (folds < 2) throw validation_error("cross-validation needs at least 2 folds");
    if (x.rows() != t.size()) throw validation_error("design/target row mismatch");
    if (x.rows() < folds) {
        throw validation_error("cannot split " + std::to_string(x.rows()) + " rows into " + std::to_string(folds) +
                               " folds");
    }
    if (x.cols() == 0 || x.cols() > kMaxColumns) throw validation_error("unsupported column count");
    const auto perm = detail::seeded_permutation(x.rows(), seed);
    const auto bounds = detail::fold_bounds(x.rows(), folds);
    return detail::cv_mse_raw(x.data(), t.data(), x.rows(), x.cols(), with_intercept, perm, bounds);
}

/// c + sum coefficients[i] * x[i].
inline double predict_linear(const LinearModel& model, std::span<const double> x) {
    if (x.size() != model.coefficients.size()) {
        throw validation_error("model expects " + std::to_string(model.coefficients.size()) + " inputs, got " +
                               std::to_string(x.size()));
    }
    double s = model.intercept_or_zero();
    for (std::size_t i = 0; i < x.size(); ++i) s += model.coefficients[i] * x[i];
    return s;
}

inline double predict_linear(const LinearModel& model, std::span<const std::optional<double>> x) {
    if (x.size() != model.coefficients.size()) {
        throw validation_error("model expects " + std::to_string(model.coefficients.size()) + " inputs, got " +
                               std::to_string(x.size()));
    }
    std::vector<double> dense(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i]) throw missing_input_error("missing input for environment '" + model.environment_ids[i] + "'");
        dense[i] = *x[i];
    }
    return predict_linear(model, std::span<const double>(dense));
}

}  // namespace benchsel
