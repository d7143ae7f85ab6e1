#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "benchsel/linreg.hpp"
#include "benchsel/score_table.hpp"

namespace benchsel::support {

inline std::string data_path(const std::string& rel) { return std::string(BENCHSEL_DATA_DIR) + "/" + rel; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("benchsel-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& rel = {}) const { return rel.empty() ? path_.string() : (path_ / rel).string(); }

private:
    std::filesystem::path path_;
};

/// Solves (X'X) b = X't by Gauss-Jordan elimination with partial pivoting in
/// long double, forming the normal matrix explicitly. Intercept last.
inline std::vector<double> oracle_normal_equations(const Matrix& x, const std::vector<double>& t, bool intercept) {
    const std::size_t c = x.cols(), p = c + (intercept ? 1 : 0);
    std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::vector<long double> row(p);
        for (std::size_t i = 0; i < c; ++i) row[i] = x(r, i);
        if (intercept) row[c] = 1.0L;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) a[i][j] += row[i] * row[j];
            a[i][p] += row[i] * t[r];
        }
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        }
        std::swap(a[col], a[piv]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const long double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k <= p; ++k) a[r][k] -= f * a[col][k];
        }
    }
    std::vector<double> b(p);
    for (std::size_t i = 0; i < p; ++i) b[i] = static_cast<double>(a[i][p] / a[i][i]);
    return b;
}

inline std::vector<std::string> env_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("env" + std::string(i < 10 ? "0" : "") + std::to_string(i));
    return out;
}

inline std::vector<std::string> alg_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("alg" + std::string(i < 10 ? "0" : "") + std::to_string(i));
    return out;
}

struct SyntheticSpec {
    std::size_t algorithms = 60;
    std::size_t environments = 20;
    double missing_rate = 0.0;
    double noise = 0.0;
    std::uint64_t seed = 1;
    /// Weighted environments defining the target; empty means a random mix.
    std::vector<std::pair<std::size_t, double>> weights;
};

/// Log scores uniform on [0, 3] with an optional missing mask; the target is
/// the weighted sum of the chosen columns plus Gaussian noise. Weighted
/// columns are never masked.
inline PreparedDataset synthetic_dataset(const SyntheticSpec& s) {
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> u(0.0, 3.0), coin(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, s.noise);
    std::vector<bool> weighted(s.environments, false);
    for (const auto& [e, w] : s.weights) weighted[e] = true;
    std::vector<std::optional<double>> logs(s.algorithms * s.environments);
    std::vector<double> targets(s.algorithms);
    for (std::size_t a = 0; a < s.algorithms; ++a) {
        for (std::size_t e = 0; e < s.environments; ++e) {
            const double v = u(rng);
            if (!weighted[e] && coin(rng) < s.missing_rate) continue;
            logs[a * s.environments + e] = v;
        }
        double t = 0.0;
        for (const auto& [e, w] : s.weights) t += w * *logs[a * s.environments + e];
        if (s.noise > 0.0) t += noise(rng);
        targets[a] = t;
    }
    return PreparedDataset(alg_names(s.algorithms), env_names(s.environments), std::move(logs), std::move(targets));
}

}  // namespace benchsel::support
