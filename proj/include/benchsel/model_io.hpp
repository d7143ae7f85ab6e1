#pragma once

// JSON documents for fitted models and per-game model banks.

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "benchsel/csv.hpp"
#include "benchsel/errors.hpp"
#include "benchsel/linreg.hpp"
#include "benchsel/score_table.hpp"

namespace benchsel {

using json = nlohmann::ordered_json;

inline constexpr const char* kModelFormat = "benchsel.linear_model/1";
inline constexpr const char* kBankFormat = "benchsel.model_bank/1";

inline json to_json(const LinearModel& m) {
    json stats = {{"r_squared", m.stats.r_squared}, {"n_observations", m.stats.n_observations}};
    stats["cv_mse"] = m.stats.cv_mse ? json(*m.stats.cv_mse) : json(nullptr);
    stats["log_mae"] = m.stats.log_mae ? json(*m.stats.log_mae) : json(nullptr);
    json j;
    j["format"] = kModelFormat;
    j["name"] = m.name;
    j["environment_ids"] = m.environment_ids;
    j["coefficients"] = m.coefficients;
    j["intercept"] = m.intercept ? json(*m.intercept) : json(nullptr);
    j["constrained_nonnegative"] = m.constrained_nonnegative;
    j["stats"] = std::move(stats);
    j["norms_checksum"] = m.norms_checksum;
    return j;
}

inline LinearModel model_from_json(const json& j) {
    try {
        if (j.contains("format") && j.at("format").get<std::string>() != kModelFormat) {
            throw validation_error("unsupported model format '" + j.at("format").get<std::string>() + "'");
        }
        LinearModel m;
        m.name = j.value("name", std::string{});
        m.environment_ids = j.at("environment_ids").get<std::vector<std::string>>();
        m.coefficients = j.at("coefficients").get<std::vector<double>>();
        if (j.contains("intercept") && !j.at("intercept").is_null()) m.intercept = j.at("intercept").get<double>();
        m.constrained_nonnegative = j.value("constrained_nonnegative", false);
        m.norms_checksum = j.value("norms_checksum", std::string{});
        if (j.contains("stats")) {
            const auto& s = j.at("stats");
            m.stats.r_squared = s.value("r_squared", 0.0);
            m.stats.n_observations = s.value("n_observations", std::size_t{0});
            if (s.contains("cv_mse") && !s.at("cv_mse").is_null()) m.stats.cv_mse = s.at("cv_mse").get<double>();
            if (s.contains("log_mae") && !s.at("log_mae").is_null()) m.stats.log_mae = s.at("log_mae").get<double>();
        }
        if (m.coefficients.size() != m.environment_ids.size()) {
            throw validation_error("model '" + m.name + "' has " + std::to_string(m.coefficients.size()) +
                                   " coefficients for " + std::to_string(m.environment_ids.size()) + " environments");
        }
        if (m.constrained_nonnegative && !m.all_coefficients_nonnegative()) {
            throw validation_error("model '" + m.name + "' is flagged non-negative but has a negative coefficient");
        }
        return m;
    } catch (const json::exception& e) {
        throw validation_error(std::string("malformed model document: ") + e.what());
    }
}

inline json parse_json_file(const std::string& path) {
    const auto text = csv::read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw schema_error(path + ": " + e.what(), 0, static_cast<std::size_t>(e.byte));
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write file: " + path);
    out << text;
    if (!out) throw error("failed writing file: " + path);
}

inline LinearModel load_model(const std::string& path) {
    const auto j = parse_json_file(path);
    // Suite and search documents wrap the model under "model".
    if (j.contains("model") && j.at("model").is_object()) return model_from_json(j.at("model"));
    return model_from_json(j);
}

/// One entry of a per-game bank. `model` is empty when the fit was not
/// possible; `reason` says why.
struct GameModel {
    std::string environment;
    std::optional<LinearModel> model;
    std::size_t n_used = 0;
    bool identity = false;
    std::string reason;
};

struct ModelBank {
    std::string name;
    std::vector<std::string> subset;
    std::vector<GameModel> models;
    std::string norms_checksum;

    const GameModel* find(std::string_view environment) const {
        const auto key = canonical_key(environment);
        for (const auto& g : models) {
            if (canonical_key(g.environment) == key) return &g;
        }
        return nullptr;
    }
};

inline json to_json(const ModelBank& bank) {
    json j;
    j["format"] = kBankFormat;
    j["name"] = bank.name;
    j["subset"] = bank.subset;
    j["norms_checksum"] = bank.norms_checksum;
    json rows = json::array();
    for (const auto& g : bank.models) {
        json row;
        row["environment"] = g.environment;
        row["identity"] = g.identity;
        row["n_used"] = g.n_used;
        if (g.model) {
            row["usable"] = true;
            row["intercept"] = g.model->intercept_or_zero();
            row["coefficients"] = g.model->coefficients;
            row["r_squared"] = g.model->stats.r_squared;
        } else {
            row["usable"] = false;
            row["reason"] = g.reason;
        }
        rows.push_back(std::move(row));
    }
    j["models"] = std::move(rows);
    return j;
}

inline ModelBank bank_from_json(const json& j) {
    try {
        if (j.contains("format") && j.at("format").get<std::string>() != kBankFormat) {
            throw validation_error("unsupported bank format '" + j.at("format").get<std::string>() + "'");
        }
        ModelBank bank;
        bank.name = j.value("name", std::string{});
        bank.subset = j.at("subset").get<std::vector<std::string>>();
        bank.norms_checksum = j.value("norms_checksum", std::string{});
        for (const auto& row : j.at("models")) {
            GameModel g;
            g.environment = row.at("environment").get<std::string>();
            g.identity = row.value("identity", false);
            g.n_used = row.value("n_used", std::size_t{0});
            if (row.value("usable", true)) {
                LinearModel m;
                m.name = bank.name + "/" + g.environment;
                m.environment_ids = bank.subset;
                m.coefficients = row.at("coefficients").get<std::vector<double>>();
                m.intercept = row.value("intercept", 0.0);
                m.stats.r_squared = row.value("r_squared", 0.0);
                m.norms_checksum = bank.norms_checksum;
                if (m.coefficients.size() != bank.subset.size()) {
                    throw validation_error("bank row '" + g.environment + "' has the wrong number of coefficients");
                }
                g.model = std::move(m);
            } else {
                g.reason = row.value("reason", std::string{});
            }
            bank.models.push_back(std::move(g));
        }
        return bank;
    } catch (const json::exception& e) {
        throw validation_error(std::string("malformed bank document: ") + e.what());
    }
}

inline ModelBank load_bank(const std::string& path) { return bank_from_json(parse_json_file(path)); }

}  // namespace benchsel
