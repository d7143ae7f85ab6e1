#pragma once

// Command-line front end: search, pipeline, predict and analyze. run_cli()
// is the whole program; tools/benchsel.cpp only forwards argv to it so the
// commands can be driven in-process by tests.
//
// Exit codes: 0 success, 1 data or runtime error, 2 usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "benchsel/checksum.hpp"
#include "benchsel/errors.hpp"
#include "benchsel/linreg.hpp"
#include "benchsel/model_io.hpp"
#include "benchsel/predictor.hpp"
#include "benchsel/score_table.hpp"
#include "benchsel/structure_analysis.hpp"
#include "benchsel/subset_search.hpp"

namespace benchsel::cli {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// formatting helpers

/// Shortest text that round-trips the double.
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline std::string percent(double fraction, int digits = 1) { return fixed(100.0 * fraction, digits) + "%"; }

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

/// Left-aligned plain-text table.
inline std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        if (width.size() < r.size()) width.resize(r.size(), 0);
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::ostringstream os;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t c = 0; c < r.size(); ++c) {
            line += r[c];
            if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        os << line << '\n';
    }
    return os.str();
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv::escape(fields[i]);
    }
    return out + '\n';
}

// ---------------------------------------------------------------------------
// shared option handling

struct DataOptions {
    std::string scores;
    std::string norms;
    int min_games = 40;
    int min_algorithms = 40;
    std::string target = "median";
    std::size_t threads = 0;
    std::string out_dir = ".";
    bool quiet = false;
    bool json_mode = false;
};

inline void add_data_options(CLI::App& cmd, DataOptions& o, bool with_filters = true) {
    cmd.add_option("--scores", o.scores, "Raw score CSV (algorithm,<env_1>,...)")->required()->check(CLI::ExistingFile);
    cmd.add_option("--norms", o.norms, "Normalization CSV (environment,random,human)")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_filters) {
        cmd.add_option("--min-games", o.min_games, "Drop algorithms with fewer scores")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd.add_option("--min-algos", o.min_algorithms, "Drop environments with fewer scores")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd.add_option("--target", o.target, "Summary statistic used as the target")
            ->capture_default_str()
            ->check(CLI::IsMember({"median", "mean"}));
    }
    cmd.add_option("--threads", o.threads, "Worker threads (0 = BENCHSEL_THREADS or all cores)")
        ->capture_default_str();
    cmd.add_option("--out", o.out_dir, "Output directory")->capture_default_str();
    cmd.add_flag("--quiet", o.quiet, "Print nothing on success");
    cmd.add_flag("--json", o.json_mode, "Print a JSON summary instead of text");
}

struct Inputs {
    RawScoreTable raw;
    NormalizationTable norms;
    std::string scores_checksum;
    std::string norms_checksum;
};

inline Inputs load_inputs(const DataOptions& o) {
    Inputs in;
    const auto text = csv::read_file(o.scores);
    in.scores_checksum = checksum_hex(text);
    in.raw = parse_scores(text);
    in.norms = load_normalization(o.norms);
    in.norms_checksum = in.norms.checksum();
    return in;
}

inline PreparedDataset prepare(const Inputs& in, const DataOptions& o) {
    return prepare_dataset(in.raw, in.norms, FilterConfig{o.min_games, o.min_algorithms},
                           parse_summary_stat(o.target));
}

inline json provenance(const Inputs& in, const std::string& manifest, const std::string& model_checksum = {}) {
    json p;
    p["scores_checksum"] = in.scores_checksum;
    p["norms_checksum"] = in.norms_checksum;
    if (!model_checksum.empty()) p["model_checksum"] = model_checksum;
    p["manifest"] = manifest;
    return p;
}

inline std::string provenance_comment(const Inputs& in, const std::string& manifest,
                                      const std::string& model_checksum = {}) {
    std::string s = "# scores_checksum=" + in.scores_checksum + " norms_checksum=" + in.norms_checksum;
    if (!model_checksum.empty()) s += " model_checksum=" + model_checksum;
    return s + " manifest=" + manifest + "\n";
}

class RunClock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline json run_manifest(const std::string& command, json config, const Inputs& in, std::uint64_t seed,
                         std::size_t workers, const RunClock& clock, std::vector<std::string> outputs) {
    json m;
    m["command"] = command;
    m["config"] = std::move(config);
    m["inputs"] = {{"scores_checksum", in.scores_checksum}, {"norms_checksum", in.norms_checksum}};
    m["seed"] = seed;
    m["tool_version"] = kVersion;
    m["wall_time_seconds"] = clock.seconds();
    m["workers"] = workers;
    m["outputs"] = std::move(outputs);
    return m;
}

inline fs::path out_path(const DataOptions& o, const std::string& name) {
    fs::create_directories(o.out_dir);
    return fs::path(o.out_dir) / name;
}

inline std::vector<std::string> split_list(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ',')) {
            auto t = std::string(csv::trim(part));
            if (!t.empty()) out.push_back(t);
        }
    }
    return out;
}

inline json data_config(const DataOptions& o) {
    return json{{"scores", o.scores},     {"norms", o.norms},       {"min_games", o.min_games},
                {"min_algos", o.min_algorithms}, {"target", o.target}};
}

// ---------------------------------------------------------------------------
// search

struct SearchOptions {
    DataOptions data;
    std::size_t size = 0;
    std::vector<std::string> include;
    std::vector<std::string> exclude;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::size_t top_k = 20;
    bool intercept = false;
};

inline int cmd_search(const SearchOptions& o, std::ostream& out, std::ostream& err) {
    RunClock clock;
    const auto in = load_inputs(o.data);
    const auto d = prepare(in, o.data);

    SearchConfig cfg;
    cfg.subset_size = o.size;
    cfg.must_include = split_list(o.include);
    cfg.exclude = split_list(o.exclude);
    cfg.folds = o.folds;
    cfg.seed = o.seed;
    cfg.with_intercept = o.intercept;
    cfg.top_k = std::max<std::size_t>(1, o.top_k);
    cfg.workers = resolve_workers(o.data.threads);
    cfg.progress = o.data.quiet ? nullptr : &err;
    auto result = enumerate_and_score(d, cfg);
    for (auto& r : result.ranked) r.model.norms_checksum = in.norms_checksum;

    const std::string manifest_name = "search_manifest.json";
    std::string ranked = provenance_comment(in, manifest_name);
    ranked += "# dataset_fingerprint=" + d.fingerprint() + " size=" + std::to_string(o.size) +
              " folds=" + std::to_string(o.folds) + " seed=" + std::to_string(o.seed) +
              " intercept=" + (o.intercept ? "on" : "off") + "\n";
    ranked += csv_line({"rank", "cv_mse", "r_squared", "approx_rel_error", "n_algorithms", "environments",
                        "coefficients", "intercept"});
    for (std::size_t i = 0; i < result.ranked.size(); ++i) {
        const auto& r = result.ranked[i];
        std::vector<std::string> coefs;
        for (double c : r.model.coefficients) coefs.push_back(num(c));
        ranked += csv_line({std::to_string(i + 1), num(r.cv_mse), num(r.model.stats.r_squared),
                            num(approx_relative_error_from_log_mae(*r.model.stats.log_mae)),
                            std::to_string(r.n_algorithms_used), join(r.environments, ";"), join(coefs, ";"),
                            r.model.intercept ? num(*r.model.intercept) : ""});
    }
    const auto ranked_path = out_path(o.data, "search_ranked.csv");
    write_text_file(ranked_path.string(), ranked);

    auto best = result.best();
    best.model.name = "best-" + std::to_string(o.size);
    json best_doc;
    best_doc["kind"] = "search_best_model";
    best_doc["provenance"] = provenance(in, manifest_name);
    best_doc["dataset_fingerprint"] = d.fingerprint();
    best_doc["model"] = to_json(best.model);
    best_doc["cv_mse"] = best.cv_mse;
    best_doc["n_algorithms_used"] = best.n_algorithms_used;
    best_doc["candidates"] = result.candidates;
    best_doc["scored"] = result.scored;
    best_doc["skipped"] = to_json(result.skipped);
    const auto model_path = out_path(o.data, "search_best_model.json");
    write_text_file(model_path.string(), best_doc.dump(2) + "\n");

    json config = data_config(o.data);
    config["size"] = o.size;
    config["include"] = cfg.must_include;
    config["exclude"] = cfg.exclude;
    config["folds"] = o.folds;
    config["top_k"] = cfg.top_k;
    config["intercept"] = o.intercept;
    auto manifest = run_manifest("search", std::move(config), in, o.seed, cfg.workers, clock,
                                 {ranked_path.filename().string(), model_path.filename().string()});
    manifest["dataset_fingerprint"] = d.fingerprint();
    manifest["search"] = {{"candidates", result.candidates}, {"scored", result.scored},
                          {"skipped", to_json(result.skipped)}};
    write_text_file(out_path(o.data, manifest_name).string(), manifest.dump(2) + "\n");

    if (o.data.json_mode) {
        out << best_doc.dump(2) << '\n';
    } else if (!o.data.quiet) {
        std::vector<std::vector<std::string>> rows{{"rank", "cv_mse", "R2", "~rel.err", "n", "environments"}};
        for (std::size_t i = 0; i < result.ranked.size(); ++i) {
            const auto& r = result.ranked[i];
            rows.push_back({std::to_string(i + 1), fixed(r.cv_mse, 6), fixed(r.model.stats.r_squared, 3),
                            percent(approx_relative_error_from_log_mae(*r.model.stats.log_mae)),
                            std::to_string(r.n_algorithms_used), join(r.environments, ", ")});
        }
        out << aligned_table(rows);
        out << result.candidates << " candidates, " << result.scored << " scored, " << result.skipped.total()
            << " skipped (" << result.skipped.too_few_algorithms << " too few algorithms, "
            << result.skipped.singular << " singular)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineOptions {
    DataOptions data;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::string reference;
};

inline int cmd_pipeline(const PipelineOptions& o, std::ostream& out, std::ostream& err) {
    RunClock clock;
    const auto in = load_inputs(o.data);
    const auto d = prepare(in, o.data);

    PipelineConfig cfg;
    cfg.folds = o.folds;
    cfg.seed = o.seed;
    cfg.workers = resolve_workers(o.data.threads);
    cfg.progress = o.data.quiet ? nullptr : &err;
    auto suite = nested_pipeline(d, cfg);

    const std::string run_name = "pipeline_run.json";
    const std::string suite_name = "suite_manifest.json";
    fs::create_directories(fs::path(o.data.out_dir) / "models");
    std::vector<std::string> outputs;

    json stages = json::array();
    for (auto& st : suite.stages) {
        st.selected.model.norms_checksum = in.norms_checksum;
        json doc;
        doc["kind"] = "suite_model";
        doc["provenance"] = provenance(in, suite_name);
        doc["model"] = to_json(st.selected.model);
        const std::string rel = "models/" + st.key + ".json";
        write_text_file((fs::path(o.data.out_dir) / rel).string(), doc.dump(2) + "\n");
        outputs.push_back(rel);

        json s;
        s["name"] = st.key;
        s["environments"] = st.selected.environments;
        s["cv_mse"] = st.selected.cv_mse;
        s["n_algorithms_used"] = st.selected.n_algorithms_used;
        s["candidates"] = st.candidates;
        s["scored"] = st.scored;
        s["skipped"] = to_json(st.skipped);
        s["model"] = to_json(st.selected.model);
        s["model_file"] = rel;
        s["model_checksum"] = checksum_hex(doc.dump(2) + "\n");
        stages.push_back(std::move(s));
    }

    json banks = json::object();
    std::vector<std::vector<std::string>> table{{"name", "games", "R2", "~rel.err", "cv_mse", "n"}};
    std::string summary_csv = provenance_comment(in, suite_name);
    summary_csv += csv_line({"name", "games", "r_squared", "approx_rel_error", "cv_mse", "n_algorithms"});
    const auto add_row = [&](const std::string& name, const std::vector<std::string>& games, const LinearModel& m,
                             std::optional<double> cv, std::size_t n) {
        const double rel = approx_relative_error_from_log_mae(*m.stats.log_mae);
        table.push_back({name, join(games, ", "), fixed(m.stats.r_squared, 3), percent(rel),
                         cv ? fixed(*cv, 6) : "-", std::to_string(n)});
        summary_csv += csv_line({name, join(games, ";"), num(m.stats.r_squared), num(rel), cv ? num(*cv) : "",
                                 std::to_string(n)});
    };
    for (const char* key : {"size-1", "size-3", "size-5", "size-10", "val-3", "val-5"}) {
        const auto& st = suite.stage(key);
        add_row(key, st.selected.environments, st.selected.model, st.selected.cv_mse,
                st.selected.n_algorithms_used);
    }

    // Optional reference subsets (e.g. subsets used in prior work), refit for comparison.
    json references = json::array();
    if (!o.reference.empty()) {
        const auto ref = parse_json_file(o.reference);
        for (const auto& [name, games] : ref.at("subsets").items()) {
            const auto list = games.get<std::vector<std::string>>();
            auto absent = std::find_if(list.begin(), list.end(),
                                       [&](const std::string& g) { return !d.find_environment(g).has_value(); });
            if (absent != list.end()) {
                references.push_back({{"name", name}, {"skipped", "'" + *absent + "' not in dataset"}});
                continue;
            }
            try {
                auto m = fit_subset(d, list, false);
                m.name = name;
                add_row(name, m.environment_ids, m, std::nullopt, m.stats.n_observations);
                references.push_back({{"name", name}, {"model", to_json(m)}});
            } catch (const error& e) {
                references.push_back({{"name", name}, {"skipped", e.what()}});
            }
        }
    }

    std::string variance_text;
    for (const char* key : {"size-5", "size-10"}) {
        auto bank = per_game_models(d, suite.subset(key), std::string(key) + "-bank");
        bank.norms_checksum = in.norms_checksum;
        const double ve = variance_explained(bank, d);
        const std::string rel = std::string("models/") + key + "-bank.json";
        json doc = to_json(bank);
        doc["variance_explained"] = ve;
        doc["provenance"] = provenance(in, suite_name);
        write_text_file((fs::path(o.data.out_dir) / rel).string(), doc.dump(2) + "\n");
        outputs.push_back(rel);
        std::size_t usable = 0;
        for (const auto& g : bank.models) usable += g.model.has_value();
        banks[key] = {{"file", rel}, {"variance_explained", ve}, {"usable_models", usable},
                      {"environments", bank.models.size()}};
        variance_text += std::string(key) + " per-game models explain " + percent(ve) + " of log-score variance (" +
                         std::to_string(usable) + "/" + std::to_string(bank.models.size()) + " usable models)\n";
        suite.banks.emplace(key, std::move(bank));
    }

    json suite_doc;
    suite_doc["kind"] = "subset_suite";
    suite_doc["provenance"] = provenance(in, run_name);
    suite_doc["dataset_fingerprint"] = d.fingerprint();
    suite_doc["seed"] = o.seed;
    suite_doc["folds"] = o.folds;
    suite_doc["target"] = o.data.target;
    suite_doc["subset_fits_intercept"] = false;
    suite_doc["per_game_fits_intercept"] = true;
    suite_doc["cv_chain_monotone"] = suite.cv_chain_monotone;
    suite_doc["stages"] = std::move(stages);
    suite_doc["banks"] = std::move(banks);
    suite_doc["references"] = std::move(references);
    write_text_file(out_path(o.data, suite_name).string(), suite_doc.dump(2) + "\n");

    const std::string summary_txt = aligned_table(table) + variance_text;
    write_text_file(out_path(o.data, "suite_summary.txt").string(), summary_txt);
    write_text_file(out_path(o.data, "suite_summary.csv").string(), summary_csv);
    outputs.insert(outputs.begin(), {suite_name, "suite_summary.txt", "suite_summary.csv"});

    json config = data_config(o.data);
    config["folds"] = o.folds;
    config["reference"] = o.reference;
    auto manifest = run_manifest("pipeline", std::move(config), in, o.seed, cfg.workers, clock, outputs);
    manifest["suite_checksum"] = checksum_hex(suite_doc.dump(2) + "\n");
    write_text_file(out_path(o.data, run_name).string(), manifest.dump(2) + "\n");

    if (o.data.json_mode) {
        out << suite_doc.dump(2) << '\n';
    } else if (!o.data.quiet) {
        out << summary_txt;
        if (!suite.cv_chain_monotone) out << "note: cv_mse is not monotone along size-1 -> size-3 -> size-5\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
    std::string model;
    std::string scores;
    std::string norms;
    std::string true_summary;
    std::string baseline;
    bool strict = false;
    std::string out_dir = ".";
    bool quiet = false;
    bool json_mode = false;
};

inline json report_json(const PredictionReport& r) {
    json j;
    j["algorithm"] = r.algorithm_id;
    j["predicted"] = r.predicted ? json(*r.predicted) : json(nullptr);
    j["true"] = r.true_summary ? json(*r.true_summary) : json(nullptr);
    j["rel_error"] = r.relative_error ? json(*r.relative_error) : json(nullptr);
    j["abs_rel_error"] = r.relative_error ? json(std::abs(*r.relative_error)) : json(nullptr);
    j["below_zero"] = r.below_zero;
    j["inputs_used"] = r.inputs_used;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline std::string reports_csv(const std::vector<PredictionReport>& reports, const std::string& header_comment) {
    std::string s = header_comment;
    s += csv_line({"algorithm", "predicted", "true", "rel_error", "abs_rel_error"});
    for (const auto& r : reports) {
        s += csv_line({r.algorithm_id, r.predicted ? num(*r.predicted) : "", r.true_summary ? num(*r.true_summary) : "",
                       r.relative_error ? num(*r.relative_error) : "",
                       r.relative_error ? num(std::abs(*r.relative_error)) : ""});
    }
    return s;
}

inline std::vector<std::vector<std::string>> reports_table(const std::vector<PredictionReport>& reports, int digits) {
    std::vector<std::vector<std::string>> rows{{"algorithm", "true", "predicted", "rel.err"}};
    for (const auto& r : reports) {
        rows.push_back({r.algorithm_id, r.true_summary ? fixed(*r.true_summary, digits) : "-",
                        r.predicted ? fixed(*r.predicted, digits) : "error: " + r.error,
                        r.relative_error ? percent(*r.relative_error) : "-"});
    }
    return rows;
}

inline int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& err) {
    RunClock clock;
    const auto model_text = csv::read_file(o.model);
    const auto model = load_model(o.model);
    const auto model_checksum = checksum_hex(model_text);

    DataOptions data;
    data.scores = o.scores;
    data.norms = o.norms;
    data.out_dir = o.out_dir;
    const auto in = load_inputs(data);

    std::vector<std::string> warnings;
    if (model.norms_checksum != in.norms_checksum) {
        const std::string msg = "model was fitted against normalization checksum '" + model.norms_checksum +
                                "' but '" + o.norms + "' has checksum '" + in.norms_checksum + "'";
        if (o.strict) throw validation_error(msg);
        warnings.push_back(msg);
        err << "warning: " << msg << '\n';
    }

    RawScoreTable table = in.raw;
    std::vector<std::optional<double>> truth;
    const std::vector<std::optional<double>>* truth_ptr = nullptr;
    if (!o.true_summary.empty()) {
        auto [rest, column] = in.raw.split_column(o.true_summary);
        table = std::move(rest);
        truth = std::move(column);
        truth_ptr = &truth;
    }
    const auto reports = predict_table(model, table, in.norms, truth_ptr);
    for (const auto& r : reports) {
        if (!r.error.empty()) err << "warning: " << r.algorithm_id << ": " << r.error << '\n';
    }

    const std::string manifest_name = "predict_manifest.json";
    json doc;
    doc["kind"] = "predictions";
    doc["provenance"] = provenance(in, manifest_name, model_checksum);
    doc["model"] = to_json(model);
    doc["warnings"] = warnings;
    json rows = json::array();
    for (const auto& r : reports) rows.push_back(report_json(r));
    doc["reports"] = std::move(rows);

    std::optional<std::uint64_t> inversions;
    std::vector<PredictionReport> rebased;
    if (truth_ptr) {
        std::vector<PredictionReport> complete;
        for (const auto& r : reports) {
            if (r.predicted && r.true_summary) complete.push_back(r);
        }
        const auto by_truth = order_by(complete, [](const PredictionReport& r) { return r.true_summary; });
        const auto by_pred = order_by(complete, [](const PredictionReport& r) { return r.predicted; });
        inversions = inversion_count(by_truth, by_pred);
        doc["inversion_count"] = *inversions;
        doc["order_by_truth"] = by_truth;
        doc["order_by_prediction"] = by_pred;
        if (!o.baseline.empty()) {
            rebased = rebase_scores(complete, o.baseline);
            json rb = json::array();
            for (const auto& r : rebased) rb.push_back(report_json(r));
            doc["baseline"] = o.baseline;
            doc["rebased"] = std::move(rb);
        }
    } else if (!o.baseline.empty()) {
        throw validation_error("--baseline needs --true-summary");
    }

    std::vector<std::string> outputs{"predictions.csv", "predictions.json"};
    write_text_file(out_path(data, "predictions.csv").string(),
                    reports_csv(reports, provenance_comment(in, manifest_name, model_checksum)));
    write_text_file(out_path(data, "predictions.json").string(), doc.dump(2) + "\n");
    if (!rebased.empty()) {
        write_text_file(out_path(data, "predictions_rebased.csv").string(),
                        reports_csv(rebased, provenance_comment(in, manifest_name, model_checksum)));
        outputs.push_back("predictions_rebased.csv");
    }
    json config{{"model", o.model}, {"scores", o.scores}, {"norms", o.norms}, {"true_summary", o.true_summary},
                {"baseline", o.baseline}, {"strict", o.strict}};
    auto manifest = run_manifest("predict", std::move(config), in, 0, 1, clock, outputs);
    manifest["inputs"]["model_checksum"] = model_checksum;
    write_text_file(out_path(data, manifest_name).string(), manifest.dump(2) + "\n");

    if (o.json_mode) {
        out << doc.dump(2) << '\n';
    } else if (!o.quiet) {
        out << aligned_table(reports_table(reports, 1));
        if (!rebased.empty()) {
            out << "\nrebased to " << o.baseline << ":\n" << aligned_table(reports_table(rebased, 2));
        }
        if (inversions) out << "\ninversions between true and predicted order: " << *inversions << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
    DataOptions data;
    double threshold = 0.9;
    std::size_t top = 24;
    double negative_threshold = 0.5;
    std::string dot;
    std::string categories;
    std::string model;
};

inline int cmd_rank_single(const AnalyzeOptions& o, std::ostream& out) {
    RunClock clock;
    const auto in = load_inputs(o.data);
    const auto d = prepare(in, o.data);
    const auto ranking = rank_single_games(d);

    const std::string manifest_name = "rank_single_manifest.json";
    std::string csv_text = provenance_comment(in, manifest_name);
    csv_text += csv_line({"environment", "slope", "intercept", "r_squared", "n_algorithms"});
    std::vector<std::vector<std::string>> rows{{"environment", "slope", "intercept", "R2", "n"}};
    json j = json::array();
    for (const auto& f : ranking.ranked) {
        csv_text += csv_line({f.environment, num(f.slope), num(f.intercept), num(f.r_squared),
                              std::to_string(f.n_used)});
        rows.push_back({f.environment, fixed(f.slope, 3), fixed(f.intercept, 3), fixed(f.r_squared, 3),
                        std::to_string(f.n_used)});
        j.push_back({{"environment", f.environment}, {"slope", f.slope}, {"intercept", f.intercept},
                     {"r_squared", f.r_squared}, {"n_algorithms", f.n_used}});
    }
    write_text_file(out_path(o.data, "rank_single.csv").string(), csv_text);
    json excluded = json::array();
    for (const auto& [env, why] : ranking.excluded) excluded.push_back({{"environment", env}, {"reason", why}});
    write_text_file(out_path(o.data, manifest_name).string(),
                    run_manifest("analyze rank-single", data_config(o.data), in, 0, 1, clock, {"rank_single.csv"})
                            .dump(2) +
                        "\n");
    if (o.data.json_mode) {
        out << json{{"ranked", j}, {"excluded", excluded}}.dump(2) << '\n';
    } else if (!o.data.quiet) {
        out << aligned_table(rows);
        for (const auto& [env, why] : ranking.excluded) out << "excluded " << env << ": " << why << '\n';
    }
    return 0;
}

inline int cmd_correlate(const AnalyzeOptions& o, std::ostream& out) {
    RunClock clock;
    const auto in = load_inputs(o.data);
    const auto d = prepare(in, o.data);
    const std::size_t workers = resolve_workers(o.data.threads);
    auto graph = pearson_matrix(d, workers);
    if (!o.categories.empty()) graph.categories = load_categories(o.categories);
    const auto pairs = correlated_pairs(graph, o.threshold, o.top);
    const auto negative = negatively_correlated_pairs(graph, o.negative_threshold);

    const std::string manifest_name = "correlate_manifest.json";
    std::string pairs_csv = provenance_comment(in, manifest_name);
    pairs_csv += csv_line({"rank", "environment_a", "environment_b", "pcc", "n_algorithms", "highly_correlated"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        pairs_csv += csv_line({std::to_string(i + 1), p.a, p.b, num(p.pcc), std::to_string(p.n_pairs),
                               p.highly_correlated ? "true" : "false"});
    }
    write_text_file(out_path(o.data, "correlation_pairs.csv").string(), pairs_csv);

    std::string negative_csv = provenance_comment(in, manifest_name);
    negative_csv += csv_line({"environment_a", "environment_b", "pcc", "n_algorithms"});
    for (const auto& p : negative) negative_csv += csv_line({p.a, p.b, num(p.pcc), std::to_string(p.n_pairs)});
    write_text_file(out_path(o.data, "correlation_negative.csv").string(), negative_csv);

    std::string matrix_csv = provenance_comment(in, manifest_name);
    std::vector<std::string> header{"environment"};
    header.insert(header.end(), graph.environments().begin(), graph.environments().end());
    matrix_csv += csv_line(header);
    for (std::size_t i = 0; i < graph.size(); ++i) {
        std::vector<std::string> row{graph.environments()[i]};
        for (std::size_t j = 0; j < graph.size(); ++j) {
            const auto v = graph.pcc(i, j);
            row.push_back(v ? num(*v) : "");
        }
        matrix_csv += csv_line(row);
    }
    write_text_file(out_path(o.data, "correlation_matrix.csv").string(), matrix_csv);

    std::vector<std::string> outputs{"correlation_pairs.csv", "correlation_negative.csv", "correlation_matrix.csv"};
    if (!o.dot.empty()) {
        const fs::path dot_path = fs::path(o.dot).is_absolute() ? fs::path(o.dot) : fs::path(o.data.out_dir) / o.dot;
        if (dot_path.has_parent_path()) fs::create_directories(dot_path.parent_path());
        write_text_file(dot_path.string(), export_dot(pairs, graph.categories));
        outputs.push_back(dot_path.string());
    }
    json config = data_config(o.data);
    config["threshold"] = o.threshold;
    config["top"] = o.top;
    config["negative_threshold"] = o.negative_threshold;
    config["categories"] = o.categories;
    write_text_file(out_path(o.data, manifest_name).string(),
                    run_manifest("analyze correlate", std::move(config), in, 0, workers, clock, outputs).dump(2) +
                        "\n");

    if (o.data.json_mode) {
        json j = json::array();
        for (const auto& p : pairs) {
            j.push_back({{"a", p.a}, {"b", p.b}, {"pcc", p.pcc}, {"highly_correlated", p.highly_correlated}});
        }
        out << j.dump(2) << '\n';
    } else if (!o.data.quiet) {
        std::vector<std::vector<std::string>> rows{{"rank", "pair", "pcc", "n", ""}};
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& p = pairs[i];
            rows.push_back({std::to_string(i + 1), p.a + " / " + p.b, fixed(p.pcc, 3), std::to_string(p.n_pairs),
                            p.highly_correlated ? "high" : ""});
        }
        out << aligned_table(rows);
        for (const auto& p : negative) {
            out << "negative: " << p.a << " / " << p.b << " " << fixed(p.pcc, 2) << '\n';
        }
    }
    return 0;
}

inline int cmd_fairness(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
    RunClock clock;
    const auto in = load_inputs(o.data);
    const auto d = prepare(in, o.data);
    const auto model_text = csv::read_file(o.model);
    const auto model = load_model(o.model);
    if (model.norms_checksum != in.norms_checksum) {
        err << "warning: model was fitted against a different normalization table\n";
    }

    std::vector<std::size_t> cols;
    for (const auto& env : model.environment_ids) cols.push_back(d.require_environment(env));
    std::vector<PredictionReport> reports;
    std::vector<double> logs(cols.size());
    for (std::size_t a = 0; a < d.n_algorithms(); ++a) {
        bool complete = true;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (!d.has(a, cols[i])) {
                complete = false;
                break;
            }
            logs[i] = d.value(a, cols[i]);
        }
        if (!complete) continue;
        PredictionReport r;
        r.algorithm_id = d.algorithms()[a];
        r.predicted = inverse_log_transform(predict_linear(model, std::span<const double>(logs)));
        r.true_summary = d.summaries()[a];
        if (std::abs(*r.true_summary) > kMinRelativeDenominator) {
            r.relative_error = relative_error(*r.true_summary, *r.predicted).value;
        }
        reports.push_back(std::move(r));
    }
    const auto report = fairness_report(reports);

    json j;
    j["kind"] = "fairness_report";
    j["provenance"] = provenance(in, "fairness_manifest.json", checksum_hex(model_text));
    j["alpha"] = report.alpha;
    json groups = json::array();
    std::vector<std::vector<std::string>> rows{{"group", "n", "mean |rel.err|", "mean rel.err"}};
    for (const auto& g : report.groups) {
        groups.push_back({{"label", g.label}, {"algorithms", g.algorithms},
                          {"mean_abs_rel_error", g.mean_abs_rel_error}, {"mean_rel_error", g.mean_rel_error}});
        rows.push_back({g.label, std::to_string(g.algorithms.size()), percent(g.mean_abs_rel_error, 2),
                        percent(g.mean_rel_error, 2)});
    }
    j["groups"] = std::move(groups);
    json tests = json::array();
    std::vector<std::vector<std::string>> test_rows{{"pair", "metric", "t", "df", "p", ""}};
    for (const auto& t : report.tests) {
        tests.push_back({{"group_a", t.group_a}, {"group_b", t.group_b}, {"metric", t.metric}, {"t", t.test.t},
                         {"df", t.test.df}, {"p_value", t.test.p_value}, {"significant", t.significant}});
        test_rows.push_back({t.group_a + "-" + t.group_b, t.metric, fixed(t.test.t, 3), fixed(t.test.df, 1),
                             fixed(t.test.p_value, 4), t.significant ? "significant" : ""});
    }
    j["tests"] = std::move(tests);
    j["any_significant"] = report.any_significant();
    write_text_file(out_path(o.data, "fairness.json").string(), j.dump(2) + "\n");
    const std::string text = aligned_table(rows) + "\n" + aligned_table(test_rows);
    write_text_file(out_path(o.data, "fairness.txt").string(), text);

    json config = data_config(o.data);
    config["model"] = o.model;
    write_text_file(out_path(o.data, "fairness_manifest.json").string(),
                    run_manifest("analyze fairness", std::move(config), in, 0, 1, clock,
                                 {"fairness.json", "fairness.txt"})
                            .dump(2) +
                        "\n");
    if (o.data.json_mode) {
        out << j.dump(2) << '\n';
    } else if (!o.data.quiet) {
        out << text;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// entry point

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"benchsel: representative benchmark subsets by exhaustive cross-validated regression", "benchsel"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SearchOptions search;
    auto* search_cmd = app.add_subcommand("search", "Score every subset of one size and rank them by CV MSE");
    add_data_options(*search_cmd, search.data);
    search_cmd->add_option("--size", search.size, "Subset size")->required()->check(CLI::Range(1, 16));
    search_cmd->add_option("--include", search.include, "Environments every subset must contain (comma list)");
    search_cmd->add_option("--exclude", search.exclude, "Environments no subset may contain (comma list)");
    search_cmd->add_option("--folds", search.folds, "Cross-validation folds")->capture_default_str()->check(
        CLI::Range(2, 1000));
    search_cmd->add_option("--seed", search.seed, "Fold shuffle seed")->capture_default_str();
    search_cmd->add_option("--top-k", search.top_k, "Ranked results to keep")->capture_default_str();
    search_cmd->add_flag("--intercept", search.intercept, "Fit an intercept (default: off)");

    PipelineOptions pipeline;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Run the nested subset pipeline and per-game models");
    add_data_options(*pipeline_cmd, pipeline.data);
    pipeline_cmd->add_option("--folds", pipeline.folds, "Cross-validation folds")->capture_default_str()->check(
        CLI::Range(2, 1000));
    pipeline_cmd->add_option("--seed", pipeline.seed, "Fold shuffle seed")->capture_default_str();
    pipeline_cmd->add_option("--reference", pipeline.reference, "JSON of reference subsets to refit for comparison")
        ->check(CLI::ExistingFile);

    PredictOptions predict;
    auto* predict_cmd = app.add_subcommand("predict", "Apply a fitted model to raw scores");
    predict_cmd->add_option("--model", predict.model, "Model JSON")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--scores", predict.scores, "Raw score CSV")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--norms", predict.norms, "Normalization CSV")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--true-summary", predict.true_summary,
                            "Column of the score CSV holding the true summary score");
    predict_cmd->add_option("--baseline", predict.baseline, "Algorithm to rebase scores against");
    predict_cmd->add_flag("--strict", predict.strict, "Fail when the model's normalization checksum differs");
    predict_cmd->add_option("--out", predict.out_dir, "Output directory")->capture_default_str();
    predict_cmd->add_flag("--quiet", predict.quiet, "Print nothing on success");
    predict_cmd->add_flag("--json", predict.json_mode, "Print JSON instead of text");

    AnalyzeOptions analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "Diagnostic analyses of a score table");
    analyze_cmd->require_subcommand(1);
    auto* rank_cmd = analyze_cmd->add_subcommand("rank-single", "Rank environments as sole predictors of the target");
    add_data_options(*rank_cmd, analyze.data);
    auto* corr_cmd = analyze_cmd->add_subcommand("correlate", "Pairwise correlation of log scores");
    add_data_options(*corr_cmd, analyze.data);
    corr_cmd->add_option("--threshold", analyze.threshold, "PCC above which a pair is highly correlated")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    corr_cmd->add_option("--top", analyze.top, "Pairs to report")->capture_default_str();
    corr_cmd->add_option("--negative-threshold", analyze.negative_threshold,
                         "Report pairs with PCC below minus this value")
        ->capture_default_str();
    corr_cmd->add_option("--dot", analyze.dot, "Write a Graphviz document of the top pairs");
    corr_cmd->add_option("--categories", analyze.categories, "Category sidecar CSV (environment,category)")
        ->check(CLI::ExistingFile);
    auto* fair_cmd = analyze_cmd->add_subcommand("fairness", "Tertile audit of a model's relative errors");
    add_data_options(*fair_cmd, analyze.data);
    fair_cmd->add_option("--model", analyze.model, "Model JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*search_cmd) return cmd_search(search, out, err);
        if (*pipeline_cmd) return cmd_pipeline(pipeline, out, err);
        if (*predict_cmd) return cmd_predict(predict, out, err);
        if (*rank_cmd) return cmd_rank_single(analyze, out);
        if (*corr_cmd) return cmd_correlate(analyze, out);
        if (*fair_cmd) return cmd_fairness(analyze, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace benchsel::cli
