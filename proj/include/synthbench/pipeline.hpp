#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cost.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "registry.hpp"
#include "report.hpp"
#include "search_space.hpp"
#include "tuner.hpp"

namespace synthbench {

struct DataArgs {
    std::string csv;
    std::string schema;
    MissingPolicy missing = MissingPolicy::reject;
    bool stratified = false;
    bool deduplicate = false;
};

struct PipelineContext {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "synthbench-out";
    /// false replaces wall-clock timing with a clock that never advances.
    bool timing = true;
    const std::atomic<bool>* cancel = nullptr;
    std::ostream* log = &std::cout;
};

inline Table load_dataset(const DataArgs& a) {
    LoadOptions opts;
    opts.missing = a.missing;
    Table t = load_csv(a.csv, a.schema, opts);
    return a.deduplicate ? deduplicate_rows(t) : t;
}

inline std::filesystem::path model_dir(const std::filesystem::path& out, const std::string& dataset,
                                       const std::string& model) {
    return out / detail::file_safe(dataset) / model_label(model);
}

namespace detail {

inline void write_json_file(const std::filesystem::path& p, const nlohmann::json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw Error("write failed for '" + p.string() + "'");
}

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open '" + p.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed JSON in '" + p.string() + "': " + e.what());
    }
}

inline void ensure_dir(const std::filesystem::path& p) {
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw Error("cannot create directory '" + p.string() + "': " + ec.message());
}

inline std::array<FoldSplit, 3> dataset_folds(const Table& t, const DataArgs& a, std::uint64_t seed) {
    return make_folds(t, seed, a.stratified);
}

}  // namespace detail

// ----------------------------------------------------------------------------
// tune
// ----------------------------------------------------------------------------

struct TuneCommand {
    DataArgs data;
    std::string model;
    std::string space_path;
    std::optional<std::size_t> trials;
    std::optional<double> budget_s;
    std::optional<std::size_t> max_steps;
    std::size_t parallelism = 1;
    bool prune = true;
    std::size_t eval_cap = 2048;
};

/// Tunes one model on one dataset, fold by fold. Writes trials.ndjson (one
/// line per finished trial, flushed as it lands), best_fold<k>.json and
/// cost.json under <out>/<dataset>/<model>/.
inline TuneResult cmd_tune(const TuneCommand& cmd, const PipelineContext& ctx) {
    const Table table = load_dataset(cmd.data);
    SearchSpace space = load_search_space(cmd.space_path);
    if (cmd.trials) {
        if (*cmd.trials < 1) throw TunerError("--trials must be >= 1");
        space.max_trials = *cmd.trials;
    }
    if (cmd.budget_s) space.time_budget_s = *cmd.budget_s;
    if (cmd.max_steps) space.max_steps = *cmd.max_steps;
    space.validate();
    make_synthesizer(cmd.model);  // rejects unknown names before any work

    EvalConfig eval;
    eval.eval_cap = cmd.eval_cap;
    eval.prune = cmd.prune;
    eval.clock = ctx.timing ? &steady_clock() : &null_clock();
    eval.seed = ctx.seed;
    eval.cancel = ctx.cancel;

    const auto splits = detail::dataset_folds(table, cmd.data, ctx.seed);
    std::vector<FoldData> folds;
    for (const auto& s : splits) folds.push_back(make_fold_data(table, s, eval));

    const std::string dataset = table.schema().dataset_name;
    const auto dir = model_dir(ctx.out_dir, dataset, cmd.model);
    detail::ensure_dir(dir);
    std::ofstream log_file(dir / "trials.ndjson", std::ios::binary | std::ios::trunc);
    if (!log_file) throw Error("cannot write '" + (dir / "trials.ndjson").string() + "'");

    TuneOptions opts;
    opts.parallelism = cmd.parallelism;
    opts.seed = ctx.seed;
    opts.eval = eval;
    opts.dataset = dataset;
    opts.model = cmd.model;
    opts.on_trial = [&](const Trial& t) {
        write_trial(log_file, t);
        log_file.flush();
    };
    const std::string model = cmd.model;
    TuneResult result = tune([&] { return make_synthesizer(model); }, space, folds, opts);

    for (const auto& b : result.best) {
        std::size_t steps = 0;
        for (const auto& t : result.log)
            if (t.fold == b.fold && t.trial_id == b.trial_id) steps = t.cost.num_steps;
        detail::write_json_file(dir / ("best_fold" + std::to_string(b.fold) + ".json"),
                                {{"dataset", dataset},
                                 {"model", cmd.model},
                                 {"fold", b.fold},
                                 {"trial_id", b.trial_id},
                                 {"score", b.score},
                                 {"from_final", b.from_final},
                                 {"num_steps", steps},
                                 {"config", config_to_json(b.config)}});
        *ctx.log << "fold " << b.fold << ": best trial " << b.trial_id << ", "
                 << (b.from_final ? "validation" : "intermediate") << " c2st " << detail::format_fixed(b.score, 4)
                 << ", config " << config_to_json(b.config).dump() << '\n';
    }

    std::vector<CostRecord> records;
    for (const auto& t : result.log) records.push_back(t.cost);
    const DeviceModel device = DeviceModel::from_environment();
    const TuningCost cost = estimate_tuning_cost(records, device);
    detail::write_json_file(dir / "cost.json", {{"dataset", dataset},
                                                {"model", cmd.model},
                                                {"n_trials", records.size()},
                                                {"device_seconds", cost.device_seconds},
                                                {"kwh", cost.kwh},
                                                {"co2_kg", cost.co2_kg}});
    return result;
}

// ----------------------------------------------------------------------------
// evaluate
// ----------------------------------------------------------------------------

struct EvaluateCommand {
    DataArgs data;
    std::string model;
    /// Evaluate this configuration (JSON object file) instead of the tuned ones.
    std::optional<std::string> config_path;
    /// Evaluate the model's built-in defaults instead of the tuned ones.
    bool default_config = false;
    std::size_t n_samples = 5;
    /// Training-step cap for untuned configurations.
    std::size_t max_steps = 100;
};

namespace detail {

struct FoldPlan {
    Config config;
    std::size_t steps = 0;
};

inline FoldPlan fold_plan(const EvaluateCommand& cmd, const std::filesystem::path& dir, std::size_t fold) {
    if (cmd.default_config) return {Config{}, cmd.max_steps};
    if (cmd.config_path) return {config_from_json(read_json_file(*cmd.config_path)), cmd.max_steps};
    const auto path = dir / ("best_fold" + std::to_string(fold) + ".json");
    if (!std::filesystem::exists(path))
        throw Error("missing tuned configuration '" + path.string() + "' (run tune first, or pass --default-config)");
    const auto j = read_json_file(path);
    try {
        return {config_from_json(j.at("config")), std::max<std::size_t>(1, j.at("num_steps").get<std::size_t>())};
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed '" + path.string() + "': " + e.what());
    }
}

inline Table head_rows(const Table& t, std::size_t n) {
    std::vector<std::size_t> idx(std::min(n, t.n_rows()));
    std::iota(idx.begin(), idx.end(), 0);
    return t.select_rows(idx);
}

}  // namespace detail

/// Retrains the chosen configuration per fold, draws n_samples synthetic
/// tables of |train| rows, and scores each against the fold's test split.
/// Rewrites <out>/<dataset>/<model>/scores.csv.
inline ScoreTable cmd_evaluate(const EvaluateCommand& cmd, const PipelineContext& ctx) {
    if (cmd.n_samples < 1) throw Error("--samples must be >= 1");
    const Table table = load_dataset(cmd.data);
    const std::string dataset = table.schema().dataset_name;
    const auto dir = model_dir(ctx.out_dir, dataset, cmd.model);
    const auto splits = detail::dataset_folds(table, cmd.data, ctx.seed);

    ScoreTable scores;
    for (const auto& split : splits) {
        if (ctx.cancel && ctx.cancel->load()) throw Error("interrupted");
        const std::size_t k = split.fold_index;
        const auto plan = detail::fold_plan(cmd, dir, k);
        const Table train = table.select_rows(split.train_idx);
        const Table test = table.select_rows(split.test_idx);

        auto synth = make_synthesizer(cmd.model);
        const std::uint64_t fit_seed = detail::mix64(ctx.seed ^ detail::mix64(0xe7a1000ULL + k));
        synth->prepare_fit(plan.config, train, fit_seed);
        for (std::size_t s = 0; s < plan.steps; ++s) {
            if (ctx.cancel && ctx.cancel->load()) throw Error("interrupted");
            if (synth->train_step().early_stop) break;
        }

        for (std::size_t s = 0; s < cmd.n_samples; ++s) {
            const Table sample = synth->sample(train.n_rows(), detail::mix64(fit_seed + s + 1));
            const Table head = detail::head_rows(sample, test.n_rows());
            const std::uint64_t metric_seed = detail::mix64(ctx.seed + 17 * k + s);
            auto add = [&](const std::string& metric, double v) {
                scores.push_back({dataset, cmd.model, k, s, metric, v});
            };
            add("c2st", c2st(test, head, c2st_gbdt_config(), metric_seed));
            if (table.target_index()) {
                try {
                    add("ml_efficacy", ml_efficacy(sample, test, GbdtConfig{}));
                } catch (const MetricError& e) {
                    *ctx.log << "warning: fold " << k << " sample " << s << ": " << e.what() << '\n';
                }
            }
            add("dcr_rate", dcr_rate(head, train, test, metric_seed));
            add("shape", shape_score(test, head));
            try {
                add("pair", pair_score(test, head));
            } catch (const MetricError& e) {
                *ctx.log << "warning: fold " << k << " sample " << s << ": " << e.what() << '\n';
            }
        }
        *ctx.log << "fold " << k << ": scored " << cmd.n_samples << " samples\n";
    }

    detail::ensure_dir(dir);
    std::ofstream out(dir / "scores.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + (dir / "scores.csv").string() + "'");
    write_scores_csv(out, scores);
    return scores;
}

// ----------------------------------------------------------------------------
// report
// ----------------------------------------------------------------------------

struct ReportCommand {
    /// Defaults to <out>/report.
    std::optional<std::filesystem::path> report_dir;
    bool svg = true;
};

namespace detail {

inline std::vector<std::filesystem::path> find_files(const std::filesystem::path& root, const std::string& name) {
    std::vector<std::filesystem::path> out;
    std::error_code ec;
    if (std::filesystem::is_regular_file(root, ec)) return {root};
    if (!std::filesystem::is_directory(root, ec)) throw Error("no such file or directory '" + root.string() + "'");
    for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
         !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec))
        if (it->is_regular_file() && it->path().filename() == name) out.push_back(it->path());
    if (ec) throw Error("cannot scan '" + root.string() + "': " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// Collects every scores.csv and cost.json under the output directory and
/// emits the report.
inline std::vector<std::filesystem::path> cmd_report(const ReportCommand& cmd, const PipelineContext& ctx) {
    const auto report_dir = cmd.report_dir.value_or(ctx.out_dir / "report");
    ScoreTable scores;
    std::size_t n_files = 0;
    for (const auto& p : detail::find_files(ctx.out_dir, "scores.csv")) {
        if (p.parent_path() == report_dir) continue;
        auto part = read_scores_csv(p.string());
        scores.insert(scores.end(), part.begin(), part.end());
        ++n_files;
    }
    if (n_files == 0) throw ReportError("no scores.csv under '" + ctx.out_dir.string() + "' (run evaluate first)");
    std::vector<CostRow> costs;
    for (const auto& p : detail::find_files(ctx.out_dir, "cost.json")) {
        const auto j = detail::read_json_file(p);
        try {
            costs.push_back({j.at("model").get<std::string>(), j.at("dataset").get<std::string>(),
                             TuningCost{j.at("device_seconds").get<double>(), j.at("kwh").get<double>(),
                                        j.at("co2_kg").get<double>()}});
        } catch (const nlohmann::json::exception& e) {
            throw ReportError("malformed '" + p.string() + "': " + e.what());
        }
    }
    ReportOptions opts;
    opts.svg = cmd.svg;
    auto written = emit_report(scores, costs, report_dir, opts);
    *ctx.log << "report: " << scores.size() << " scores from " << n_files << " files, " << written.size()
             << " files written to " << report_dir.string() << '\n';
    return written;
}

// ----------------------------------------------------------------------------
// reduce-space
// ----------------------------------------------------------------------------

struct ReduceCommand {
    std::string space_path;
    /// trials.ndjson files, or directories searched for them.
    std::vector<std::string> logs;
    std::string output;
    ReduceOptions options;
};

inline SearchSpace cmd_reduce_space(const ReduceCommand& cmd, const PipelineContext& ctx) {
    const SearchSpace space = load_search_space(cmd.space_path);
    std::vector<Trial> trials;
    std::size_t n_files = 0;
    for (const auto& root : cmd.logs) {
        for (const auto& p : detail::find_files(root, "trials.ndjson")) {
            auto part = read_trial_log(p.string());
            trials.insert(trials.end(), part.begin(), part.end());
            ++n_files;
        }
    }
    if (trials.empty()) throw TunerError("reduce-space: the given logs contain no trials");
    SearchSpace reduced = reduce_space(trials, space, cmd.options);
    std::ofstream out(cmd.output, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + cmd.output + "'");
    out << format_search_space(reduced);
    if (!out) throw Error("write failed for '" + cmd.output + "'");
    *ctx.log << "reduce-space: " << trials.size() << " trials from " << n_files << " logs, wrote " << cmd.output
             << '\n';
    return reduced;
}

}  // namespace synthbench
