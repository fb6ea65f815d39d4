#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synthbench/synthbench.hpp"

#ifndef SYNTHBENCH_SPACES_DIR
#define SYNTHBENCH_SPACES_DIR "spaces"
#endif

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct Common {
    std::string out;
    std::uint64_t seed = 0;
    std::string timing = "on";
};

struct DataFlags {
    std::string csv;
    std::string schema;
    std::string missing = "reject";
    bool stratified = false;
    bool dedup = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out, "Output directory (env SYNTHBENCH_OUT)")->capture_default_str();
    cmd->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
    cmd->add_option("--timing", c.timing, "Wall-clock timing; 'off' makes outputs byte-identical across runs")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
}

void add_data(CLI::App* cmd, DataFlags& d) {
    cmd->add_option("--dataset", d.csv, "Dataset CSV")->required();
    cmd->add_option("--schema", d.schema, "Schema file")->required();
    cmd->add_option("--missing", d.missing, "Missing-value policy")
        ->check(CLI::IsMember({"reject", "impute"}))
        ->capture_default_str();
    cmd->add_flag("--stratified", d.stratified, "Stratify the three folds by class");
    cmd->add_flag("--dedup", d.dedup, "Drop duplicate rows before splitting");
}

synthbench::DataArgs data_args(const DataFlags& d) {
    return {d.csv, d.schema,
            d.missing == "impute" ? synthbench::MissingPolicy::impute_median : synthbench::MissingPolicy::reject,
            d.stratified, d.dedup};
}

synthbench::PipelineContext context(const Common& c) {
    synthbench::PipelineContext ctx;
    ctx.seed = c.seed;
    ctx.out_dir = c.out;
    ctx.timing = c.timing == "on";
    ctx.cancel = &g_interrupted;
    return ctx;
}

std::string default_space(const std::string& dir, const std::string& model) {
    std::string stem = model == "ucsmote" ? "smote" : model;
    if (model.starts_with("bridge:")) throw synthbench::TunerError("bridged models need --space");
    return (std::filesystem::path(dir) / (stem + ".space")).string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmarking and hyperparameter tuning for tabular data synthesizers"};
    app.require_subcommand(1);
    app.allow_extras(false);

    const char* env_out = std::getenv("SYNTHBENCH_OUT");
    Common common;
    common.out = env_out && *env_out ? env_out : "synthbench-out";

    // tune
    auto* tune = app.add_subcommand("tune", "Tune a model on the three folds of a dataset");
    DataFlags tune_data;
    std::string tune_model;
    std::string tune_space;
    std::string spaces_dir = SYNTHBENCH_SPACES_DIR;
    std::optional<std::size_t> tune_trials;
    std::string tune_budget;
    std::optional<std::size_t> tune_steps;
    std::size_t parallelism = 1;
    bool no_prune = false;
    std::size_t eval_cap = 2048;
    add_common(tune, common);
    add_data(tune, tune_data);
    tune->add_option("--model", tune_model, "traincopy, marginals, smote, ucsmote, gmmtoy or bridge:<command>")
        ->required();
    tune->add_option("--space", tune_space, "Search-space file (default: <spaces-dir>/<model>.space)");
    tune->add_option("--spaces-dir", spaces_dir, "Directory of bundled space files")->capture_default_str();
    tune->add_option("--trials", tune_trials, "Trials per fold (overrides the space file)");
    tune->add_option("--budget", tune_budget, "Per-trial time budget such as 90s, 20m, 1.5h");
    tune->add_option("--max-steps", tune_steps, "Training steps per trial (overrides the space file)");
    tune->add_option("--parallelism", parallelism, "Concurrent trials")->capture_default_str();
    tune->add_flag("--no-prune", no_prune, "Disable median pruning");
    tune->add_option("--eval-cap", eval_cap, "Row cap of the per-step validation subsample")->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score tuned (or default) models on the test folds");
    DataFlags eval_data;
    std::string eval_model;
    std::string eval_config;
    bool eval_default = false;
    std::size_t eval_samples = 5;
    std::size_t eval_steps = 100;
    add_common(evaluate, common);
    add_data(evaluate, eval_data);
    evaluate->add_option("--model", eval_model, "Model registry name")->required();
    auto* cfg_opt = evaluate->add_option("--config", eval_config, "JSON configuration to evaluate instead of the tuned one");
    evaluate->add_flag("--default-config", eval_default, "Evaluate the model's defaults")->excludes(cfg_opt);
    evaluate->add_option("--samples", eval_samples, "Synthetic samples per fold")->capture_default_str();
    evaluate->add_option("--max-steps", eval_steps, "Training steps for untuned configurations")->capture_default_str();

    // report
    auto* report = app.add_subcommand("report", "Aggregate every scores.csv under --out into a report");
    std::string report_dir;
    bool no_svg = false;
    add_common(report, common);
    report->add_option("--report-dir", report_dir, "Report directory (default: <out>/report)");
    report->add_flag("--no-svg", no_svg, "Skip the critical-difference diagrams");

    // reduce-space
    auto* reduce = app.add_subcommand("reduce-space", "Shrink a search space to the values chosen by tuned trials");
    synthbench::ReduceCommand reduce_cmd;
    std::string pool = "best";
    add_common(reduce, common);
    reduce->add_option("--space", reduce_cmd.space_path, "Search space to reduce")->required();
    reduce->add_option("--logs", reduce_cmd.logs, "trials.ndjson files or directories holding them")->required();
    reduce->add_option("--output", reduce_cmd.output, "Reduced space file")->required();
    reduce->add_option("--keep-mass", reduce_cmd.options.keep_mass, "Share of selections kept for discrete values")
        ->capture_default_str();
    reduce->add_option("--p-lo", reduce_cmd.options.p_lo, "Lower percentile for numeric bounds")->capture_default_str();
    reduce->add_option("--p-hi", reduce_cmd.options.p_hi, "Upper percentile for numeric bounds")->capture_default_str();
    reduce->add_option("--pool", pool, "best: best trial per fold; all: every finished trial")
        ->check(CLI::IsMember({"best", "all"}))
        ->capture_default_str();

    // make-moons
    auto* moons = app.add_subcommand("make-moons", "Write a Two-Moons dataset and its schema");
    std::size_t moons_n = 2000;
    double moons_noise = 0.1;
    std::string moons_out;
    std::string moons_name = "moons";
    moons->add_option("--n", moons_n, "Rows")->capture_default_str();
    moons->add_option("--noise", moons_noise, "Gaussian noise std")->capture_default_str();
    moons->add_option("--seed", common.seed, "Seed")->capture_default_str();
    moons->add_option("--name", moons_name, "Dataset name")->capture_default_str();
    moons->add_option("--output", moons_out, "CSV path; the schema goes next to it with a .schema extension")
        ->required();

    // bridge-check
    auto* bridge = app.add_subcommand("bridge-check", "Run the bridge protocol conformance checks against a command");
    std::string bridge_cmd;
    std::string bridge_timeout = "60s";
    bridge->add_option("--command", bridge_cmd, "Shell command starting the model process")->required();
    bridge->add_option("--timeout", bridge_timeout, "Per-response timeout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    std::signal(SIGINT, on_sigint);
    try {
        if (*tune) {
            synthbench::TuneCommand cmd;
            cmd.data = data_args(tune_data);
            cmd.model = tune_model;
            cmd.space_path = tune_space.empty() ? default_space(spaces_dir, tune_model) : tune_space;
            cmd.trials = tune_trials;
            if (!tune_budget.empty()) cmd.budget_s = synthbench::parse_duration(tune_budget);
            cmd.max_steps = tune_steps;
            cmd.parallelism = parallelism;
            cmd.prune = !no_prune;
            cmd.eval_cap = eval_cap;
            synthbench::cmd_tune(cmd, context(common));
        } else if (*evaluate) {
            synthbench::EvaluateCommand cmd;
            cmd.data = data_args(eval_data);
            cmd.model = eval_model;
            if (!eval_config.empty()) cmd.config_path = eval_config;
            cmd.default_config = eval_default;
            cmd.n_samples = eval_samples;
            cmd.max_steps = eval_steps;
            synthbench::cmd_evaluate(cmd, context(common));
        } else if (*report) {
            synthbench::ReportCommand cmd;
            if (!report_dir.empty()) cmd.report_dir = report_dir;
            cmd.svg = !no_svg;
            synthbench::cmd_report(cmd, context(common));
        } else if (*reduce) {
            reduce_cmd.options.pool =
                pool == "all" ? synthbench::SelectionPool::all_completed : synthbench::SelectionPool::best_per_fold;
            synthbench::cmd_reduce_space(reduce_cmd, context(common));
        } else if (*moons) {
            const auto table = synthbench::make_moons(moons_n, moons_noise, common.seed, moons_name);
            std::filesystem::path csv = moons_out;
            synthbench::write_csv(csv.string(), table);
            synthbench::write_schema(std::filesystem::path(csv).replace_extension(".schema").string(), table.schema());
            std::cout << "wrote " << table.n_rows() << " rows to " << csv.string() << '\n';
        } else if (*bridge) {
            const auto timeout = std::chrono::milliseconds(
                static_cast<long long>(synthbench::parse_duration(bridge_timeout) * 1000.0));
            bool ok = true;
            for (const auto& c : synthbench::run_conformance(bridge_cmd, timeout)) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
                if (!c.passed) std::cout << ": " << c.detail;
                std::cout << '\n';
                ok = ok && c.passed;
            }
            return ok ? 0 : 1;
        }
    } catch (const synthbench::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    if (g_interrupted.load()) {
        std::cerr << "interrupted\n";
        return 1;
    }
    return 0;
}
