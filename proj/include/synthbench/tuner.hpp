#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cost.hpp"
#include "dataset.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"
#include "learner.hpp"
#include "metrics.hpp"
#include "search_space.hpp"
#include "synthesizer.hpp"

namespace synthbench {

enum class StopReason { completed, early_stop, pruned, time_budget, error };

inline std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::completed: return "completed";
        case StopReason::early_stop: return "early_stop";
        case StopReason::pruned: return "pruned";
        case StopReason::time_budget: return "time_budget";
        case StopReason::error: return "error";
    }
    return "?";
}

inline StopReason parse_stop_reason(std::string_view s) {
    for (auto r : {StopReason::completed, StopReason::early_stop, StopReason::pruned, StopReason::time_budget,
                   StopReason::error})
        if (to_string(r) == s) return r;
    throw TunerError("unknown stop reason '" + std::string(s) + "'");
}

struct StepScore {
    std::size_t step = 0;
    double score = 0.0;

    bool operator==(const StepScore&) const = default;
};

struct Trial {
    std::string dataset;
    std::string model;
    std::size_t fold = 0;
    std::size_t trial_id = 0;
    Config config;
    std::vector<StepScore> step_scores;
    /// Set only for completed and early-stopped trials.
    std::optional<double> final_score;
    StopReason stop_reason = StopReason::completed;
    std::string error;
    CostRecord cost;

    bool finished_normally() const {
        return stop_reason == StopReason::completed || stop_reason == StopReason::early_stop;
    }

    std::optional<double> best_intermediate() const {
        std::optional<double> best;
        for (const auto& s : step_scores)
            if (!best || s.score < *best) best = s.score;
        return best;
    }
};

// ----------------------------------------------------------------------------
// Median elimination
// ----------------------------------------------------------------------------

/// Lowest score among the steps up to and including `step`.
inline std::optional<double> best_so_far(std::span<const StepScore> scores, std::size_t step) {
    std::optional<double> best;
    for (const auto& s : scores)
        if (s.step <= step && (!best || s.score < *best)) best = s.score;
    return best;
}

/// Prune when the trial's latest step s is past the grace period and its
/// best score so far is strictly worse (higher) than the median of the
/// best-so-far scores, at step s, of the peers that reached step s.
/// Fewer than two such peers never prune.
inline bool median_prune_decision(std::span<const StepScore> trial, std::span<const std::vector<StepScore>> peers,
                                  std::size_t grace_steps) {
    if (trial.empty()) return false;
    const std::size_t s = trial.back().step;
    if (s < grace_steps) return false;
    std::vector<double> values;
    for (const auto& p : peers) {
        if (p.empty() || p.back().step < s) continue;
        values.push_back(*best_so_far(p, s));
    }
    if (values.size() < 2) return false;
    return *best_so_far(trial, s) > detail::median(values);
}

inline bool median_prune_decision(const Trial& trial, std::span<const Trial> peers, std::size_t grace_steps) {
    std::vector<std::vector<StepScore>> scores;
    for (const auto& p : peers) scores.push_back(p.step_scores);
    return median_prune_decision(trial.step_scores, scores, grace_steps);
}

/// Shared view of the intermediate scores of every trial in a fold.
class PeerBoard {
public:
    void publish(std::size_t trial_id, const std::vector<StepScore>& scores) {
        std::lock_guard lock(mu_);
        scores_[trial_id] = scores;
    }

    std::vector<std::vector<StepScore>> snapshot(std::size_t exclude_id) const {
        std::lock_guard lock(mu_);
        std::vector<std::vector<StepScore>> out;
        for (const auto& [id, s] : scores_)
            if (id != exclude_id) out.push_back(s);
        return out;
    }

private:
    mutable std::mutex mu_;
    std::map<std::size_t, std::vector<StepScore>> scores_;
};

// ----------------------------------------------------------------------------
// Trial execution
// ----------------------------------------------------------------------------

struct EvalConfig {
    GbdtConfig discriminator = c2st_gbdt_config();
    /// Row cap of the per-step evaluation sample.
    std::size_t eval_cap = 2048;
    bool prune = true;
    const Clock* clock = &steady_clock();
    std::uint64_t seed = 0;
    /// Checked between steps; a set flag ends the trial as an error.
    const std::atomic<bool>* cancel = nullptr;
};

/// One fold's data as seen by the tuner.
struct FoldData {
    std::size_t fold_index = 0;
    Table train;
    Table val;
    /// Stratified validation subsample used for per-step scores.
    Table val_eval;
};

inline FoldData make_fold_data(const Table& table, const FoldSplit& split, const EvalConfig& eval) {
    Table train = table.select_rows(split.train_idx);
    Table val = table.select_rows(split.val_idx);
    const std::size_t n_eval = std::min(val.n_rows(), eval.eval_cap);
    Table val_eval = stratified_subsample(val, n_eval, detail::mix64(eval.seed ^ (split.fold_index + 1)));
    return {split.fold_index, std::move(train), std::move(val), std::move(val_eval)};
}

/// Trial loop: prepare_fit, then train_step / evaluate until the
/// synthesizer stops early, max_steps is reached, the time budget runs out
/// or the pruner fires. Completed trials are scored on the full
/// validation split.
inline Trial run_trial(Synthesizer& synth, const Config& config, const FoldData& fold, const SearchSpace& space,
                       const EvalConfig& eval, std::size_t trial_id = 0, PeerBoard* peers = nullptr) {
    const Clock& clock = *eval.clock;
    Trial t;
    t.fold = fold.fold_index;
    t.trial_id = trial_id;
    t.config = config;
    const std::uint64_t trial_seed = detail::mix64(eval.seed ^ detail::mix64((fold.fold_index << 32) + trial_id));
    const double start = clock.now();
    double step_seconds = 0.0;
    try {
        t.cost.init_seconds = measure([&] { synth.prepare_fit(config, fold.train, trial_seed); }, clock);
        bool done = false;
        while (!done) {
            if (eval.cancel && eval.cancel->load()) throw TunerError("interrupted");
            StepReport rep;
            const double step_time = measure([&] { rep = synth.train_step(); }, clock);
            rep.wall_seconds = step_time;
            step_seconds += step_time;
            ++t.cost.num_steps;
            const std::size_t step = t.cost.num_steps;

            Table sample = fold.val_eval;
            t.cost.sample_seconds += measure(
                [&] { sample = synth.sample(fold.val_eval.n_rows(), detail::mix64(trial_seed + step)); }, clock);
            t.step_scores.push_back({step, c2st(fold.val_eval, sample, eval.discriminator, eval.seed)});
            if (peers) peers->publish(trial_id, t.step_scores);

            if (rep.early_stop) {
                t.stop_reason = StopReason::early_stop;
                done = true;
            } else if (eval.prune && peers &&
                       median_prune_decision(t.step_scores, peers->snapshot(trial_id), space.grace_steps)) {
                t.stop_reason = StopReason::pruned;
                done = true;
            } else if (space.time_budget_s > 0 && clock.now() - start >= space.time_budget_s) {
                t.stop_reason = StopReason::time_budget;
                done = true;
            } else if (space.max_steps > 0 && step >= space.max_steps) {
                t.stop_reason = StopReason::completed;
                done = true;
            }
        }
        if (t.finished_normally()) {
            Table sample = fold.val;
            t.cost.sample_seconds +=
                measure([&] { sample = synth.sample(fold.val.n_rows(), detail::mix64(trial_seed ^ 0xf1a1ULL)); }, clock);
            t.final_score = c2st(fold.val, sample, eval.discriminator, eval.seed);
        }
    } catch (const std::exception& e) {
        t.stop_reason = StopReason::error;
        t.error = e.what();
        t.final_score.reset();
    }
    t.cost.seconds_per_step = t.cost.num_steps ? step_seconds / static_cast<double>(t.cost.num_steps) : 0.0;
    if (peers) peers->publish(trial_id, t.step_scores);
    return t;
}

// ----------------------------------------------------------------------------
// Tuning
// ----------------------------------------------------------------------------

using SynthesizerFactory = std::function<std::unique_ptr<Synthesizer>()>;

struct TuneOptions {
    std::size_t parallelism = 1;
    std::uint64_t seed = 0;
    EvalConfig eval;
    std::string dataset;
    std::string model;
    /// Called once per finished trial, serialized.
    std::function<void(const Trial&)> on_trial;
};

struct FoldBest {
    std::size_t fold = 0;
    std::size_t trial_id = 0;
    Config config;
    double score = 0.0;
    /// false when no trial completed and the best intermediate score was used.
    bool from_final = true;
};

struct TuneResult {
    std::vector<FoldBest> best;
    std::vector<Trial> log;
};

/// Best trial of one fold: lowest final score, ties to the lowest trial id.
/// Without any final score, the lowest intermediate score of a
/// non-error trial is used.
inline std::optional<FoldBest> best_of_fold(std::span<const Trial> trials, std::size_t fold) {
    std::optional<FoldBest> best;
    for (const auto& t : trials) {
        if (t.fold != fold || !t.final_score) continue;
        if (!best || *t.final_score < best->score || (*t.final_score == best->score && t.trial_id < best->trial_id))
            best = FoldBest{fold, t.trial_id, t.config, *t.final_score, true};
    }
    if (best) return best;
    for (const auto& t : trials) {
        if (t.fold != fold || t.stop_reason == StopReason::error) continue;
        auto b = t.best_intermediate();
        if (!b) continue;
        if (!best || *b < best->score || (*b == best->score && t.trial_id < best->trial_id))
            best = FoldBest{fold, t.trial_id, t.config, *b, false};
    }
    return best;
}

inline TuneResult tune(const SynthesizerFactory& factory, const SearchSpace& space, std::span<const FoldData> folds,
                       const TuneOptions& opts) {
    if (opts.parallelism < 1) throw TunerError("parallelism must be >= 1");
    space.validate();
    TuneResult result;
    std::mutex log_mu;
    const std::size_t n_trials = space.trial_count();
    for (const auto& fold : folds) {
        PeerBoard board;
        std::atomic<std::size_t> next{0};
        std::vector<Trial> fold_log;
        auto worker = [&] {
            for (;;) {
                if (opts.eval.cancel && opts.eval.cancel->load()) return;
                const std::size_t id = next.fetch_add(1);
                if (id >= n_trials) return;
                const Config config = trial_config(space, opts.seed, fold.fold_index, id);
                Trial t;
                try {
                    auto synth = factory();
                    t = run_trial(*synth, config, fold, space, opts.eval, id, &board);
                } catch (const std::exception& e) {
                    t.fold = fold.fold_index;
                    t.trial_id = id;
                    t.config = config;
                    t.stop_reason = StopReason::error;
                    t.error = e.what();
                }
                t.dataset = opts.dataset;
                t.model = opts.model;
                std::lock_guard lock(log_mu);
                if (opts.on_trial) opts.on_trial(t);
                fold_log.push_back(std::move(t));
            }
        };
        if (opts.parallelism == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t i = 0; i < opts.parallelism; ++i) pool.emplace_back(worker);
        }
        std::sort(fold_log.begin(), fold_log.end(),
                  [](const Trial& a, const Trial& b) { return a.trial_id < b.trial_id; });
        if (opts.eval.cancel && opts.eval.cancel->load()) {
            result.log.insert(result.log.end(), fold_log.begin(), fold_log.end());
            throw TunerError("tuning interrupted");
        }
        auto best = best_of_fold(fold_log, fold.fold_index);
        if (!best) {
            std::string why = fold_log.empty() ? "no trials ran" : fold_log.front().error;
            throw TunerError("fold " + std::to_string(fold.fold_index) + ": every trial failed (" + why + ")");
        }
        result.best.push_back(std::move(*best));
        result.log.insert(result.log.end(), fold_log.begin(), fold_log.end());
    }
    return result;
}

// ----------------------------------------------------------------------------
// Trial log: one JSON object per line
// ----------------------------------------------------------------------------

inline nlohmann::json config_to_json(const Config& c) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : c) {
        if (auto* i = std::get_if<std::int64_t>(&v))
            j[k] = *i;
        else if (auto* d = std::get_if<double>(&v))
            j[k] = *d;
        else
            j[k] = std::get<std::string>(v);
    }
    return j;
}

inline Config config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw TunerError("config must be a JSON object");
    Config c;
    for (const auto& [k, v] : j.items()) {
        if (v.is_number_integer())
            c[k] = ParamValue{v.get<std::int64_t>()};
        else if (v.is_number_float())
            c[k] = ParamValue{v.get<double>()};
        else if (v.is_string())
            c[k] = ParamValue{v.get<std::string>()};
        else if (v.is_boolean())
            c[k] = ParamValue{std::string(v.get<bool>() ? "True" : "False")};
        else
            throw TunerError("config value '" + k + "' must be a number or a string");
    }
    return c;
}

inline nlohmann::json trial_to_json(const Trial& t) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : t.step_scores) steps.push_back({s.step, s.score});
    nlohmann::json j;
    j["dataset"] = t.dataset;
    j["model"] = t.model;
    j["fold"] = t.fold;
    j["trial_id"] = t.trial_id;
    j["config"] = config_to_json(t.config);
    j["step_scores"] = steps;
    j["final_score"] = t.final_score ? nlohmann::json(*t.final_score) : nlohmann::json(nullptr);
    j["stop_reason"] = std::string(to_string(t.stop_reason));
    j["error"] = t.error;
    j["cost"] = {{"init_seconds", t.cost.init_seconds},
                 {"seconds_per_step", t.cost.seconds_per_step},
                 {"num_steps", t.cost.num_steps},
                 {"sample_seconds", t.cost.sample_seconds}};
    return j;
}

inline Trial trial_from_json(const nlohmann::json& j) {
    try {
        Trial t;
        t.dataset = j.at("dataset").get<std::string>();
        t.model = j.at("model").get<std::string>();
        t.fold = j.at("fold").get<std::size_t>();
        t.trial_id = j.at("trial_id").get<std::size_t>();
        t.config = config_from_json(j.at("config"));
        for (const auto& s : j.at("step_scores")) t.step_scores.push_back({s.at(0).get<std::size_t>(), s.at(1).get<double>()});
        if (!j.at("final_score").is_null()) t.final_score = j.at("final_score").get<double>();
        t.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
        t.error = j.value("error", std::string());
        const auto& c = j.at("cost");
        t.cost.init_seconds = c.at("init_seconds").get<double>();
        t.cost.seconds_per_step = c.at("seconds_per_step").get<double>();
        t.cost.num_steps = c.at("num_steps").get<std::size_t>();
        t.cost.sample_seconds = c.at("sample_seconds").get<double>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw TunerError(std::string("malformed trial record: ") + e.what());
    }
}

inline void write_trial(std::ostream& out, const Trial& t) { out << trial_to_json(t).dump() << '\n'; }

inline std::vector<Trial> read_trial_log(std::istream& in, const std::string& origin = "trial log") {
    std::vector<Trial> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        try {
            out.push_back(trial_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw TunerError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<Trial> read_trial_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TunerError("cannot open trial log '" + path + "'");
    return read_trial_log(in, path);
}

// ----------------------------------------------------------------------------
// Search-space reduction
// ----------------------------------------------------------------------------

enum class SelectionPool { best_per_fold, all_completed };

struct ReduceOptions {
    double keep_mass = 0.8;
    double p_lo = 10.0;
    double p_hi = 90.0;
    SelectionPool pool = SelectionPool::best_per_fold;
};

/// Configurations the reduction learns from: the best finished trial of
/// every (dataset, model, fold), or every finished trial.
inline std::vector<Config> selection_pool(std::span<const Trial> logs, SelectionPool pool) {
    std::vector<Config> out;
    if (pool == SelectionPool::all_completed) {
        for (const auto& t : logs)
            if (t.final_score) out.push_back(t.config);
        return out;
    }
    std::map<std::tuple<std::string, std::string, std::size_t>, const Trial*> best;
    for (const auto& t : logs) {
        if (!t.final_score) continue;
        auto& slot = best[{t.dataset, t.model, t.fold}];
        if (!slot || *t.final_score < *slot->final_score ||
            (*t.final_score == *slot->final_score && t.trial_id < slot->trial_id))
            slot = &t;
    }
    for (const auto& [key, t] : best) out.push_back(t->config);
    return out;
}

/// Keeps the most frequent discrete values up to keep_mass of the
/// selections (values tied with the last kept one stay too), and narrows
/// numeric ranges to the [p_lo, p_hi] nearest-rank percentiles of the
/// selected values.
inline SearchSpace reduce_space(std::span<const Trial> logs, const SearchSpace& space, const ReduceOptions& opts = {}) {
    if (!(opts.keep_mass > 0 && opts.keep_mass <= 1)) throw TunerError("keep_mass must be in (0, 1]");
    if (!(opts.p_lo >= 0 && opts.p_lo <= opts.p_hi && opts.p_hi <= 100)) throw TunerError("need 0 <= p_lo <= p_hi <= 100");
    const auto pool = selection_pool(logs, opts.pool);
    if (pool.empty()) throw TunerError("reduce_space: no finished trial in the logs");

    SearchSpace out = space;
    for (auto& p : out.params) {
        std::vector<ParamValue> selected;
        for (const auto& c : pool)
            if (auto it = c.find(p.name); it != c.end()) selected.push_back(it->second);
        if (selected.empty()) continue;

        if (auto* ch = std::get_if<Choice>(&p.dist)) {
            std::vector<std::pair<std::size_t, ParamValue>> freq;
            for (const auto& v : ch->values) {
                const auto n = static_cast<std::size_t>(std::count_if(
                    selected.begin(), selected.end(), [&](const ParamValue& s) { return param_equal(s, v); }));
                freq.emplace_back(n, v);
            }
            std::stable_sort(freq.begin(), freq.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
            const double total = static_cast<double>(selected.size());
            Choice kept;
            std::size_t cum = 0;
            for (std::size_t i = 0; i < freq.size() && freq[i].first > 0; ++i) {
                const bool reached = static_cast<double>(cum) / total >= opts.keep_mass - 1e-12;
                if (reached && i > 0 && freq[i].first != freq[i - 1].first) break;
                cum += freq[i].first;
                kept.values.push_back(freq[i].second);
            }
            p.dist = std::move(kept);
            continue;
        }

        std::vector<double> values;
        for (const auto& v : selected) values.push_back(as_double(v, p.name));
        std::sort(values.begin(), values.end());
        const double lo = detail::nearest_rank(values, opts.p_lo / 100.0);
        const double hi = detail::nearest_rank(values, opts.p_hi / 100.0);
        if (std::holds_alternative<GridInt>(p.dist)) {
            const auto ilo = static_cast<std::int64_t>(lo);
            const auto ihi = static_cast<std::int64_t>(hi);
            if (ilo < ihi)
                p.dist = GridInt{ilo, ihi};
            else
                p.dist = Choice{{ParamValue{ilo}}};
        } else {
            const double q = std::get<QLogUniform>(p.dist).q;
            if (lo < hi)
                p.dist = QLogUniform{lo, hi, q};
            else
                p.dist = Choice{{ParamValue{lo}}};
        }
    }
    out.exhaust_grid = out.exhaust_grid && std::all_of(out.params.begin(), out.params.end(),
                                                       [](const ParamSpec& p) { return p.is_enumerable(); });
    out.validate();
    return out;
}

}  // namespace synthbench
