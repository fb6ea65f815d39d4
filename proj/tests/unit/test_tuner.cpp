#include <gtest/gtest.h>

#include <chrono>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "support.hpp"

using namespace synthbench;

namespace {

std::vector<StepScore> steps(std::initializer_list<double> scores) {
    std::vector<StepScore> out;
    std::size_t i = 0;
    for (double s : scores) out.push_back({++i, s});
    return out;
}

// Train copies whose numeric columns drift by `shift / step`: worse early,
// better with training. Never stops early by itself.
class Drifting final : public Synthesizer {
public:
    explicit Drifting(std::chrono::milliseconds step_sleep = {}) : sleep_(step_sleep) {}

    void prepare_fit(const Config& config, const Table& train, std::uint64_t seed) override {
        train_ = std::make_unique<Table>(train);
        shift_ = config_double(config, "shift", 0.0);
        seed_ = seed;
        step_ = 0;
        if (config_string(config, "fail", "no") == "yes") throw GeneratorError("scripted failure");
    }

    StepReport train_step() override {
        if (sleep_.count() > 0) std::this_thread::sleep_for(sleep_);
        ++step_;
        return {step_, false, 0.0};
    }

    Table sample(std::size_t n, std::uint64_t seed) override {
        Table t = traincopy_sample(*train_, n, detail::mix64(seed ^ seed_));
        std::vector<double> cells(t.n_rows() * t.n_cols());
        for (std::size_t r = 0; r < t.n_rows(); ++r)
            for (std::size_t c = 0; c < t.n_cols(); ++c)
                cells[r * t.n_cols() + c] = t.at(r, c) + (t.is_numeric(c) ? shift_ / static_cast<double>(step_) : 0.0);
        return t.with_cells(std::move(cells));
    }

    std::string name() const override { return "drifting"; }

private:
    std::chrono::milliseconds sleep_;
    std::unique_ptr<Table> train_;
    double shift_ = 0.0;
    std::uint64_t seed_ = 0;
    std::size_t step_ = 0;
};

FoldData small_fold(std::size_t n = 600, std::uint64_t seed = 1) {
    const Table t = make_moons(n, 0.1, seed);
    EvalConfig eval;
    return make_fold_data(t, make_folds(t, seed, false)[0], eval);
}

Trial make_trial(std::string dataset, std::size_t fold, std::size_t id, Config config, std::optional<double> final_score) {
    Trial t;
    t.dataset = std::move(dataset);
    t.model = "m";
    t.fold = fold;
    t.trial_id = id;
    t.config = std::move(config);
    t.final_score = final_score;
    t.stop_reason = final_score ? StopReason::completed : StopReason::pruned;
    t.step_scores = {{1, final_score.value_or(0.9)}};
    return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Median elimination

TEST(MedianPrune, SingleTrialNeverPruned) {
    const auto t = steps({0.99, 0.99, 0.99, 0.99, 0.99, 0.99});
    EXPECT_FALSE(median_prune_decision(t, std::span<const std::vector<StepScore>>{}, 0));
}

TEST(MedianPrune, WorseThanPeerMedianIsPruned) {
    const auto t = steps({0.95, 0.95, 0.95, 0.95, 0.95});
    const std::vector<std::vector<StepScore>> peers{steps({0.9, 0.8, 0.7, 0.6, 0.6}), steps({0.7, 0.7, 0.7, 0.7, 0.7}),
                                                    steps({0.95, 0.9, 0.85, 0.8, 0.8})};
    EXPECT_TRUE(median_prune_decision(t, peers, 5));
}

TEST(MedianPrune, TieWithMedianNotPruned) {
    const auto t = steps({0.9, 0.8, 0.75, 0.72, 0.70});
    const std::vector<std::vector<StepScore>> peers{steps({0.6, 0.6, 0.6, 0.6, 0.6}), steps({0.7, 0.7, 0.7, 0.7, 0.7}),
                                                    steps({0.8, 0.8, 0.8, 0.8, 0.8})};
    EXPECT_FALSE(median_prune_decision(t, peers, 5));
}

TEST(MedianPrune, GracePeriodAndShallowPeers) {
    const auto t = steps({0.99, 0.99, 0.99});
    const std::vector<std::vector<StepScore>> deep{steps({0.5, 0.5, 0.5}), steps({0.5, 0.5, 0.5})};
    EXPECT_FALSE(median_prune_decision(t, deep, 4));
    EXPECT_TRUE(median_prune_decision(t, deep, 3));
    // Peers that have not reached step 3 are not comparable.
    const std::vector<std::vector<StepScore>> shallow{steps({0.5, 0.5}), steps({0.5}), steps({0.5, 0.5, 0.5})};
    EXPECT_FALSE(median_prune_decision(t, shallow, 1));
}

TEST(MedianPrune, UsesBestSoFarAtTheTrialStep) {
    // The peer's later improvement (step 5) must not count against a trial at step 3.
    const auto t = steps({0.8, 0.75, 0.7});
    const std::vector<std::vector<StepScore>> peers{steps({0.72, 0.72, 0.72, 0.72, 0.1}),
                                                    steps({0.6, 0.9, 0.9, 0.9, 0.1})};
    // Best-so-far at step 3: 0.72 and 0.6, median 0.66 < 0.7.
    EXPECT_TRUE(median_prune_decision(t, peers, 1));
    const std::vector<std::vector<StepScore>> peers2{steps({0.72, 0.72, 0.72}), steps({0.9, 0.9, 0.9})};
    EXPECT_FALSE(median_prune_decision(t, peers2, 1));
}

// Independent oracle for the decision rule on random histories.
TEST(MedianPruneProperty, MatchesOracleAndRespectsGrace) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        auto history = [&](std::size_t len) {
            std::vector<StepScore> h;
            for (std::size_t i = 1; i <= len; ++i) h.push_back({i, static_cast<double>(rng.between(0, 10)) / 10.0});
            return h;
        };
        const auto t = history(static_cast<std::size_t>(rng.between(1, 10)));
        std::vector<std::vector<StepScore>> peers;
        const auto n_peers = rng.between(0, 6);
        for (int i = 0; i < n_peers; ++i) peers.push_back(history(static_cast<std::size_t>(rng.between(1, 10))));
        const auto grace = static_cast<std::size_t>(rng.between(0, 8));

        const std::size_t s = t.size();
        std::vector<double> vals;
        for (const auto& p : peers) {
            if (p.size() < s) continue;
            double b = 1e9;
            for (std::size_t i = 0; i < s; ++i) b = std::min(b, p[i].score);
            vals.push_back(b);
        }
        double mine = 1e9;
        for (const auto& x : t) mine = std::min(mine, x.score);
        bool want = false;
        if (s >= grace && vals.size() >= 2) want = mine > sbtest::oracle::percentile(vals, 1, 2);
        ASSERT_EQ(median_prune_decision(t, peers, grace), want) << "seed " << seed;
        if (s < grace) {
            ASSERT_FALSE(median_prune_decision(t, peers, grace));
        }
    }
}

// ---------------------------------------------------------------------------
// Trial execution

TEST(RunTrial, MaxStepsOne) {
    const auto fold = small_fold();
    SearchSpace space;
    space.max_steps = 1;
    Drifting synth;
    EvalConfig eval;
    const Trial t = run_trial(synth, {{"shift", ParamValue{0.0}}}, fold, space, eval);
    EXPECT_EQ(t.cost.num_steps, 1u);
    ASSERT_EQ(t.step_scores.size(), 1u);
    EXPECT_EQ(t.step_scores[0].step, 1u);
    EXPECT_EQ(t.stop_reason, StopReason::completed);
    ASSERT_TRUE(t.final_score.has_value());
}

TEST(RunTrial, TimeBudgetStopsSlowSynthesizer) {
    const auto fold = small_fold();
    SearchSpace space;
    space.time_budget_s = 0.001;
    space.max_steps = 1000;
    Drifting synth(std::chrono::milliseconds(5));
    EvalConfig eval;
    const Trial t = run_trial(synth, {}, fold, space, eval);
    EXPECT_EQ(t.stop_reason, StopReason::time_budget);
    EXPECT_EQ(t.cost.num_steps, 1u);
    EXPECT_FALSE(t.final_score.has_value());
    EXPECT_GE(t.cost.seconds_per_step, 0.005);
}

TEST(RunTrial, EarlyStopGetsFinalScore) {
    const auto fold = small_fold();
    SearchSpace space;
    auto synth = make_synthesizer("traincopy");
    EvalConfig eval;
    const Trial t = run_trial(*synth, {}, fold, space, eval);
    EXPECT_EQ(t.stop_reason, StopReason::early_stop);
    ASSERT_TRUE(t.final_score.has_value());
    EXPECT_NEAR(*t.final_score, 0.5, 0.08);
}

TEST(RunTrial, SynthesizerErrorIsRecorded) {
    const auto fold = small_fold();
    SearchSpace space;
    space.max_steps = 3;
    Drifting synth;
    EvalConfig eval;
    const Trial t = run_trial(synth, {{"fail", ParamValue{std::string("yes")}}}, fold, space, eval);
    EXPECT_EQ(t.stop_reason, StopReason::error);
    EXPECT_NE(t.error.find("scripted failure"), std::string::npos);
    EXPECT_FALSE(t.final_score.has_value());
}

TEST(RunTrial, EvalSubsampleCapped) {
    const Table t = make_moons(15000, 0.1, 3);
    EvalConfig eval;
    const auto fold = make_fold_data(t, make_folds(t, 3, false)[0], eval);
    EXPECT_GT(fold.val.n_rows(), 2048u);
    EXPECT_EQ(fold.val_eval.n_rows(), 2048u);
}

TEST(RunTrial, NullClockRecordsZeroCost) {
    const auto fold = small_fold();
    SearchSpace space;
    space.max_steps = 2;
    Drifting synth(std::chrono::milliseconds(2));
    EvalConfig eval;
    eval.clock = &null_clock();
    const Trial t = run_trial(synth, {}, fold, space, eval);
    EXPECT_EQ(t.cost.init_seconds, 0.0);
    EXPECT_EQ(t.cost.seconds_per_step, 0.0);
    EXPECT_EQ(t.cost.sample_seconds, 0.0);
    EXPECT_EQ(t.cost.num_steps, 2u);
}

// ---------------------------------------------------------------------------
// Tuning

TEST(Tune, SingleTrialIsBest) {
    const auto fold = small_fold();
    SearchSpace space = parse_search_space("max_trials 1\nmax_steps 2\nparam \"shift\" choice 0.25 0.5 1.0\n");
    TuneOptions opts;
    opts.seed = 4;
    const auto r = tune([] { return std::make_unique<Drifting>(); }, space, std::span(&fold, 1), opts);
    ASSERT_EQ(r.log.size(), 1u);
    ASSERT_EQ(r.best.size(), 1u);
    EXPECT_TRUE(param_equal(r.best[0].config.at("shift"), r.log[0].config.at("shift")));
    EXPECT_TRUE(param_equal(r.log[0].config.at("shift"), trial_config(space, 4, fold.fold_index, 0).at("shift")));
}

TEST(Tune, SmoteGridRunsNineteenTrials) {
    const Table t = sbtest::adult_like(600, 2);
    EvalConfig eval;
    const auto fold = make_fold_data(t, make_folds(t, 2, false)[0], eval);
    const auto space = load_search_space(std::string(SYNTHBENCH_SPACES_DIR) + "/smote.space");
    TuneOptions opts;
    const auto r = tune([] { return make_synthesizer("smote"); }, space, std::span(&fold, 1), opts);
    ASSERT_EQ(r.log.size(), 19u);
    std::set<std::int64_t> ks;
    for (const auto& tr : r.log) ks.insert(std::get<std::int64_t>(tr.config.at("k_neighbors")));
    EXPECT_EQ(ks.size(), 19u);
}

TEST(Tune, BestIsLowestFinalScore) {
    const auto fold = small_fold();
    SearchSpace space = parse_search_space("max_trials 6\nmax_steps 2\nparam \"shift\" choice 0.0 0.5 2.0\n");
    TuneOptions opts;
    opts.eval.prune = false;
    const auto r = tune([] { return std::make_unique<Drifting>(); }, space, std::span(&fold, 1), opts);
    double lowest = 1e9;
    for (const auto& t : r.log) lowest = std::min(lowest, t.final_score.value());
    EXPECT_EQ(r.best[0].score, lowest);
    EXPECT_TRUE(r.best[0].from_final);
}

TEST(Tune, AllTrialsFailingIsAnError) {
    const auto fold = small_fold();
    SearchSpace space = parse_search_space("max_trials 2\nmax_steps 2\nparam \"fail\" choice \"yes\"\n");
    TuneOptions opts;
    EXPECT_THROW(tune([] { return std::make_unique<Drifting>(); }, space, std::span(&fold, 1), opts), TunerError);
    opts.parallelism = 0;
    EXPECT_THROW(tune([] { return std::make_unique<Drifting>(); }, space, std::span(&fold, 1), opts), TunerError);
}

TEST(Tune, PruningOnlyRemovesWork) {
    const Table t = make_moons(1000, 0.1, 5);
    EvalConfig eval;
    const auto fold = make_fold_data(t, make_folds(t, 5, false)[0], eval);
    SearchSpace space = parse_search_space(
        "max_trials 8\nmax_steps 8\ngrace_steps 2\nparam \"n_components\" grid 1 8\n"
        "param \"reg_covar\" qloguniform 1e-6 1e-2 1e-6\nparam \"encoder\" choice \"minmax\" \"quantile\"\n");
    auto count_steps = [&](bool prune) {
        TuneOptions opts;
        opts.seed = 9;
        opts.eval.prune = prune;
        const auto r = tune([] { return make_synthesizer("gmmtoy"); }, space, std::span(&fold, 1), opts);
        std::size_t total = 0;
        for (const auto& tr : r.log) total += tr.cost.num_steps;
        return std::pair{total, r};
    };
    const auto [with, rw] = count_steps(true);
    const auto [without, rwo] = count_steps(false);
    EXPECT_GE(without, with);
    // Same configurations either way.
    ASSERT_EQ(rw.log.size(), rwo.log.size());
    for (std::size_t i = 0; i < rw.log.size(); ++i)
        for (const auto& [k, v] : rw.log[i].config) EXPECT_TRUE(param_equal(v, rwo.log[i].config.at(k)));
    // Replaying the unpruned log: the selected trial is at least as good as every completed one.
    for (const auto& tr : rwo.log)
        if (tr.final_score) {
            EXPECT_LE(rwo.best[0].score, *tr.final_score);
        }
}

TEST(Tune, PrunedTrialsStopAfterGrace) {
    const auto fold = small_fold(800, 6);
    SearchSpace space =
        parse_search_space("max_trials 10\nmax_steps 12\ngrace_steps 3\nparam \"shift\" choice 0.0 0.05 3.0 6.0\n");
    TuneOptions opts;
    opts.seed = 2;
    const auto r = tune([] { return std::make_unique<Drifting>(); }, space, std::span(&fold, 1), opts);
    std::size_t pruned = 0;
    for (const auto& t : r.log) {
        if (t.stop_reason != StopReason::pruned) continue;
        ++pruned;
        EXPECT_GE(t.step_scores.back().step, 3u);
        EXPECT_FALSE(t.final_score.has_value());
    }
    EXPECT_GT(pruned, 0u);
}

TEST(Tune, ParallelRunsTheSameConfigs) {
    const auto fold = small_fold();
    SearchSpace space = parse_search_space("max_trials 6\nmax_steps 2\nparam \"shift\" choice 0.0 0.5 2.0\n");
    TuneOptions opts;
    opts.seed = 8;
    opts.eval.prune = false;
    const auto a = tune([] { return std::make_unique<Drifting>(); }, space, std::span(&fold, 1), opts);
    opts.parallelism = 3;
    const auto b = tune([] { return std::make_unique<Drifting>(); }, space, std::span(&fold, 1), opts);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        EXPECT_EQ(a.log[i].trial_id, b.log[i].trial_id);
        EXPECT_EQ(a.log[i].final_score, b.log[i].final_score);
    }
}

// ---------------------------------------------------------------------------
// Trial log

TEST(TrialLogProperty, JsonRoundTrip) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::vector<Trial> trials(static_cast<std::size_t>(rng.between(1, 5)));
        for (auto& t : trials) {
            t.dataset = "d" + std::to_string(rng.below(3));
            t.model = rng.uniform() < 0.5 ? "gmmtoy" : "bridge:python \"x\".py";
            t.fold = rng.below(5);
            t.trial_id = rng.below(300);
            t.config["lr"] = ParamValue{rng.uniform(1e-6, 1e-2)};
            t.config["k"] = ParamValue{rng.between(-100, 100)};
            t.config["enc"] = ParamValue{std::string("PLE_CDF,\"q\"")};
            const auto n = rng.between(0, 6);
            for (int i = 1; i <= n; ++i) t.step_scores.push_back({static_cast<std::size_t>(i), rng.uniform()});
            t.stop_reason = static_cast<StopReason>(rng.below(5));
            if (t.finished_normally()) t.final_score = rng.uniform();
            if (t.stop_reason == StopReason::error) t.error = "boom\nline two";
            t.cost = {rng.uniform(0, 100), rng.uniform(0, 3), rng.below(1000), rng.uniform()};
        }
        std::stringstream buf;
        for (const auto& t : trials) write_trial(buf, t);
        const auto back = read_trial_log(buf);
        ASSERT_EQ(back.size(), trials.size());
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const auto &a = trials[i], &b = back[i];
            ASSERT_EQ(trial_to_json(a).dump(), trial_to_json(b).dump());
            ASSERT_EQ(a.step_scores, b.step_scores);
            ASSERT_EQ(a.final_score, b.final_score);
            ASSERT_EQ(a.cost.init_seconds, b.cost.init_seconds);
            ASSERT_EQ(std::get<double>(a.config.at("lr")), std::get<double>(b.config.at("lr")));
            ASSERT_EQ(std::get<std::int64_t>(a.config.at("k")), std::get<std::int64_t>(b.config.at("k")));
        }
    }
}

TEST(TrialLog, MalformedLineNamesLocation) {
    std::stringstream buf("\n{\"dataset\": 1}\n");
    try {
        read_trial_log(buf, "log.jsonl");
        FAIL();
    } catch (const TunerError& e) {
        EXPECT_NE(std::string(e.what()).find("log.jsonl:2"), std::string::npos);
    }
}

// ---------------------------------------------------------------------------
// Space reduction

TEST(ReduceSpace, KeepsMinimalFrequentPrefix) {
    const auto space = parse_search_space("param \"e\" choice \"A\" \"B\" \"C\" \"D\"\n");
    std::vector<Trial> logs;
    const std::vector<std::pair<std::string, int>> freq{{"A", 12}, {"B", 5}, {"C", 2}, {"D", 1}};
    std::size_t fold = 0;
    for (const auto& [v, n] : freq)
        for (int i = 0; i < n; ++i) logs.push_back(make_trial("ds", fold++, 0, {{"e", ParamValue{v}}}, 0.5));
    const auto r = reduce_space(logs, space);
    const auto& kept = std::get<Choice>(r.params[0].dist).values;
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(std::get<std::string>(kept[0]), "A");
    EXPECT_EQ(std::get<std::string>(kept[1]), "B");
}

TEST(ReduceSpace, TiedFrequenciesAllKept) {
    const auto space = parse_search_space("param \"e\" choice \"A\" \"B\" \"C\"\n");
    std::vector<Trial> logs;
    for (std::size_t i = 0; i < 6; ++i) logs.push_back(make_trial("ds", i, 0, {{"e", ParamValue{std::string(1, char('A' + i % 3))}}}, 0.5));
    const auto r = reduce_space(logs, space);
    EXPECT_EQ(std::get<Choice>(r.params[0].dist).values.size(), 3u);
}

TEST(ReduceSpace, LogSpacedRatesGiveOrderStatistics) {
    const auto space = parse_search_space("param \"lr\" qloguniform 1e-4 1e-2 1e-6\n");
    std::vector<double> lr;
    for (int i = 0; i < 20; ++i) lr.push_back(std::round(1e-4 * std::pow(100.0, i / 19.0) / 1e-6) * 1e-6);
    std::vector<Trial> logs;
    for (std::size_t i = 0; i < lr.size(); ++i) logs.push_back(make_trial("ds", i, 0, {{"lr", ParamValue{lr[19 - i]}}}, 0.5));
    const auto r = reduce_space(logs, space);
    const auto& q = std::get<QLogUniform>(r.params[0].dist);
    EXPECT_EQ(q.lo, lr[1]);
    EXPECT_EQ(q.hi, lr[17]);
    EXPECT_EQ(q.q, 1e-6);
}

TEST(ReduceSpace, EncoderSelection) {
    const auto space =
        parse_search_space("param \"numerical_encoder\" choice \"CDF\" \"PLE_CDF\" \"PTP\" \"MinMaxScaler\"\n");
    std::vector<Trial> logs;
    const std::vector<std::pair<std::string, int>> freq{{"CDF", 11}, {"PLE_CDF", 6}, {"PTP", 2}, {"MinMaxScaler", 1}};
    std::size_t fold = 0;
    for (const auto& [v, n] : freq)
        for (int i = 0; i < n; ++i) {
            // A worse trial in the same fold must not enter the best-per-fold pool.
            logs.push_back(make_trial("ds", fold, 0, {{"numerical_encoder", ParamValue{v}}}, 0.5));
            logs.push_back(make_trial("ds", fold, 1, {{"numerical_encoder", ParamValue{std::string("PTP")}}}, 0.7));
            ++fold;
        }
    const auto r = reduce_space(logs, space);
    const auto& kept = std::get<Choice>(r.params[0].dist).values;
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(std::get<std::string>(kept[0]), "CDF");
    EXPECT_EQ(std::get<std::string>(kept[1]), "PLE_CDF");
}

TEST(ReduceSpace, GridAndErrors) {
    const auto space = parse_search_space("param \"k\" grid 2 20\n");
    std::vector<Trial> logs;
    for (std::size_t i = 0; i < 10; ++i) logs.push_back(make_trial("ds", i, 0, {{"k", ParamValue{std::int64_t(i + 3)}}}, 0.5));
    const auto r = reduce_space(logs, space);
    const auto& g = std::get<GridInt>(r.params[0].dist);
    EXPECT_EQ(g.lo, 3);
    EXPECT_EQ(g.hi, 11);
    const std::vector<Trial> none{make_trial("ds", 0, 0, {{"k", ParamValue{std::int64_t(3)}}}, std::nullopt)};
    EXPECT_THROW(reduce_space(none, space), TunerError);
}

TEST(ReduceSpaceProperty, OutputIsSubspace) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        SearchSpace space = parse_search_space(
            "param \"lr\" qloguniform 1e-5 1e-2 1e-5\nparam \"k\" grid 1 30\n"
            "param \"e\" choice \"CDF\" \"PLE_CDF\" \"PTP\" 7 0.5\n");
        std::vector<Trial> logs;
        const auto n = rng.between(1, 40);
        for (int i = 0; i < n; ++i) {
            Rng trng = rng.split(static_cast<std::uint64_t>(i));
            logs.push_back(make_trial("d" + std::to_string(rng.below(3)), rng.below(4), static_cast<std::size_t>(i),
                                      sample_config(space, trng), rng.uniform() < 0.8 ? std::optional(rng.uniform()) : std::nullopt));
        }
        if (std::none_of(logs.begin(), logs.end(), [](const Trial& t) { return t.final_score.has_value(); })) continue;
        ReduceOptions opts;
        opts.pool = rng.uniform() < 0.5 ? SelectionPool::best_per_fold : SelectionPool::all_completed;
        opts.keep_mass = rng.uniform(0.1, 1.0);
        const auto r = reduce_space(logs, space, opts);
        for (std::size_t t = 0; t < 30; ++t) ASSERT_TRUE(space.contains(trial_config(r, seed, 0, t))) << "seed " << seed;
        // Every pooled value inside the reduced bounds is still reachable.
        for (const auto& c : selection_pool(logs, opts.pool)) {
            const double x = as_double(c.at("lr"), "lr");
            const auto& p = *r.find("lr");
            auto* q = std::get_if<QLogUniform>(&p.dist);
            if (q && x >= q->lo && x <= q->hi) {
                ASSERT_TRUE(p.contains(c.at("lr")));
            }
        }
    }
}
