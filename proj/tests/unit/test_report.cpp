#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "support.hpp"

using namespace synthbench;
namespace fs = std::filesystem;

namespace {

ScoreTable full_grid(const std::vector<std::string>& models, const std::string& metric, std::size_t n_datasets,
                     Rng& rng, std::size_t n_samples = 5) {
    ScoreTable t;
    for (std::size_t d = 0; d < n_datasets; ++d)
        for (const auto& m : models)
            for (std::size_t f = 0; f < 3; ++f)
                for (std::size_t s = 0; s < n_samples; ++s)
                    t.push_back({"ds" + std::to_string(d), m, f, s, metric, static_cast<double>(rng.between(0, 20)) / 20.0});
    return t;
}

// Average ranks computed by counting: rank = 1 + #better + #tied / 2.
std::map<std::string, double> oracle_avg_ranks(const ScoreTable& t, const std::string& metric, bool lower_better) {
    std::map<std::pair<std::string, std::size_t>, std::map<std::string, std::vector<double>>> blocks;
    for (const auto& s : t)
        if (s.metric == metric) blocks[{s.dataset, s.fold}][s.model].push_back(s.value);
    std::map<std::string, double> sum;
    for (const auto& [b, per] : blocks) {
        std::map<std::string, double> mean;
        for (const auto& [m, v] : per) {
            double acc = 0;
            for (double x : v) acc += x;
            mean[m] = acc / static_cast<double>(v.size());
        }
        for (const auto& [m, x] : mean) {
            double better = 0, tied = 0;
            for (const auto& [o, y] : mean) {
                if (o == m) continue;
                if (x == y) ++tied;
                else if (lower_better ? y < x : y > x) ++better;
            }
            sum[m] += 1 + better + tied / 2;
        }
    }
    for (auto& [m, s] : sum) s /= static_cast<double>(blocks.size());
    return sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// Aggregation

TEST(Aggregate, IdenticalValues) {
    ScoreTable t;
    for (std::size_t f = 0; f < 3; ++f)
        for (std::size_t s = 0; s < 5; ++s) t.push_back({"adult", "smote", f, s, "c2st", 0.7});
    const auto a = aggregate(t);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_DOUBLE_EQ(a[0].mean, 0.7);
    EXPECT_NEAR(a[0].std, 0.0, 1e-15);
    EXPECT_EQ(a[0].count, 15u);
    EXPECT_TRUE(a[0].complete);
}

TEST(Aggregate, TwoPointPopulationStd) {
    const ScoreTable t{{"d", "m", 0, 0, "shape", 0.6}, {"d", "m", 0, 1, "shape", 0.8}};
    const auto a = aggregate(t);
    EXPECT_DOUBLE_EQ(a[0].mean, 0.7);
    EXPECT_NEAR(a[0].std, 0.1, 1e-15);
    EXPECT_FALSE(a[0].complete);
}

TEST(Aggregate, MissingFoldIncomplete) {
    ScoreTable t;
    for (std::size_t f = 0; f < 2; ++f)
        for (std::size_t s = 0; s < 5; ++s) t.push_back({"d", "m", f, s, "c2st", 0.5});
    EXPECT_FALSE(aggregate(t)[0].complete);
}

TEST(AggregateProperty, MatchesTwoPassOracle) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        ScoreTable t;
        const auto n = rng.between(1, 40);
        for (int i = 0; i < n; ++i)
            t.push_back({"d" + std::to_string(rng.below(2)), "m" + std::to_string(rng.below(3)), rng.below(3), rng.below(5),
                         "c2st", rng.uniform()});
        for (const auto& a : aggregate(t)) {
            std::vector<double> v;
            for (const auto& s : t)
                if (s.dataset == a.dataset && s.model == a.model) v.push_back(s.value);
            long double mean = 0, var = 0;
            for (double x : v) mean += x;
            mean /= v.size();
            for (double x : v) var += (x - mean) * (x - mean);
            var /= v.size();
            ASSERT_EQ(a.count, v.size());
            ASSERT_NEAR(a.mean, static_cast<double>(mean), 1e-12);
            ASSERT_NEAR(a.std, std::sqrt(static_cast<double>(var)), 1e-9);
        }
    }
}

// ---------------------------------------------------------------------------
// Quartiles

TEST(Quartiles, OneToHundred) {
    ScoreTable t;
    for (int i = 1; i <= 100; ++i) t.push_back({"d", "m", 0, 0, "c2st", static_cast<double>(i)});
    const auto q = quartile_summary(t, "c2st");
    ASSERT_EQ(q.size(), 1u);
    EXPECT_DOUBLE_EQ(q[0].p25, 25.75);
    EXPECT_DOUBLE_EQ(q[0].p50, 50.5);
    EXPECT_DOUBLE_EQ(q[0].p75, 75.25);
}

TEST(Quartiles, AllEqual) {
    ScoreTable t;
    for (int i = 0; i < 7; ++i) t.push_back({"d", "m", 0, 0, "c2st", 0.42});
    const auto q = quartile_summary(t, "c2st")[0];
    EXPECT_EQ(q.p25, 0.42);
    EXPECT_EQ(q.p50, 0.42);
    EXPECT_EQ(q.p75, 0.42);
}

TEST(PercentileProperty, MatchesOracleAndMonotone) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::vector<double> v(static_cast<std::size_t>(rng.between(1, 1000)));
        for (auto& x : v) x = rng.normal();
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        double prev = -1e300;
        for (std::size_t num = 0; num <= 40; ++num) {
            const double got = detail::percentile_sorted(sorted, static_cast<double>(num) / 40.0);
            ASSERT_NEAR(got, sbtest::oracle::percentile(v, num, 40), 1e-12) << seed;
            ASSERT_GE(got, prev);
            prev = got;
        }
    }
}

// ---------------------------------------------------------------------------
// Ranks

TEST(Ranks, BetterEverywhere) {
    ScoreTable t;
    for (std::size_t f = 0; f < 3; ++f) {
        t.push_back({"d", "A", f, 0, "c2st", 0.5});
        t.push_back({"d", "B", f, 0, "c2st", 0.9});
    }
    const auto r = rank_models(t, "c2st", Direction::lower_better);
    ASSERT_EQ(r.average_ranks.size(), 2u);
    EXPECT_EQ(r.average_ranks[0], (std::pair<std::string, double>{"A", 1.0}));
    EXPECT_EQ(r.average_ranks[1], (std::pair<std::string, double>{"B", 2.0}));
}

TEST(Ranks, AllTiedShareMiddleRank) {
    const auto r = rank_values({0.3, 0.3, 0.3, 0.3}, Direction::higher_better);
    for (double x : r) EXPECT_DOUBLE_EQ(x, 2.5);
    const auto mixed = rank_values({0.9, 0.5, 0.9, 0.1}, Direction::higher_better);
    EXPECT_EQ(mixed, (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Ranks, CriticalDifferenceSevenModels) {
    const double want = 2.949 * std::sqrt(7.0 * 8.0 / (6.0 * 48.0));
    EXPECT_NEAR(critical_difference(7, 48), want, 1e-12);
    EXPECT_NEAR(critical_difference(7, 48), 1.300, 5e-4);
    EXPECT_TRUE(std::isnan(critical_difference(11, 48)));
}

TEST(Ranks, IncompleteBlockRejected) {
    const ScoreTable t{{"d", "A", 0, 0, "c2st", 0.5}, {"d", "B", 0, 0, "c2st", 0.6}, {"d", "A", 1, 0, "c2st", 0.5}};
    EXPECT_THROW(rank_models(t, "c2st", Direction::lower_better), ReportError);
}

TEST(Ranks, DcrRankedByDistanceToHalf) {
    ScoreTable t{{"d", "copy", 0, 0, "dcr_rate", 1.0}, {"d", "good", 0, 0, "dcr_rate", 0.52},
                 {"d", "odd", 0, 0, "dcr_rate", 0.2}};
    const auto r = rank_models(ranking_values(t), "dcr_rate", metric_direction("dcr_rate"));
    EXPECT_EQ(r.average_ranks[0].first, "good");
    EXPECT_EQ(r.average_ranks[2].first, "copy");
}

TEST(RanksProperty, OracleRankSumsAndFriedman) {
    const std::vector<std::string> models{"a", "b", "c", "d", "e"};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t k = static_cast<std::size_t>(rng.between(2, 5));
        const std::vector<std::string> ms(models.begin(), models.begin() + static_cast<std::ptrdiff_t>(k));
        const bool lower = rng.uniform() < 0.5;
        const auto dir = lower ? Direction::lower_better : Direction::higher_better;
        ScoreTable t = full_grid(ms, "x", static_cast<std::size_t>(rng.between(1, 4)), rng, 1);
        const auto r = rank_models(t, "x", dir);
        const auto want = oracle_avg_ranks(t, "x", lower);
        double total = 0, sum_sq = 0;
        for (const auto& [m, rank] : r.average_ranks) {
            ASSERT_NEAR(rank, want.at(m), 1e-12);
            total += rank;
            sum_sq += rank * rank;
        }
        // Average ranks of every block sum to k(k+1)/2, hence so do their means.
        ASSERT_NEAR(total, k * (k + 1) / 2.0, 1e-9);
        const double kd = static_cast<double>(k), n = static_cast<double>(r.n_blocks);
        ASSERT_NEAR(r.friedman_chi2, 12 * n / (kd * (kd + 1)) * (sum_sq - kd * (kd + 1) * (kd + 1) / 4), 1e-9);

        // Rank-based: a strictly increasing transform of every value changes nothing.
        ScoreTable cubed = t;
        for (auto& s : cubed) s.value = s.value * s.value * s.value;
        const auto rc = rank_models(cubed, "x", dir);
        ASSERT_EQ(rc.friedman_chi2, r.friedman_chi2);
        ASSERT_EQ(rc.average_ranks, r.average_ranks);
    }
}

TEST(RanksProperty, BlockRankSums) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::vector<double> v(static_cast<std::size_t>(rng.between(1, 12)));
        for (auto& x : v) x = static_cast<double>(rng.between(0, 4));
        const auto r = rank_values(v, rng.uniform() < 0.5 ? Direction::lower_better : Direction::higher_better);
        double s = 0;
        for (double x : r) s += x;
        ASSERT_EQ(s, v.size() * (v.size() + 1) / 2.0);
    }
}

// ---------------------------------------------------------------------------
// Emission

TEST(EmitReport, EmptyTableGivesHeaders) {
    sbtest::TempDir dir("report-empty");
    const auto files = emit_report({}, {}, dir.path());
    EXPECT_FALSE(files.empty());
    EXPECT_EQ(sbtest::slurp(dir.path() / "aggregate.csv"), "dataset,model,metric,mean,std,count,complete\n");
    EXPECT_EQ(sbtest::slurp(dir.path() / "quartiles.csv"), "metric,model,p25,p50,p75,count\n");
    EXPECT_EQ(sbtest::slurp(dir.path() / "cost.csv"), "model,dataset,device_seconds,kwh,co2_kg\n");
    EXPECT_EQ(sbtest::slurp(dir.path() / "ranks.csv"), "metric,model,avg_rank\n");
    EXPECT_TRUE(fs::exists(dir.path() / "summary.md"));
}

TEST(EmitReport, EveryModelOncePerTableAndDeterministic) {
    Rng rng(4);
    const std::vector<std::string> models{"gmmtoy", "marginals", "smote", "traincopy"};
    ScoreTable t = full_grid(models, "c2st", 2, rng);
    const ScoreTable more = full_grid(models, "shape", 2, rng);
    t.insert(t.end(), more.begin(), more.end());
    const std::vector<CostRow> costs{{"gmmtoy", "ds0", {12, 0.001, 0.00005}}};
    sbtest::TempDir a("report-a"), b("report-b");
    const auto fa = emit_report(t, costs, a.path());
    ScoreTable shuffled = t;
    rng.shuffle(std::span<ScoreRow>(shuffled));
    const auto fb = emit_report(shuffled, costs, b.path());
    ASSERT_EQ(fa.size(), fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) {
        EXPECT_EQ(fa[i].filename(), fb[i].filename());
        EXPECT_EQ(sbtest::slurp(fa[i]), sbtest::slurp(fb[i])) << fa[i];
    }
    const auto ranks = csv::parse(sbtest::slurp(a.path() / "ranks.csv"));
    for (const std::string metric : {"c2st", "shape"})
        for (const auto& m : models)
            EXPECT_EQ(std::count_if(ranks.begin(), ranks.end(), [&](const auto& r) { return r[0] == metric && r[1] == m; }), 1)
                << metric << " " << m;
    const auto quart = csv::parse(sbtest::slurp(a.path() / "quartiles.csv"));
    for (const auto& m : models)
        EXPECT_EQ(std::count_if(quart.begin(), quart.end(), [&](const auto& r) { return r[0] == "c2st" && r[1] == m; }), 1);
    EXPECT_TRUE(fs::exists(a.path() / "dataset_ds0.csv"));
    EXPECT_TRUE(fs::exists(a.path() / "cd_c2st.svg"));
    const auto summary = sbtest::slurp(a.path() / "summary.md");
    for (const auto& m : models) EXPECT_NE(summary.find("| " + m + " |"), std::string::npos);
}

TEST(ScoresCsv, RoundTripAndErrors) {
    Rng rng(1);
    ScoreTable t = full_grid({"a", "b,c"}, "c2st", 1, rng);
    for (auto& s : t) s.value = rng.normal();
    std::ostringstream out;
    write_scores_csv(out, t);
    const auto back = parse_scores_csv(out.str());
    ASSERT_EQ(back.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(back[i].model, t[i].model);
        EXPECT_EQ(back[i].value, t[i].value);
    }
    EXPECT_THROW(parse_scores_csv("a,b\n1,2\n"), ReportError);
    EXPECT_THROW(parse_scores_csv("dataset,model,fold,sample_index,metric,value\nd,m,x,0,c2st,1\n"), ReportError);
}
