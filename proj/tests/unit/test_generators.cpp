#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "support.hpp"

using namespace synthbench;

namespace {

std::set<std::vector<double>> row_set(const Table& t) {
    std::set<std::vector<double>> s;
    for (std::size_t r = 0; r < t.n_rows(); ++r) s.emplace(t.row(r).begin(), t.row(r).end());
    return s;
}

bool same_cells(const Table& a, const Table& b) {
    return a.n_rows() == b.n_rows() && std::equal(a.cells().begin(), a.cells().end(), b.cells().begin());
}

Table one_column_classes(const std::vector<double>& x, const std::vector<double>& y) {
    Schema schema;
    schema.dataset_name = "toy";
    schema.task = TaskKind::binclass;
    schema.columns = {{"x", ColumnKind::numeric, false}, {"y", ColumnKind::categorical, true}};
    std::vector<double> cells;
    for (std::size_t i = 0; i < x.size(); ++i) cells.insert(cells.end(), {x[i], y[i]});
    return Table(schema, Table::Vocabularies{{}, {"a", "b"}}, cells);
}

Table standard_normal_pair(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Schema schema;
    schema.dataset_name = "normal";
    schema.task = TaskKind::regression;
    schema.columns = {{"u", ColumnKind::numeric, false}, {"v", ColumnKind::numeric, false}};
    std::vector<double> cells(2 * n);
    for (double& c : cells) c = rng.normal();
    return Table(schema, Table::Vocabularies(2), cells);
}

std::unique_ptr<Synthesizer> fitted(const std::string& name, const Table& train, const Config& cfg = {},
                                    std::size_t max_steps = 200) {
    auto s = make_synthesizer(name);
    s->prepare_fit(cfg, train, 1);
    for (std::size_t i = 0; i < max_steps; ++i)
        if (s->train_step().early_stop) break;
    return s;
}

}  // namespace

TEST(TrainCopy, RowsAreMembersOfTrain) {
    const Table train = sbtest::adult_like(300, 1);
    const auto members = row_set(train);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Table s = traincopy_sample(train, train.n_rows(), seed);
        EXPECT_EQ(s.n_rows(), train.n_rows());
        EXPECT_EQ(sbtest::sorted_rows(s), sbtest::sorted_rows(train));
        for (std::size_t r = 0; r < s.n_rows(); ++r)
            EXPECT_TRUE(members.count({s.row(r).begin(), s.row(r).end()}));
    }
    EXPECT_THROW(traincopy_sample(train, 0, 0), GeneratorError);
}

TEST(TrainCopy, DownstreamDcrAndC2st) {
    const Table all = deduplicate_rows(sbtest::adult_like(4400, 2));
    std::vector<std::size_t> a(2200), b(all.n_rows() - 2200);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 2200);
    const Table train = all.select_rows(a);
    const Table test = all.select_rows(b);
    const Table synth = traincopy_sample(train, 2000, 3);
    EXPECT_EQ(dcr_rate(synth, train, test, 0), 1.0);
    const double v = c2st(test, synth, c2st_gbdt_config(), 0);
    EXPECT_GE(v, 0.45);
    EXPECT_LE(v, 0.55);
}

TEST(Marginals, SingleColumnMatchesTrainCopyLaw) {
    const Table train = sbtest::numeric_column({1, 2, 2, 3, 3, 3, 4, 4, 4, 4});
    const Table m = marginals_sample(train, 20000, 5);
    const Table t = traincopy_sample(train, 20000, 6);
    const auto ks = detail::ks_statistic(m.column(0), t.column(0));
    EXPECT_LT(ks, 0.02);
    const auto members = row_set(train);
    for (std::size_t r = 0; r < m.n_rows(); ++r) ASSERT_TRUE(members.count({m.at(r, 0)}));
}

TEST(Marginals, BreaksPerfectCorrelation) {
    const Table data = sbtest::correlated_pair(10000, 0, 1.0, 0.0);
    const Table m = marginals_sample(data, 10000, 0);
    const auto rho = detail::pearson(m.column(0), m.column(1));
    ASSERT_TRUE(rho);
    EXPECT_LT(std::abs(*rho), 0.1);
    EXPECT_GE(shape_score(data, m), 0.98);
}

TEST(Smote, ZeroLambdaCopiesBaseRow) {
    const Table train = sbtest::adult_like(200, 4);
    SmoteModel model(train, SmoteConfig{});
    std::vector<double> out(train.n_cols());
    for (std::size_t base : {0u, 17u, 150u}) {
        const auto nb = model.neighbors(base);
        model.interpolate(base, nb[0], 0.0, out);
        EXPECT_TRUE(std::equal(out.begin(), out.end(), train.row(base).begin()));
    }
}

TEST(Smote, ValuesStayBetweenClassExtremes) {
    const Table train = one_column_classes({0, 10, 5, 0, 10, 5}, {0, 0, 0, 1, 1, 1});
    SmoteConfig cfg;
    cfg.k_neighbors = 2;
    const Table s = smote_sample(train, cfg, 500);
    for (double v : s.column(0)) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 10.0);
    }
}

TEST(Smote, CategoricalFollowsLambdaThreshold) {
    const Table train = one_column_classes({0, 1, 2, 3}, {0, 0, 1, 1});
    SmoteModel model(train, SmoteConfig{2, false, 0});
    std::vector<double> out(2);
    model.interpolate(0, 2, 0.5, out);
    EXPECT_EQ(out[1], 0.0);
    EXPECT_EQ(out[0], 1.0);
    model.interpolate(0, 2, 0.75, out);
    EXPECT_EQ(out[1], 1.0);
    EXPECT_EQ(out[0], 1.5);
}

TEST(Smote, ErrorsOnSmallClassesAndBadK) {
    const Table train = one_column_classes({0, 1, 2, 3, 4}, {0, 0, 0, 0, 1});
    EXPECT_THROW(SmoteModel(train, SmoteConfig{2, true, 0}), GeneratorError);
    EXPECT_NO_THROW(SmoteModel(train, SmoteConfig{2, false, 0}));
    EXPECT_THROW(SmoteModel(train, SmoteConfig{1, false, 0}), GeneratorError);
    EXPECT_THROW(SmoteModel(train, SmoteConfig{21, false, 0}), GeneratorError);
}

TEST(Smote, ClassProportionsFollowTrain) {
    const Table train = sbtest::adult_like(1500, 5);
    const auto target = *train.target_index();
    const auto y = train.column(target);
    const double p_train = static_cast<double>(std::count(y.begin(), y.end(), 1.0)) / static_cast<double>(y.size());
    const Table s = smote_sample(train, SmoteConfig{5, true, 7}, 10000);
    const auto ys = s.column(target);
    const double p = static_cast<double>(std::count(ys.begin(), ys.end(), 1.0)) / static_cast<double>(ys.size());
    EXPECT_NEAR(p, p_train, 0.02);
}

TEST(Smote, AdultScaleDcr) {
    const Table all = deduplicate_rows(sbtest::adult_like(6000, 6));
    std::vector<std::size_t> a(3000), b(all.n_rows() - 3000);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 3000);
    const Table train = all.select_rows(a);
    const Table test = all.select_rows(b);
    for (std::size_t k : {2u, 5u, 20u}) {
        const Table s = smote_sample(train, SmoteConfig{k, true, 0}, 2000);
        EXPECT_GE(dcr_rate(s, train, test, 0), 0.85) << "k " << k;
    }
}

TEST(Smote, RegressionConditionsOnMedianCut) {
    const Table train = sbtest::correlated_pair(200, 8, 1.0, 0.1);
    Schema schema = train.schema();
    schema.columns[1].is_target = true;
    const Table reg(schema, Table::Vocabularies(2), std::vector<double>(train.cells().begin(), train.cells().end()));
    SmoteModel model(reg, SmoteConfig{5, true, 0});
    const double med = detail::median(reg.column(1));
    for (std::size_t r = 0; r < reg.n_rows(); r += 13)
        for (auto nb : model.neighbors(r)) EXPECT_EQ(reg.at(r, 1) > med, reg.at(nb, 1) > med);
}

TEST(GmmToy, SingleComponentRecoversMoments) {
    const Table train = standard_normal_pair(5000, 9);
    GmmToy g;
    g.prepare_fit({{"n_components", std::int64_t{1}}}, train, 0);
    for (int i = 0; i < 5; ++i) g.train_step();
    for (std::size_t j = 0; j < 2; ++j) {
        const auto& enc = g.encoders()[j];
        const double range = enc.max() - enc.min();
        const double mean = g.means()(0, j) * range + enc.min();
        const double var = g.variances()(0, j) * range * range;
        EXPECT_NEAR(mean, 0.0, 0.05);
        EXPECT_NEAR(var, 1.0, 0.1);
    }
}

TEST(GmmToy, LogLikelihoodNondecreasing) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Table train = make_moons(400, 0.1, seed);
        GmmToy g;
        const std::int64_t k = 1 + static_cast<std::int64_t>(seed % 8);
        const std::string enc = seed % 2 ? "minmax" : "quantile";
        g.prepare_fit({{"n_components", k}, {"encoder", enc}}, train, seed);
        for (int i = 0; i < 30; ++i)
            if (g.train_step().early_stop) break;
        const auto& h = g.log_likelihood_history();
        for (std::size_t i = 1; i < h.size(); ++i) ASSERT_GE(h[i], h[i - 1] - 1e-9) << "seed " << seed;
    }
}

TEST(GmmToy, MoreComponentsFitMoonsBetter) {
    const Table train = make_moons(1500, 0.05, 1);
    const Table holdout = make_moons(1500, 0.05, 2);
    auto c2st_for = [&](std::int64_t k) {
        auto s = fitted("gmmtoy", train, {{"n_components", k}}, 100);
        return c2st(holdout, s->sample(holdout.n_rows(), 3), c2st_gbdt_config(), 0);
    };
    EXPECT_LE(c2st_for(10), c2st_for(1) - 0.05);
}

TEST(GmmToy, ConfigErrors) {
    const Table train = make_moons(100, 0.1, 1);
    GmmToy g;
    EXPECT_THROW(g.prepare_fit({{"n_components", std::int64_t{17}}}, train, 0), GeneratorError);
    EXPECT_THROW(g.prepare_fit({{"n_components", std::int64_t{11}}}, train, 0), GeneratorError);
    EXPECT_THROW(g.prepare_fit({{"encoder", std::string("onehot")}}, train, 0), GeneratorError);
    EXPECT_THROW(g.prepare_fit({}, sbtest::numeric_column(std::vector<double>(50, 1.0)), 0), GeneratorError);
    GmmToy fresh;
    EXPECT_THROW(fresh.train_step(), GeneratorError);
}

TEST(Registry, NamesAndErrors) {
    for (const auto& name : builtin_synthesizers()) EXPECT_EQ(make_synthesizer(name)->name(), name);
    EXPECT_THROW(make_synthesizer("tvae"), GeneratorError);
    EXPECT_THROW(make_synthesizer("bridge:"), GeneratorError);
    EXPECT_EQ(model_label("bridge:python m.py"), "bridge_python_m_py");
    auto tc = make_synthesizer("traincopy");
    EXPECT_THROW(tc->sample(3, 0), GeneratorError);
}

TEST(GeneratorProperties, SchemaPreservedAndDeterministic) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Table train = seed % 2 ? sbtest::adult_like(60 + seed, seed) : make_moons(60 + seed, 0.1, seed);
        const std::string name = builtin_synthesizers()[seed % builtin_synthesizers().size()];
        Config cfg;
        if (name == "gmmtoy") cfg["n_components"] = std::int64_t{1 + static_cast<std::int64_t>(seed % 4)};
        if (name == "smote" || name == "ucsmote") cfg["k_neighbors"] = std::int64_t{2 + static_cast<std::int64_t>(seed % 5)};
        auto a = fitted(name, train, cfg, 10);
        auto b = fitted(name, train, cfg, 10);
        const std::size_t n = 1 + seed % 50;
        const Table sa = a->sample(n, seed);
        const Table sb = b->sample(n, seed);
        ASSERT_EQ(sa.n_rows(), n);
        ASSERT_TRUE(sa.schema().compatible_with(train.schema())) << name;
        ASSERT_EQ(sa.task(), train.task());
        for (std::size_t c = 0; c < train.n_cols(); ++c) ASSERT_EQ(sa.vocabulary(c), train.vocabulary(c));
        ASSERT_TRUE(same_cells(sa, sb)) << name << " seed " << seed;
    }
}

TEST(GeneratorProperties, SmoteStaysInsideClassBox) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Table train = sbtest::adult_like(80, seed);
        const auto target = *train.target_index();
        const auto y = train.column(target);
        const auto pos = std::count(y.begin(), y.end(), 1.0);
        if (pos < 3 || static_cast<std::size_t>(pos) + 3 > y.size()) continue;
        const bool conditioned = seed % 2 == 0;
        const Table s = smote_sample(train, SmoteConfig{2, conditioned, seed}, 200);
        for (std::size_t c = 0; c < train.n_cols(); ++c) {
            if (!train.is_numeric(c)) continue;
            std::map<double, std::pair<double, double>> box;
            for (std::size_t r = 0; r < train.n_rows(); ++r) {
                const double cls = conditioned ? train.at(r, target) : 0.0;
                auto [it, fresh] = box.try_emplace(cls, train.at(r, c), train.at(r, c));
                it->second.first = std::min(it->second.first, train.at(r, c));
                it->second.second = std::max(it->second.second, train.at(r, c));
            }
            for (std::size_t r = 0; r < s.n_rows(); ++r) {
                const auto& [lo, hi] = box.at(conditioned ? s.at(r, target) : 0.0);
                ASSERT_GE(s.at(r, c), lo) << "seed " << seed;
                ASSERT_LE(s.at(r, c), hi) << "seed " << seed;
            }
        }
    }
}
