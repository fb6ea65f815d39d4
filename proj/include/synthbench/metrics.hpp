#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"
#include "learner.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace synthbench {

struct MetricBundle {
    double c2st = 0.0;
    double ml_efficacy = 0.0;
    double dcr_rate = 0.0;
    double shape = 0.0;
    double pair = 0.0;
};

inline void require_same_schema(const Table& a, const Table& b, std::string_view what) {
    if (!a.schema().compatible_with(b.schema()))
        throw MetricError(std::string(what) + ": tables have different schemas");
    for (std::size_t c = 0; c < a.n_cols(); ++c)
        if (!a.is_numeric(c) && a.vocabulary(c) != b.vocabulary(c))
            throw MetricError(std::string(what) + ": column '" + a.column_schema(c).name +
                              "' has different category vocabularies");
}

/// Numeric columns as-is, categorical columns one-hot over the vocabulary.
inline Matrix table_features(const Table& t, std::optional<std::size_t> skip_column = std::nullopt) {
    std::vector<std::size_t> offset(t.n_cols() + 1, 0);
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        std::size_t w = 0;
        if (!skip_column || *skip_column != c) w = t.is_numeric(c) ? 1 : t.vocabulary(c).size();
        offset[c + 1] = offset[c] + w;
    }
    Matrix X(t.n_rows(), offset.back());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        for (std::size_t c = 0; c < t.n_cols(); ++c) {
            if (skip_column && *skip_column == c) continue;
            if (t.is_numeric(c))
                X(r, offset[c]) = t.at(r, c);
            else
                X(r, offset[c] + static_cast<std::size_t>(t.at(r, c))) = 1.0;
        }
    }
    return X;
}

namespace detail {

inline std::uint64_t row_hash(std::span<const double> row, std::uint64_t seed) {
    std::uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
    for (double v : row) {
        if (v == 0.0) v = 0.0;  // -0 and +0 hash alike
        h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

/// Row indices ordered by a seeded content hash, ties by cell values: the
/// order depends on row content only, never on row position.
inline std::vector<std::size_t> content_order(const Table& t, std::uint64_t seed) {
    std::vector<std::uint64_t> h(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) h[r] = row_hash(t.row(r), seed);
    std::vector<std::size_t> order(t.n_rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (h[a] != h[b]) return h[a] < h[b];
        auto ra = t.row(a);
        auto rb = t.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    return order;
}

}  // namespace detail

/// Discriminator defaults for the two-sample test.
inline GbdtConfig c2st_gbdt_config() {
    GbdtConfig cfg;
    cfg.n_rounds = 100;
    cfg.learning_rate = 0.1;
    cfg.max_depth = 6;
    cfg.n_histogram_bins = 256;
    cfg.min_samples_leaf = 20;
    cfg.loss = Loss::logistic;
    return cfg;
}

/// Classifier two-sample test: mean held-out ROC-AUC over 3 folds of a
/// GBDT separating real (0) from synthetic (1) rows. Both sides are cut to
/// the smaller size; selection, fold assignment and training order are keyed
/// on row content, so the result does not depend on row order.
inline double c2st(const Table& real_holdout, const Table& synthetic, GbdtConfig cfg, std::uint64_t seed) {
    require_same_schema(real_holdout, synthetic, "c2st");
    const std::size_t m = std::min(real_holdout.n_rows(), synthetic.n_rows());
    if (2 * m < 6) throw MetricError("c2st: fewer than 6 pooled rows");
    cfg.loss = Loss::logistic;

    const auto real_order = detail::content_order(real_holdout, seed);
    const auto synth_order = detail::content_order(synthetic, detail::mix64(seed + 1));
    std::vector<std::size_t> real_idx(real_order.begin(), real_order.begin() + static_cast<std::ptrdiff_t>(m));
    std::vector<std::size_t> synth_idx(synth_order.begin(), synth_order.begin() + static_cast<std::ptrdiff_t>(m));
    const Matrix Xr = table_features(real_holdout.select_rows(real_idx));
    const Matrix Xs = table_features(synthetic.select_rows(synth_idx));
    const std::size_t width = Xr.cols;

    double auc_sum = 0.0;
    for (std::size_t f = 0; f < 3; ++f) {
        std::vector<double> train_cells;
        std::vector<double> train_y;
        std::vector<double> test_cells;
        std::vector<double> test_y;
        auto take = [&](const Matrix& X, double label) {
            for (std::size_t i = 0; i < m; ++i) {
                auto row = X.row(i);
                auto& cells = (i % 3 == f) ? test_cells : train_cells;
                auto& ys = (i % 3 == f) ? test_y : train_y;
                cells.insert(cells.end(), row.begin(), row.end());
                ys.push_back(label);
            }
        };
        take(Xr, 0.0);
        take(Xs, 1.0);
        const Matrix Xtrain(train_y.size(), width, std::move(train_cells));
        const Matrix Xtest(test_y.size(), width, std::move(test_cells));
        GbdtConfig fold_cfg = cfg;
        fold_cfg.seed = detail::mix64(cfg.seed + f);
        const GbdtModel model = train_gbdt(Xtrain, train_y, fold_cfg);
        const Matrix p = predict(model, Xtest);
        auc_sum += roc_auc(test_y, p.data);
    }
    return auc_sum / 3.0;
}

/// Train-on-synthetic, test-on-real score: F1 (macro for multiclass) or
/// R^2 clamped at 0.
inline double ml_efficacy(const Table& synthetic, const Table& real_test, GbdtConfig cfg) {
    require_same_schema(synthetic, real_test, "ml_efficacy");
    const auto target = synthetic.target_index();
    if (!target) throw MetricError("ml_efficacy: schema declares no target");
    const TaskKind task = synthetic.task();
    const Matrix Xs = table_features(synthetic, target);
    const Matrix Xt = table_features(real_test, target);
    auto ys = synthetic.column(*target);
    auto yt = real_test.column(*target);
    if (task == TaskKind::regression) {
        cfg.loss = Loss::squared;
        const GbdtModel model = train_gbdt(Xs, ys, cfg);
        return r2_normalized(yt, predict(model, Xt).data);
    }
    std::vector<double> distinct = ys;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) throw MetricError("ml_efficacy: synthetic target has a single class");
    cfg.loss = task == TaskKind::binclass ? Loss::logistic : Loss::multiclass_softmax;
    const GbdtModel model = train_gbdt(Xs, ys, cfg);
    return f1_score(yt, predict_class(model, Xt), task);
}

struct DcrOptions {
    /// Subsample the train reference (seeded) to |test| rows.
    bool equalize_reference = false;
};

namespace detail {

/// L1 distance over numeric columns scaled by the reference range plus a
/// 0/1 mismatch per categorical column.
class DcrSpace {
public:
    DcrSpace(const Table& a, const Table& b) : numeric_(a.n_cols()), inv_range_(a.n_cols(), 1.0) {
        for (std::size_t c = 0; c < a.n_cols(); ++c) {
            numeric_[c] = a.is_numeric(c);
            if (!numeric_[c]) continue;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const Table* t : {&a, &b})
                for (std::size_t r = 0; r < t->n_rows(); ++r) {
                    lo = std::min(lo, t->at(r, c));
                    hi = std::max(hi, t->at(r, c));
                }
            if (hi > lo) inv_range_[c] = 1.0 / (hi - lo);
        }
    }

    double distance(std::span<const double> x, std::span<const double> y) const {
        double d = 0.0;
        for (std::size_t c = 0; c < x.size(); ++c) {
            if (numeric_[c])
                d += std::abs(x[c] - y[c]) * inv_range_[c];
            else if (x[c] != y[c])
                d += 1.0;
        }
        return d;
    }

    double nearest(std::span<const double> x, const Table& ref) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < ref.n_rows() && best > 0.0; ++r) best = std::min(best, distance(x, ref.row(r)));
        return best;
    }

private:
    std::vector<bool> numeric_;
    std::vector<double> inv_range_;
};

}  // namespace detail

/// Share of synthetic rows whose closest record is in train rather than
/// test; equal distances (to 1e-12 relative) count one half. Numeric ranges come from the union
/// of both reference tables.
inline double dcr_rate(const Table& synthetic, const Table& train, const Table& test, std::uint64_t seed,
                       DcrOptions opts = {}) {
    require_same_schema(synthetic, train, "dcr_rate");
    require_same_schema(synthetic, test, "dcr_rate");
    const Table* reference = &train;
    std::optional<Table> sub;
    if (opts.equalize_reference && train.n_rows() > test.n_rows()) {
        std::vector<std::size_t> idx(train.n_rows());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng = Rng(seed).split("dcr-reference");
        rng.shuffle(std::span<std::size_t>(idx));
        idx.resize(test.n_rows());
        std::sort(idx.begin(), idx.end());
        sub = train.select_rows(idx);
        reference = &*sub;
    }
    const detail::DcrSpace space(*reference, test);
    double score = 0.0;
    for (std::size_t r = 0; r < synthetic.n_rows(); ++r) {
        const auto x = synthetic.row(r);
        const double d_train = space.nearest(x, *reference);
        const double d_test = space.nearest(x, test);
        const double tol = 1e-12 * std::max({1.0, d_train, d_test});
        if (std::abs(d_train - d_test) <= tol)
            score += 0.5;
        else if (d_train < d_test)
            score += 1.0;
    }
    return score / static_cast<double>(synthetic.n_rows());
}

/// Per-column similarity: 1 - KS for numerics, 1 - total variation for
/// categoricals.
inline std::vector<double> column_shapes(const Table& real, const Table& synthetic) {
    require_same_schema(real, synthetic, "shape_score");
    std::vector<double> out(real.n_cols());
    for (std::size_t c = 0; c < real.n_cols(); ++c) {
        if (real.is_numeric(c)) {
            out[c] = 1.0 - detail::ks_statistic(real.column(c), synthetic.column(c));
        } else {
            const std::size_t v = real.vocabulary(c).size();
            std::vector<double> pr(v, 0.0);
            std::vector<double> ps(v, 0.0);
            for (std::size_t r = 0; r < real.n_rows(); ++r) pr[static_cast<std::size_t>(real.at(r, c))] += 1.0;
            for (std::size_t r = 0; r < synthetic.n_rows(); ++r)
                ps[static_cast<std::size_t>(synthetic.at(r, c))] += 1.0;
            double tv = 0.0;
            for (std::size_t i = 0; i < v; ++i)
                tv += std::abs(pr[i] / static_cast<double>(real.n_rows()) -
                               ps[i] / static_cast<double>(synthetic.n_rows()));
            out[c] = 1.0 - 0.5 * tv;
        }
    }
    return out;
}

inline double shape_score(const Table& real, const Table& synthetic) {
    const auto s = column_shapes(real, synthetic);
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

namespace detail {

/// Pearson correlation with sums taken over the lexicographically sorted
/// (x, y) pairs, so any row permutation gives the same bits. Empty when a
/// column is constant.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    std::vector<std::pair<double, double>> pts(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) pts[i] = {x[i], y[i]};
    std::sort(pts.begin(), pts.end());
    const double n = static_cast<double>(pts.size());
    double mx = 0.0;
    double my = 0.0;
    for (auto [a, b] : pts) {
        mx += a;
        my += b;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (auto [a, b] : pts) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace detail

struct PairReport {
    double score = 0.0;
    std::size_t n_pairs = 0;
    /// Numeric pairs left out because a column is constant.
    std::vector<std::pair<std::string, std::string>> skipped;
};

/// Pairwise dependency similarity. Numeric pairs compare Pearson
/// correlations; pairs with a categorical compare joint distributions after
/// cutting numerics at the real column's deciles.
inline PairReport pair_report(const Table& real, const Table& synthetic) {
    require_same_schema(real, synthetic, "pair_score");
    const std::size_t cols = real.n_cols();
    if (cols < 2) throw MetricError("pair_score: needs at least 2 columns");

    // Category-like codes per column: vocabulary ids or decile bins.
    auto codes = [&](const Table& t, std::size_t c, const std::vector<double>& cuts) {
        std::vector<std::size_t> out(t.n_rows());
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            const double v = t.at(r, c);
            out[r] = t.is_numeric(c) ? static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin())
                                     : static_cast<std::size_t>(v);
        }
        return out;
    };
    std::vector<std::vector<double>> cuts(cols);
    std::vector<std::size_t> n_codes(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        if (real.is_numeric(c)) {
            auto v = real.column(c);
            std::sort(v.begin(), v.end());
            for (int q = 1; q <= 9; ++q) cuts[c].push_back(detail::percentile_sorted(v, q / 10.0));
            n_codes[c] = 10;
        } else {
            n_codes[c] = real.vocabulary(c).size();
        }
    }

    PairReport rep;
    double total = 0.0;
    for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t j = i + 1; j < cols; ++j) {
            if (real.is_numeric(i) && real.is_numeric(j)) {
                const auto rr = detail::pearson(real.column(i), real.column(j));
                const auto rs = detail::pearson(synthetic.column(i), synthetic.column(j));
                if (!rr || !rs) {
                    rep.skipped.emplace_back(real.column_schema(i).name, real.column_schema(j).name);
                    continue;
                }
                total += 1.0 - std::abs(*rr - *rs) / 2.0;
            } else {
                const auto ar = codes(real, i, cuts[i]);
                const auto br = codes(real, j, cuts[j]);
                const auto as = codes(synthetic, i, cuts[i]);
                const auto bs = codes(synthetic, j, cuts[j]);
                std::vector<double> pr(n_codes[i] * n_codes[j], 0.0);
                std::vector<double> ps(pr.size(), 0.0);
                for (std::size_t r = 0; r < ar.size(); ++r) pr[ar[r] * n_codes[j] + br[r]] += 1.0;
                for (std::size_t r = 0; r < as.size(); ++r) ps[as[r] * n_codes[j] + bs[r]] += 1.0;
                double tv = 0.0;
                for (std::size_t k = 0; k < pr.size(); ++k)
                    tv += std::abs(pr[k] / static_cast<double>(ar.size()) - ps[k] / static_cast<double>(as.size()));
                total += 1.0 - 0.5 * tv;
            }
            ++rep.n_pairs;
        }
    }
    if (rep.n_pairs == 0) throw MetricError("pair_score: every column pair was skipped");
    rep.score = total / static_cast<double>(rep.n_pairs);
    return rep;
}

inline double pair_score(const Table& real, const Table& synthetic) { return pair_report(real, synthetic).score; }

}  // namespace synthbench
