#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace synthbench {

enum class Loss { logistic, multiclass_softmax, squared };

struct GbdtConfig {
    std::size_t n_rounds = 100;
    double learning_rate = 0.1;
    std::size_t max_depth = 6;
    std::size_t n_histogram_bins = 256;
    std::size_t min_samples_leaf = 20;
    Loss loss = Loss::logistic;
    std::uint64_t seed = 0;
    double l2_reg = 1.0;
    double min_child_weight = 1e-3;
    double min_split_gain = 0.0;
    /// Fraction of rows drawn (seeded) for each boosting round.
    double subsample = 1.0;
    std::size_t n_threads = 1;

    void validate() const {
        if (n_rounds < 1) throw LearnerError("n_rounds must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw LearnerError("learning_rate must be in (0, 1]");
        if (max_depth < 1) throw LearnerError("max_depth must be >= 1");
        if (n_histogram_bins < 2 || n_histogram_bins > 512) throw LearnerError("n_histogram_bins must be in [2, 512]");
        if (!(subsample > 0.0 && subsample <= 1.0)) throw LearnerError("subsample must be in (0, 1]");
        if (l2_reg < 0.0) throw LearnerError("l2_reg must be >= 0");
    }
};

/// Discriminator/predictor defaults used by the metrics.
inline GbdtConfig default_gbdt_config() { return GbdtConfig{}; }

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    std::uint16_t threshold_bin = 0;
    double threshold = 0.0;  // x <= threshold goes left
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    std::size_t depth() const {
        std::function<std::size_t(int)> rec = [&](int i) -> std::size_t {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            if (n.feature < 0) return 0;
            return 1 + std::max(rec(n.left), rec(n.right));
        };
        return nodes.empty() ? 0 : rec(0);
    }
};

/// Per-feature histogram bins: bin b holds values in (upper[b-1], upper[b]].
struct FeatureBins {
    std::vector<double> upper;

    std::uint16_t bin(double x) const {
        auto it = std::lower_bound(upper.begin(), upper.end(), x);
        if (it == upper.end()) --it;
        return static_cast<std::uint16_t>(it - upper.begin());
    }
};

struct GbdtModel {
    Loss loss = Loss::squared;
    std::size_t n_features = 0;
    std::size_t n_classes = 1;  // 1 for regression, K >= 2 for classification
    std::vector<double> base_score;
    std::vector<FeatureBins> bins;
    /// Round-major; multiclass rounds hold one tree per class.
    std::vector<RegressionTree> trees;
    /// Mean training loss before the first round and after every round.
    std::vector<double> train_loss;

    std::size_t trees_per_round() const { return loss == Loss::multiclass_softmax ? n_classes : 1; }
};

namespace detail {

inline FeatureBins make_bins(std::vector<double> values, std::size_t max_bins) {
    std::sort(values.begin(), values.end());
    std::vector<double> distinct = values;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    FeatureBins fb;
    if (distinct.size() <= max_bins) {
        fb.upper = std::move(distinct);
        return fb;
    }
    const std::size_t n = values.size();
    for (std::size_t b = 1; b < max_bins; ++b) {
        const double cut = values[std::min(n - 1, (b * n) / max_bins)];
        if (fb.upper.empty() || cut > fb.upper.back()) fb.upper.push_back(cut);
    }
    if (fb.upper.back() < values.back()) fb.upper.push_back(values.back());
    return fb;
}

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline void softmax_inplace(std::span<double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double& x : v) {
        x = std::exp(x - m);
        s += x;
    }
    for (double& x : v) x /= s;
}

struct HistBin {
    double g = 0.0;
    double h = 0.0;
    std::uint32_t n = 0;
};

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    std::uint16_t bin = 0;
};

class TreeBuilder {
public:
    TreeBuilder(const GbdtConfig& cfg, const std::vector<std::uint16_t>& binned, std::size_t n_features,
                const std::vector<std::size_t>& bins_per_feature)
        : cfg_(cfg), binned_(binned), n_features_(n_features), bins_per_feature_(bins_per_feature) {
        offsets_.resize(n_features + 1, 0);
        for (std::size_t f = 0; f < n_features; ++f) offsets_[f + 1] = offsets_[f] + bins_per_feature[f];
    }

    RegressionTree build(std::vector<std::uint32_t> rows, std::span<const double> grad, std::span<const double> hess,
                         const std::vector<FeatureBins>& bins) {
        RegressionTree tree;
        struct Pending {
            int node;
            std::vector<std::uint32_t> rows;
            std::vector<HistBin> hist;
            double g;
            double h;
        };
        std::vector<Pending> frontier;
        {
            Pending root{0, std::move(rows), {}, 0.0, 0.0};
            root.hist = histogram(root.rows, grad, hess);
            for (auto r : root.rows) {
                root.g += grad[r];
                root.h += hess[r];
            }
            tree.nodes.push_back({});
            frontier.push_back(std::move(root));
        }
        for (std::size_t depth = 0; depth < cfg_.max_depth && !frontier.empty(); ++depth) {
            std::vector<Pending> next;
            for (auto& p : frontier) {
                const SplitCandidate best = best_split(p.hist, p.g, p.h, p.rows.size());
                if (best.feature < 0) {
                    tree.nodes[static_cast<std::size_t>(p.node)].value = leaf_value(p.g, p.h);
                    continue;
                }
                Pending left{static_cast<int>(tree.nodes.size()), {}, {}, 0.0, 0.0};
                Pending right{static_cast<int>(tree.nodes.size() + 1), {}, {}, 0.0, 0.0};
                const auto f = static_cast<std::size_t>(best.feature);
                for (auto r : p.rows) {
                    if (binned_[r * n_features_ + f] <= best.bin) {
                        left.rows.push_back(r);
                        left.g += grad[r];
                        left.h += hess[r];
                    } else {
                        right.rows.push_back(r);
                        right.g += grad[r];
                        right.h += hess[r];
                    }
                }
                auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
                node.feature = best.feature;
                node.threshold_bin = best.bin;
                node.threshold = bins[f].upper[best.bin];
                node.left = left.node;
                node.right = right.node;
                tree.nodes.push_back({});
                tree.nodes.push_back({});
                if (depth + 1 < cfg_.max_depth) {
                    // Build the smaller child's histogram; the sibling is parent - child.
                    Pending& small = left.rows.size() <= right.rows.size() ? left : right;
                    Pending& large = left.rows.size() <= right.rows.size() ? right : left;
                    small.hist = histogram(small.rows, grad, hess);
                    large.hist = std::move(p.hist);
                    for (std::size_t i = 0; i < large.hist.size(); ++i) {
                        large.hist[i].g -= small.hist[i].g;
                        large.hist[i].h -= small.hist[i].h;
                        large.hist[i].n -= small.hist[i].n;
                    }
                }
                next.push_back(std::move(left));
                next.push_back(std::move(right));
            }
            frontier = std::move(next);
        }
        for (auto& p : frontier) tree.nodes[static_cast<std::size_t>(p.node)].value = leaf_value(p.g, p.h);
        return tree;
    }

    /// Leaf assignment of a binned row.
    static double predict_binned(const RegressionTree& tree, const std::uint16_t* row) {
        int i = 0;
        while (tree.nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& n = tree.nodes[static_cast<std::size_t>(i)];
            i = row[n.feature] <= n.threshold_bin ? n.left : n.right;
        }
        return tree.nodes[static_cast<std::size_t>(i)].value;
    }

private:
    double leaf_value(double g, double h) const { return -cfg_.learning_rate * g / (h + cfg_.l2_reg); }

    std::vector<HistBin> histogram(const std::vector<std::uint32_t>& rows, std::span<const double> grad,
                                   std::span<const double> hess) const {
        std::vector<HistBin> hist(offsets_.back());
        for (auto r : rows) {
            const std::uint16_t* row = binned_.data() + static_cast<std::size_t>(r) * n_features_;
            const double g = grad[r];
            const double h = hess[r];
            for (std::size_t f = 0; f < n_features_; ++f) {
                HistBin& b = hist[offsets_[f] + row[f]];
                b.g += g;
                b.h += h;
                ++b.n;
            }
        }
        return hist;
    }

    SplitCandidate best_split_range(const std::vector<HistBin>& hist, double g, double h, std::size_t n,
                                    std::size_t f_begin, std::size_t f_end) const {
        SplitCandidate best;
        const double lambda = cfg_.l2_reg;
        const double parent = g * g / (h + lambda);
        for (std::size_t f = f_begin; f < f_end; ++f) {
            double gl = 0.0;
            double hl = 0.0;
            std::size_t nl = 0;
            const std::size_t nb = bins_per_feature_[f];
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                const HistBin& hb = hist[offsets_[f] + b];
                gl += hb.g;
                hl += hb.h;
                nl += hb.n;
                const std::size_t nr = n - nl;
                if (nl < cfg_.min_samples_leaf) continue;
                if (nr < cfg_.min_samples_leaf) break;
                const double gr = g - gl;
                const double hr = h - hl;
                if (hl < cfg_.min_child_weight || hr < cfg_.min_child_weight) continue;
                const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<int>(f);
                    best.bin = static_cast<std::uint16_t>(b);
                }
            }
        }
        return best;
    }

    SplitCandidate best_split(const std::vector<HistBin>& hist, double g, double h, std::size_t n) const {
        if (n < 2 * std::max<std::size_t>(cfg_.min_samples_leaf, 1)) return {};
        SplitCandidate best;
        const std::size_t threads = std::min(cfg_.n_threads, n_features_);
        if (threads <= 1) {
            best = best_split_range(hist, g, h, n, 0, n_features_);
        } else {
            std::vector<SplitCandidate> partial(threads);
            {
                std::vector<std::jthread> workers;
                for (std::size_t t = 0; t < threads; ++t) {
                    const std::size_t b = n_features_ * t / threads;
                    const std::size_t e = n_features_ * (t + 1) / threads;
                    workers.emplace_back([&, t, b, e] { partial[t] = best_split_range(hist, g, h, n, b, e); });
                }
            }
            // Chunks are feature-ordered, so strict '>' keeps the lowest feature on ties.
            for (const auto& c : partial)
                if (c.feature >= 0 && c.gain > best.gain) best = c;
        }
        if (best.feature >= 0 && !(best.gain > cfg_.min_split_gain && best.gain > 1e-12)) return {};
        return best;
    }

    const GbdtConfig& cfg_;
    const std::vector<std::uint16_t>& binned_;
    std::size_t n_features_;
    const std::vector<std::size_t>& bins_per_feature_;
    std::vector<std::size_t> offsets_;
};

inline double mean_loss(Loss loss, std::span<const double> raw, std::span<const double> y, std::size_t k) {
    const std::size_t n = y.size();
    double total = 0.0;
    std::vector<double> p(k);
    for (std::size_t i = 0; i < n; ++i) {
        switch (loss) {
            case Loss::squared: {
                const double d = raw[i] - y[i];
                total += 0.5 * d * d;
                break;
            }
            case Loss::logistic: {
                const double z = raw[i];
                // log(1 + e^z) - y z, computed stably
                total += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y[i] * z;
                break;
            }
            case Loss::multiclass_softmax: {
                std::copy(raw.begin() + static_cast<std::ptrdiff_t>(i * k),
                          raw.begin() + static_cast<std::ptrdiff_t>((i + 1) * k), p.begin());
                const double m = *std::max_element(p.begin(), p.end());
                double s = 0.0;
                for (double v : p) s += std::exp(v - m);
                total += m + std::log(s) - p[static_cast<std::size_t>(y[i])];
                break;
            }
        }
    }
    return total / static_cast<double>(n);
}

}  // namespace detail

/// Second-order gradient boosting with histogram split search and
/// level-wise tree growth. Labels are class indices 0..K-1 for the
/// classification losses.
inline GbdtModel train_gbdt(const Matrix& X, std::span<const double> y, const GbdtConfig& cfg) {
    cfg.validate();
    if (X.rows == 0 || X.cols == 0) throw LearnerError("train_gbdt: empty feature matrix");
    if (X.rows != y.size()) throw LearnerError("train_gbdt: feature rows != label count");
    const std::size_t n = X.rows;
    const std::size_t nf = X.cols;

    GbdtModel model;
    model.loss = cfg.loss;
    model.n_features = nf;
    std::size_t k = 1;
    if (cfg.loss != Loss::squared) {
        double max_label = 0.0;
        for (double v : y) {
            if (v < 0 || v != std::floor(v)) throw LearnerError("classification labels must be integers >= 0");
            max_label = std::max(max_label, v);
        }
        k = static_cast<std::size_t>(max_label) + 1;
        if (cfg.loss == Loss::logistic && k > 2) throw LearnerError("logistic loss needs labels in {0, 1}");
        k = std::max<std::size_t>(k, 2);
        std::vector<std::size_t> counts(k, 0);
        for (double v : y) ++counts[static_cast<std::size_t>(v)];
        if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
            throw LearnerError("train_gbdt: classification labels contain a single class");
        model.n_classes = k;
        if (cfg.loss == Loss::logistic) {
            const double p = static_cast<double>(counts[1]) / static_cast<double>(n);
            model.base_score = {std::log(p / (1.0 - p))};
        } else {
            for (std::size_t c = 0; c < k; ++c)
                model.base_score.push_back(
                    std::log(std::max(static_cast<double>(counts[c]), 0.5) / static_cast<double>(n)));
        }
    } else {
        for (double v : y)
            if (!std::isfinite(v)) throw LearnerError("regression target contains a non-finite value");
        model.base_score = {std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n)};
    }
    const std::size_t width = cfg.loss == Loss::multiclass_softmax ? k : 1;

    std::vector<std::size_t> bins_per_feature(nf);
    model.bins.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        for (std::size_t r = 0; r < n; ++r)
            if (!std::isfinite(X(r, f))) throw LearnerError("feature matrix contains a non-finite value");
        model.bins[f] = detail::make_bins(X.column(f), cfg.n_histogram_bins);
        bins_per_feature[f] = model.bins[f].upper.size();
    }
    std::vector<std::uint16_t> binned(n * nf);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t f = 0; f < nf; ++f) binned[r * nf + f] = model.bins[f].bin(X(r, f));

    std::vector<double> raw(n * width);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < width; ++c) raw[r * width + c] = model.base_score[c];

    detail::TreeBuilder builder(cfg, binned, nf, bins_per_feature);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    std::vector<double> prob(width);
    Rng rng = Rng(cfg.seed).split("gbdt");
    model.train_loss.push_back(detail::mean_loss(cfg.loss, raw, y, width));

    for (std::size_t round = 0; round < cfg.n_rounds; ++round) {
        std::vector<std::uint32_t> rows;
        rows.reserve(n);
        if (cfg.subsample < 1.0) {
            Rng round_rng = rng.split(round);
            for (std::size_t r = 0; r < n; ++r)
                if (round_rng.uniform() < cfg.subsample) rows.push_back(static_cast<std::uint32_t>(r));
            if (rows.empty()) rows.push_back(static_cast<std::uint32_t>(round_rng.below(n)));
        } else {
            for (std::size_t r = 0; r < n; ++r) rows.push_back(static_cast<std::uint32_t>(r));
        }

        // Gradients for every output column are taken before any tree of the
        // round is applied.
        std::vector<std::vector<double>> grads(width, std::vector<double>(n));
        std::vector<std::vector<double>> hesses(width, std::vector<double>(n));
        for (std::size_t r = 0; r < n; ++r) {
            switch (cfg.loss) {
                case Loss::squared:
                    grads[0][r] = raw[r] - y[r];
                    hesses[0][r] = 1.0;
                    break;
                case Loss::logistic: {
                    const double p = detail::sigmoid(raw[r]);
                    grads[0][r] = p - y[r];
                    hesses[0][r] = std::max(p * (1.0 - p), 1e-16);
                    break;
                }
                case Loss::multiclass_softmax: {
                    std::copy(raw.begin() + static_cast<std::ptrdiff_t>(r * width),
                              raw.begin() + static_cast<std::ptrdiff_t>((r + 1) * width), prob.begin());
                    detail::softmax_inplace(prob);
                    for (std::size_t c = 0; c < width; ++c) {
                        const double target = static_cast<std::size_t>(y[r]) == c ? 1.0 : 0.0;
                        grads[c][r] = prob[c] - target;
                        hesses[c][r] = std::max(prob[c] * (1.0 - prob[c]), 1e-16);
                    }
                    break;
                }
            }
        }
        for (std::size_t c = 0; c < width; ++c) {
            grad = std::move(grads[c]);
            hess = std::move(hesses[c]);
            RegressionTree tree = builder.build(rows, grad, hess, model.bins);
            for (std::size_t r = 0; r < n; ++r)
                raw[r * width + c] += detail::TreeBuilder::predict_binned(tree, binned.data() + r * nf);
            model.trees.push_back(std::move(tree));
        }
        model.train_loss.push_back(detail::mean_loss(cfg.loss, raw, y, width));
    }
    return model;
}

/// Raw additive scores: n x 1 (or n x K for multiclass).
inline Matrix predict_raw(const GbdtModel& model, const Matrix& X) {
    if (X.cols != model.n_features)
        throw LearnerError("predict: feature width " + std::to_string(X.cols) + " != trained width " +
                           std::to_string(model.n_features));
    const std::size_t width = model.trees_per_round();
    Matrix out(X.rows, width);
    for (std::size_t r = 0; r < X.rows; ++r) {
        auto x = X.row(r);
        for (std::size_t c = 0; c < width; ++c) out(r, c) = model.base_score[c];
        for (std::size_t t = 0; t < model.trees.size(); ++t) out(r, t % width) += model.trees[t].predict(x);
    }
    return out;
}

/// Regression: predicted values (n x 1). Binary: P(class 1) (n x 1).
/// Multiclass: class probabilities (n x K), rows summing to 1.
inline Matrix predict(const GbdtModel& model, const Matrix& X) {
    Matrix raw = predict_raw(model, X);
    if (model.loss == Loss::logistic)
        for (double& v : raw.data) v = detail::sigmoid(v);
    else if (model.loss == Loss::multiclass_softmax)
        for (std::size_t r = 0; r < raw.rows; ++r) detail::softmax_inplace(raw.row(r));
    return raw;
}

/// Most probable class per row (ties to the lower class index).
inline std::vector<double> predict_class(const GbdtModel& model, const Matrix& X) {
    Matrix p = predict(model, X);
    std::vector<double> out(p.rows);
    for (std::size_t r = 0; r < p.rows; ++r) {
        if (model.loss == Loss::logistic) {
            out[r] = p(r, 0) > 0.5 ? 1.0 : 0.0;
        } else {
            auto row = p.row(r);
            out[r] = static_cast<double>(std::max_element(row.begin(), row.end()) - row.begin());
        }
    }
    return out;
}

// ----------------------------------------------------------------------------
// Scores
// ----------------------------------------------------------------------------

/// Mann-Whitney ROC-AUC; ties count one half. Labels must be 0/1 with both
/// present. The result is computed from an integer pair count U2 = 2U so
/// that auc(s) + auc(-s) == 1 holds exactly.
inline double roc_auc(std::span<const double> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) throw LearnerError("roc_auc: labels and scores differ in length");
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
    for (double l : labels) {
        if (l == 1.0)
            ++n_pos;
        else if (l == 0.0)
            ++n_neg;
        else
            throw LearnerError("roc_auc: labels must be 0 or 1");
    }
    if (n_pos == 0 || n_neg == 0) throw LearnerError("roc_auc: both classes must be present");
    // twice the sum of positive midranks
    std::uint64_t twice_rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t pos_in_group = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1.0) ++pos_in_group;
            ++j;
        }
        // positions i+1 .. j (1-based); twice the midrank is i + 1 + j
        twice_rank_sum += pos_in_group * (i + 1 + j);
        i = j;
    }
    const std::uint64_t u2 = twice_rank_sum - n_pos * (n_pos + 1);
    const std::uint64_t denom = 2 * n_pos * n_neg;
    if (2 * u2 <= denom) return static_cast<double>(u2) / static_cast<double>(denom);
    return 1.0 - static_cast<double>(denom - u2) / static_cast<double>(denom);
}

/// Binary F1 on class 1 for binclass; macro-averaged F1 over the classes
/// present in labels or predictions for multiclass.
inline double f1_score(std::span<const double> labels, std::span<const double> predictions, TaskKind task) {
    if (labels.size() != predictions.size()) throw LearnerError("f1_score: length mismatch");
    if (labels.empty()) throw LearnerError("f1_score: empty input");
    auto f1_for = [&](double cls) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const bool l = labels[i] == cls;
            const bool p = predictions[i] == cls;
            tp += (l && p) ? 1 : 0;
            fp += (!l && p) ? 1 : 0;
            fn += (l && !p) ? 1 : 0;
        }
        const double denom = 2 * tp + fp + fn;
        return denom == 0 ? 0.0 : 2 * tp / denom;
    };
    if (task == TaskKind::binclass) return f1_for(1.0);
    if (task == TaskKind::regression) throw LearnerError("f1_score is undefined for regression");
    std::vector<double> classes(labels.begin(), labels.end());
    classes.insert(classes.end(), predictions.begin(), predictions.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    double sum = 0.0;
    for (double c : classes) sum += f1_for(c);
    return sum / static_cast<double>(classes.size());
}

/// max(0, 1 - SS_res / SS_tot).
inline double r2_normalized(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size()) throw LearnerError("r2: length mismatch");
    if (y_true.size() < 2) throw LearnerError("r2: needs at least 2 values");
    const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / static_cast<double>(y_true.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
        ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    }
    if (ss_tot == 0.0) throw LearnerError("r2: constant y_true");
    return std::max(0.0, 1.0 - ss_res / ss_tot);
}

}  // namespace synthbench
