#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "dataset.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "synthesizer.hpp"

namespace synthbench {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    /// true: SMOTE within target classes; false: ucSMOTE over one dummy class.
    bool conditioned = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (k_neighbors < 2 || k_neighbors > 20) throw GeneratorError("smote: k_neighbors must be in [2, 20]");
    }
};

/// Neighbour interpolation in a space of min-max scaled numerics and
/// one-hot categoricals (L2). Categorical cells take the base row's
/// category when lambda <= 0.5 and the neighbour's otherwise.
class SmoteModel {
public:
    SmoteModel(const Table& train, SmoteConfig cfg) : train_(train), cfg_(cfg) {
        cfg_.validate();
        const std::size_t cols = train.n_cols();
        scale_.assign(cols, 0.0);
        offset_.assign(cols, 0.0);
        for (std::size_t c = 0; c < cols; ++c) {
            if (!train.is_numeric(c)) continue;
            auto v = train.column(c);
            auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            offset_[c] = *lo;
            scale_[c] = *hi > *lo ? 1.0 / (*hi - *lo) : 0.0;
        }
        points_.resize(train.n_rows() * cols);
        for (std::size_t r = 0; r < train.n_rows(); ++r)
            for (std::size_t c = 0; c < cols; ++c)
                points_[r * cols + c] = train.is_numeric(c) ? (train.at(r, c) - offset_[c]) * scale_[c] : train.at(r, c);

        group_of_.assign(train.n_rows(), 0);
        const auto target = train.target_index();
        if (cfg_.conditioned && target) {
            if (is_classification(train.task())) {
                for (std::size_t r = 0; r < train.n_rows(); ++r)
                    group_of_[r] = static_cast<std::size_t>(train.at(r, *target));
            } else {
                const double med = detail::median(train.column(*target));
                for (std::size_t r = 0; r < train.n_rows(); ++r) group_of_[r] = train.at(r, *target) > med ? 1 : 0;
            }
        }
        // A single group otherwise: the all-zero dummy target is constant and
        // leaves every distance unchanged.
        const std::size_t n_groups = *std::max_element(group_of_.begin(), group_of_.end()) + 1;
        groups_.assign(n_groups, {});
        for (std::size_t r = 0; r < train.n_rows(); ++r) groups_[group_of_[r]].push_back(r);
        for (std::size_t g = 0; g < n_groups; ++g) {
            if (!groups_[g].empty() && groups_[g].size() < cfg_.k_neighbors + 1)
                throw GeneratorError("smote: class " + std::to_string(g) + " has " + std::to_string(groups_[g].size()) +
                                     " rows, fewer than k_neighbors + 1 = " + std::to_string(cfg_.k_neighbors + 1));
        }
        neighbors_.assign(train.n_rows(), {});
    }

    const SmoteConfig& config() const noexcept { return cfg_; }

    /// Squared L2 distance in the scaled/one-hot space; a categorical
    /// mismatch flips two one-hot components.
    double distance2(std::size_t a, std::size_t b) const {
        const std::size_t cols = train_.n_cols();
        const double* pa = points_.data() + a * cols;
        const double* pb = points_.data() + b * cols;
        double d = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            if (train_.is_numeric(c)) {
                const double diff = pa[c] - pb[c];
                d += diff * diff;
            } else if (pa[c] != pb[c]) {
                d += 2.0;
            }
        }
        return d;
    }

    /// The k nearest rows of the same group (ties by row index).
    const std::vector<std::uint32_t>& neighbors(std::size_t row) {
        auto& cached = neighbors_[row];
        if (cached) return *cached;
        const auto& members = groups_[group_of_[row]];
        std::vector<std::pair<double, std::uint32_t>> cand;
        cand.reserve(members.size());
        for (std::size_t m : members)
            if (m != row) cand.emplace_back(distance2(row, m), static_cast<std::uint32_t>(m));
        const std::size_t k = std::min(cfg_.k_neighbors, cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        std::vector<std::uint32_t> out(k);
        for (std::size_t i = 0; i < k; ++i) out[i] = cand[i].second;
        cached = std::move(out);
        return *cached;
    }

    /// One synthetic row interpolated between `base` and `neighbor`.
    void interpolate(std::size_t base, std::size_t neighbor, double lambda, std::span<double> out) const {
        for (std::size_t c = 0; c < train_.n_cols(); ++c) {
            const double x = train_.at(base, c);
            const double z = train_.at(neighbor, c);
            if (train_.is_numeric(c))
                out[c] = std::clamp(x + lambda * (z - x), std::min(x, z), std::max(x, z));
            else
                out[c] = lambda <= 0.5 ? x : z;
        }
    }

    Table sample(std::size_t n, std::uint64_t seed) {
        if (n < 1) throw GeneratorError("smote: n must be >= 1");
        Rng rng = Rng(cfg_.seed).split("smote").split(seed);
        std::vector<std::size_t> sizes(groups_.size());
        for (std::size_t g = 0; g < groups_.size(); ++g) sizes[g] = groups_[g].size();
        const auto quota = proportional_allocation(sizes, n, false);
        const std::size_t cols = train_.n_cols();
        std::vector<double> cells;
        cells.reserve(n * cols);
        std::vector<double> row(cols);
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            for (std::size_t i = 0; i < quota[g]; ++i) {
                const std::size_t base = groups_[g][rng.below(groups_[g].size())];
                const auto& nb = neighbors(base);
                const std::size_t z = nb[rng.below(nb.size())];
                interpolate(base, z, rng.uniform(), row);
                cells.insert(cells.end(), row.begin(), row.end());
            }
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<double> shuffled(n * cols);
        for (std::size_t r = 0; r < n; ++r)
            std::copy_n(cells.begin() + static_cast<std::ptrdiff_t>(order[r] * cols), cols,
                        shuffled.begin() + static_cast<std::ptrdiff_t>(r * cols));
        return train_.with_cells(std::move(shuffled));
    }

private:
    Table train_;
    SmoteConfig cfg_;
    std::vector<double> scale_;
    std::vector<double> offset_;
    std::vector<double> points_;
    std::vector<std::size_t> group_of_;
    std::vector<std::vector<std::size_t>> groups_;
    std::vector<std::optional<std::vector<std::uint32_t>>> neighbors_;
};

inline Table smote_sample(const Table& train, const SmoteConfig& cfg, std::size_t n) {
    SmoteModel model(train, cfg);
    return model.sample(n, 0);
}

class Smote final : public detail::NoTrainingSynthesizer {
public:
    explicit Smote(bool conditioned) : conditioned_(conditioned) {}

    Table sample(std::size_t n, std::uint64_t seed) override {
        if (!model_) model_.emplace(train(), cfg_);
        return model_->sample(n, seed);
    }

    std::string name() const override { return conditioned_ ? "smote" : "ucsmote"; }

protected:
    void configure(const Config& config) override {
        cfg_ = SmoteConfig{static_cast<std::size_t>(config_int(config, "k_neighbors", 5)), conditioned_, seed_};
        cfg_.validate();
        model_.reset();
        model_.emplace(train(), cfg_);
    }

private:
    bool conditioned_;
    SmoteConfig cfg_;
    std::optional<SmoteModel> model_;
};

}  // namespace synthbench
