#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "dataset.hpp"
#include "encoders.hpp"
#include "error.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "synthesizer.hpp"

namespace synthbench {

struct GmmConfig {
    std::size_t n_components = 1;
    double reg_covar = 1e-6;
    EncoderKind encoder = EncoderKind::minmax;

    static GmmConfig from(const Config& c) {
        GmmConfig g;
        const auto k = config_int(c, "n_components", 1);
        if (k < 1 || k > 16) throw GeneratorError("gmmtoy: n_components must be in [1, 16]");
        g.n_components = static_cast<std::size_t>(k);
        g.reg_covar = config_double(c, "reg_covar", 1e-6);
        if (!(g.reg_covar > 0)) throw GeneratorError("gmmtoy: reg_covar must be positive");
        g.encoder = parse_encoder_kind(config_string(c, "encoder", "minmax"));
        if (g.encoder == EncoderKind::onehot) throw GeneratorError("gmmtoy: onehot is not a numeric encoder");
        return g;
    }
};

/// Diagonal Gaussian mixture over encoded numeric features, with one
/// categorical distribution per component for each categorical column.
/// Each train_step is one EM sweep; the variance floor is reg_covar.
class GmmToy final : public Synthesizer {
public:
    void prepare_fit(const Config& config, const Table& train, std::uint64_t seed) override {
        cfg_ = GmmConfig::from(config);
        train_ = std::make_unique<Table>(train);
        numeric_.clear();
        categorical_.clear();
        for (std::size_t c = 0; c < train.n_cols(); ++c) (train.is_numeric(c) ? numeric_ : categorical_).push_back(c);

        EncoderSpec spec;
        spec.kind = cfg_.encoder;
        encoders_.clear();
        Rng enc_rng = Rng(seed).split("gmm-encode");
        Matrix z;
        for (std::size_t c : numeric_) {
            auto col = train.column(c);
            encoders_.push_back(fit_encoder(spec, col));
            Rng col_rng = enc_rng.split(c);
            z.append_columns(encoders_.back().encode(col, col_rng));
        }
        if (z.cols < 2) throw GeneratorError("gmmtoy: needs at least 2 encoded numeric features");
        const std::size_t n = train.n_rows();
        if (cfg_.n_components * 10 > n)
            throw GeneratorError("gmmtoy: n_components " + std::to_string(cfg_.n_components) + " exceeds n_rows / 10");
        z_ = std::move(z);

        const std::size_t k = cfg_.n_components;
        const std::size_t d = z_.cols;
        Rng rng = Rng(seed).split("gmm-init");
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span<std::size_t>(order));
        weights_.assign(k, 1.0 / static_cast<double>(k));
        means_ = Matrix(k, d);
        vars_ = Matrix(k, d);
        for (std::size_t j = 0; j < d; ++j) {
            auto col = z_.column(j);
            const auto ms = detail::mean_std(col);
            const double var = std::max(ms.std * ms.std, cfg_.reg_covar);
            for (std::size_t m = 0; m < k; ++m) {
                means_(m, j) = k == 1 ? ms.mean : z_(order[m], j);
                vars_(m, j) = var;
            }
        }
        cat_probs_.assign(categorical_.size(), {});
        for (std::size_t ci = 0; ci < categorical_.size(); ++ci) {
            const std::size_t v = train.vocabulary(categorical_[ci]).size();
            std::vector<double> freq(v, 0.0);
            for (std::size_t r = 0; r < n; ++r) freq[static_cast<std::size_t>(train.at(r, categorical_[ci]))] += 1.0;
            for (double& f : freq) f /= static_cast<double>(n);
            cat_probs_[ci] = Matrix(k, v);
            for (std::size_t m = 0; m < k; ++m)
                for (std::size_t x = 0; x < v; ++x) cat_probs_[ci](m, x) = freq[x];
        }
        ll_history_.clear();
        steps_ = 0;
    }

    StepReport train_step() override {
        if (!train_) throw GeneratorError("gmmtoy: prepare_fit has not been called");
        const std::size_t n = z_.rows;
        const std::size_t d = z_.cols;
        const std::size_t k = cfg_.n_components;

        // E-step
        Matrix resp(n, k);
        double total_ll = 0.0;
        std::vector<double> logp(k);
        for (std::size_t r = 0; r < n; ++r) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < k; ++m) {
                logp[m] = component_log_density(r, m);
                mx = std::max(mx, logp[m]);
            }
            double s = 0.0;
            for (std::size_t m = 0; m < k; ++m) s += std::isfinite(logp[m]) ? std::exp(logp[m] - mx) : 0.0;
            const double ll = mx + std::log(s);
            total_ll += ll;
            for (std::size_t m = 0; m < k; ++m) resp(r, m) = std::isfinite(logp[m]) ? std::exp(logp[m] - ll) : 0.0;
        }
        const double mean_ll = total_ll / static_cast<double>(n);

        // M-step
        for (std::size_t m = 0; m < k; ++m) {
            double nk = 0.0;
            for (std::size_t r = 0; r < n; ++r) nk += resp(r, m);
            weights_[m] = nk / static_cast<double>(n);
            if (nk <= 1e-12) continue;
            for (std::size_t j = 0; j < d; ++j) {
                double mu = 0.0;
                for (std::size_t r = 0; r < n; ++r) mu += resp(r, m) * z_(r, j);
                mu /= nk;
                double var = 0.0;
                for (std::size_t r = 0; r < n; ++r) var += resp(r, m) * (z_(r, j) - mu) * (z_(r, j) - mu);
                means_(m, j) = mu;
                vars_(m, j) = std::max(var / nk, cfg_.reg_covar);
            }
            for (std::size_t ci = 0; ci < categorical_.size(); ++ci) {
                auto& probs = cat_probs_[ci];
                for (std::size_t x = 0; x < probs.cols; ++x) probs(m, x) = 0.0;
                for (std::size_t r = 0; r < n; ++r)
                    probs(m, static_cast<std::size_t>(train_->at(r, categorical_[ci]))) += resp(r, m);
                for (std::size_t x = 0; x < probs.cols; ++x) probs(m, x) /= nk;
            }
        }

        const bool converged = !ll_history_.empty() && mean_ll - ll_history_.back() < 1e-6;
        ll_history_.push_back(mean_ll);
        return {++steps_, converged, 0.0};
    }

    Table sample(std::size_t n, std::uint64_t seed) override {
        if (!train_) throw GeneratorError("gmmtoy: prepare_fit has not been called");
        if (n < 1) throw GeneratorError("gmmtoy: n must be >= 1");
        Rng rng = Rng(seed).split("gmm-sample");
        const std::size_t d = z_.cols;
        Matrix z(n, d);
        std::vector<std::size_t> comp(n);
        for (std::size_t r = 0; r < n; ++r) {
            comp[r] = draw(weights_, rng);
            for (std::size_t j = 0; j < d; ++j) z(r, j) = means_(comp[r], j) + std::sqrt(vars_(comp[r], j)) * rng.normal();
        }
        const std::size_t cols = train_->n_cols();
        std::vector<double> cells(n * cols);
        std::size_t offset = 0;
        for (std::size_t i = 0; i < numeric_.size(); ++i) {
            const std::size_t width = encoders_[i].output_dim();
            Matrix slice(n, width);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t j = 0; j < width; ++j) slice(r, j) = z(r, offset + j);
            offset += width;
            auto values = encoders_[i].decode(slice);
            for (std::size_t r = 0; r < n; ++r) cells[r * cols + numeric_[i]] = values[r];
        }
        for (std::size_t ci = 0; ci < categorical_.size(); ++ci) {
            std::vector<double> p(cat_probs_[ci].cols);
            for (std::size_t r = 0; r < n; ++r) {
                auto row = cat_probs_[ci].row(comp[r]);
                p.assign(row.begin(), row.end());
                cells[r * cols + categorical_[ci]] = static_cast<double>(draw(p, rng));
            }
        }
        return train_->with_cells(std::move(cells));
    }

    std::string name() const override { return "gmmtoy"; }

    const GmmConfig& config() const noexcept { return cfg_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    /// Component means and variances in the encoded feature space.
    const Matrix& means() const noexcept { return means_; }
    const Matrix& variances() const noexcept { return vars_; }
    const std::vector<FittedEncoder>& encoders() const noexcept { return encoders_; }
    /// Mean per-row log-likelihood seen by each E-step.
    const std::vector<double>& log_likelihood_history() const noexcept { return ll_history_; }

private:
    double component_log_density(std::size_t r, std::size_t m) const {
        if (weights_[m] <= 0.0) return -std::numeric_limits<double>::infinity();
        double lp = std::log(weights_[m]);
        for (std::size_t j = 0; j < z_.cols; ++j) {
            const double var = vars_(m, j);
            const double diff = z_(r, j) - means_(m, j);
            lp -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + diff * diff / var);
        }
        for (std::size_t ci = 0; ci < categorical_.size(); ++ci) {
            const double p = cat_probs_[ci](m, static_cast<std::size_t>(train_->at(r, categorical_[ci])));
            if (p <= 0.0) return -std::numeric_limits<double>::infinity();
            lp += std::log(p);
        }
        return lp;
    }

    static std::size_t draw(const std::vector<double>& probs, Rng& rng) {
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        double u = rng.uniform() * total;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (u < probs[i]) return i;
            u -= probs[i];
        }
        for (std::size_t i = probs.size(); i-- > 0;)
            if (probs[i] > 0.0) return i;
        return 0;
    }

    GmmConfig cfg_;
    std::unique_ptr<Table> train_;
    std::vector<std::size_t> numeric_;
    std::vector<std::size_t> categorical_;
    std::vector<FittedEncoder> encoders_;
    Matrix z_;
    std::vector<double> weights_;
    Matrix means_;
    Matrix vars_;
    std::vector<Matrix> cat_probs_;
    std::vector<double> ll_history_;
    std::size_t steps_ = 0;
};

}  // namespace synthbench
