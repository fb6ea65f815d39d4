#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dataset.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace synthbench {

/// Numeric and categorical feature encoders.
///
/// The Gaussian-mixture "cluster-based normalizer" used by some neural
/// synthesizers is intentionally not provided.
enum class EncoderKind { minmax, quantile, cdf, ple, ple_cdf, ptp, onehot };

inline std::string_view to_string(EncoderKind k) {
    switch (k) {
        case EncoderKind::minmax: return "minmax";
        case EncoderKind::quantile: return "quantile";
        case EncoderKind::cdf: return "cdf";
        case EncoderKind::ple: return "ple";
        case EncoderKind::ple_cdf: return "ple_cdf";
        case EncoderKind::ptp: return "ptp";
        case EncoderKind::onehot: return "onehot";
    }
    return "?";
}

/// Accepts the canonical names plus the spellings used in published search
/// spaces ("MinMaxScaler", "QuantileTransformer", "PLE_CDF", ...).
inline EncoderKind parse_encoder_kind(std::string_view s) {
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "minmax" || lower == "minmaxscaler") return EncoderKind::minmax;
    if (lower == "quantile" || lower == "quantiletransformer") return EncoderKind::quantile;
    if (lower == "cdf") return EncoderKind::cdf;
    if (lower == "ple") return EncoderKind::ple;
    if (lower == "ple_cdf") return EncoderKind::ple_cdf;
    if (lower == "ptp") return EncoderKind::ptp;
    if (lower == "onehot" || lower == "one-hot-encoder" || lower == "one-hot") return EncoderKind::onehot;
    if (lower == "cbn" || lower == "clusterbasednormalizer")
        throw EncoderError("encoder '" + std::string(s) + "' (cluster-based normalizer) is not implemented");
    throw EncoderError("unknown encoder kind '" + std::string(s) + "'");
}

inline bool is_randomized(EncoderKind k) { return k == EncoderKind::cdf || k == EncoderKind::ple_cdf; }

struct EncoderSpec {
    EncoderKind kind = EncoderKind::minmax;
    std::size_t n_bins = 16;        // ple, ple_cdf
    std::size_t n_prototypes = 8;   // ptp
    double temperature = 0.0;       // ptp; 0 selects the median prototype gap
    std::size_t n_quantiles = 0;    // quantile, cdf; 0 keeps every training value

    void validate() const {
        if ((kind == EncoderKind::ple || kind == EncoderKind::ple_cdf) && n_bins < 2)
            throw EncoderError("ple needs n_bins >= 2");
        if (kind == EncoderKind::ptp && n_prototypes < 2) throw EncoderError("ptp needs n_prototypes >= 2");
        if (temperature < 0.0 || !std::isfinite(temperature)) throw EncoderError("ptp temperature must be positive");
    }
};

/// A column's values: numerics, or category ids with their names.
struct ColumnData {
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> values;
    std::vector<std::string> vocabulary;

    static ColumnData numeric(std::vector<double> v) { return {ColumnKind::numeric, std::move(v), {}}; }
    static ColumnData categorical(std::vector<double> ids, std::vector<std::string> vocab) {
        return {ColumnKind::categorical, std::move(ids), std::move(vocab)};
    }
    static ColumnData from_table(const Table& t, std::size_t c) {
        return {t.column_schema(c).kind, t.column(c), t.is_numeric(c) ? std::vector<std::string>{} : t.vocabulary(c)};
    }
};

namespace detail {

/// Empirical CDF over sorted training values.
struct Ecdf {
    std::vector<double> sorted;

    double n() const { return static_cast<double>(sorted.size()); }
    /// #{v < x}
    std::size_t below(double x) const {
        return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
    }
    /// #{v <= x}
    std::size_t at_or_below(double x) const {
        return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
    }

    double midrank(double x) const {
        return (static_cast<double>(below(x)) + static_cast<double>(at_or_below(x))) / (2.0 * n());
    }

    /// Randomized probability-integral transform, strictly inside (0, 1).
    double randomized(double x, Rng& rng) const {
        const double v = rng.uniform_open();
        const double size = n();
        if (x < sorted.front()) return v / (size + 1.0);
        if (x > sorted.back()) return (size + v) / (size + 1.0);
        const double lo = static_cast<double>(below(x)) / size;
        const double hi = static_cast<double>(at_or_below(x)) / size;
        return lo + v * (hi - lo);
    }

    /// Empirical quantile function: smallest training value v with F(v) >= u.
    double quantile(double u) const {
        u = std::clamp(u, 0.0, 1.0);
        const double pos = std::ceil(u * n());
        const auto idx = pos <= 1.0 ? std::size_t{0} : static_cast<std::size_t>(pos) - 1;
        return sorted[std::min(idx, sorted.size() - 1)];
    }
};

inline std::vector<double> sorted_copy(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return s;
}

inline std::vector<double> linear_quantiles(const std::vector<double>& sorted, std::size_t count) {
    std::vector<double> q(count);
    for (std::size_t i = 0; i < count; ++i)
        q[i] = percentile_sorted(sorted, static_cast<double>(i) / static_cast<double>(count - 1));
    return q;
}

}  // namespace detail

/// Fitted, immutable per-column transform.
class FittedEncoder {
public:
    static FittedEncoder fit(const EncoderSpec& spec, const ColumnData& column) {
        spec.validate();
        if (column.values.empty()) throw EncoderError("cannot fit an encoder on an empty column");
        if (spec.kind == EncoderKind::onehot) {
            if (column.kind != ColumnKind::categorical)
                throw EncoderError("onehot encoder requires a categorical column");
        } else if (column.kind != ColumnKind::numeric) {
            throw EncoderError(std::string(to_string(spec.kind)) + " encoder requires a numeric column");
        }
        for (double v : column.values)
            if (!std::isfinite(v)) throw EncoderError("encoder input contains a non-finite value");

        FittedEncoder enc;
        enc.spec_ = spec;
        switch (spec.kind) {
            case EncoderKind::minmax: {
                auto [lo, hi] = std::minmax_element(column.values.begin(), column.values.end());
                enc.lo_ = *lo;
                enc.hi_ = *hi;
                break;
            }
            case EncoderKind::quantile:
            case EncoderKind::cdf: {
                auto s = detail::sorted_copy(column.values);
                if (spec.n_quantiles >= 2 && spec.n_quantiles < s.size()) s = detail::linear_quantiles(s, spec.n_quantiles);
                enc.ecdf_.sorted = std::move(s);
                break;
            }
            case EncoderKind::ple:
            case EncoderKind::ple_cdf: {
                const auto s = detail::sorted_copy(column.values);
                enc.edges_ = detail::linear_quantiles(s, spec.n_bins + 1);
                if (spec.kind == EncoderKind::ple_cdf) {
                    const Matrix train = enc.encode_ple(column.values);
                    for (std::size_t t = 0; t < train.cols; ++t)
                        enc.component_cdfs_.push_back({detail::sorted_copy(train.column(t))});
                }
                break;
            }
            case EncoderKind::ptp: {
                const auto s = detail::sorted_copy(column.values);
                enc.prototypes_ = detail::linear_quantiles(s, spec.n_prototypes);
                enc.temperature_ = spec.temperature > 0.0 ? spec.temperature : default_temperature(enc.prototypes_);
                break;
            }
            case EncoderKind::onehot:
                enc.categories_ = column.vocabulary;
                if (enc.categories_.empty()) throw EncoderError("onehot encoder needs a non-empty vocabulary");
                break;
        }
        return enc;
    }

    EncoderKind kind() const noexcept { return spec_.kind; }
    const EncoderSpec& spec() const noexcept { return spec_; }

    std::size_t output_dim() const noexcept {
        switch (spec_.kind) {
            case EncoderKind::ple:
            case EncoderKind::ple_cdf: return edges_.size() - 1;
            case EncoderKind::ptp: return prototypes_.size();
            case EncoderKind::onehot: return categories_.size();
            default: return 1;
        }
    }

    double min() const noexcept { return lo_; }
    double max() const noexcept { return hi_; }
    const std::vector<double>& edges() const noexcept { return edges_; }
    const std::vector<double>& prototypes() const noexcept { return prototypes_; }
    double temperature() const noexcept { return temperature_; }
    const std::vector<std::string>& categories() const noexcept { return categories_; }
    const std::vector<double>& sorted_training_values() const noexcept { return ecdf_.sorted; }

    /// Encodes numeric values. Randomized kinds draw from `rng`.
    Matrix encode(std::span<const double> values, Rng& rng) const {
        if (spec_.kind == EncoderKind::onehot)
            throw EncoderError("onehot encoder needs categorical input; use encode(ColumnData)");
        Matrix out(values.size(), output_dim());
        switch (spec_.kind) {
            case EncoderKind::minmax:
                for (std::size_t i = 0; i < values.size(); ++i) out(i, 0) = encode_minmax(values[i]);
                break;
            case EncoderKind::quantile:
                for (std::size_t i = 0; i < values.size(); ++i) out(i, 0) = ecdf_.midrank(values[i]);
                break;
            case EncoderKind::cdf:
                for (std::size_t i = 0; i < values.size(); ++i) out(i, 0) = ecdf_.randomized(values[i], rng);
                break;
            case EncoderKind::ple: out = encode_ple(values); break;
            case EncoderKind::ple_cdf: {
                out = encode_ple(values);
                for (std::size_t i = 0; i < out.rows; ++i)
                    for (std::size_t t = 0; t < out.cols; ++t) out(i, t) = component_cdfs_[t].randomized(out(i, t), rng);
                break;
            }
            case EncoderKind::ptp:
                for (std::size_t i = 0; i < values.size(); ++i) encode_ptp(values[i], out.row(i));
                break;
            case EncoderKind::onehot: break;
        }
        return out;
    }

    /// Deterministic kinds only.
    Matrix encode(std::span<const double> values) const {
        if (is_randomized(spec_.kind))
            throw EncoderError(std::string(to_string(spec_.kind)) + " encoding needs an explicit random stream");
        Rng unused(0);
        return encode(values, unused);
    }

    /// Encodes a column; categorical input is matched to the fitted
    /// categories by name.
    Matrix encode(const ColumnData& column, Rng& rng) const {
        if (spec_.kind != EncoderKind::onehot) {
            if (column.kind != ColumnKind::numeric) throw EncoderError("numeric encoder given a categorical column");
            return encode(column.values, rng);
        }
        if (column.kind != ColumnKind::categorical) throw EncoderError("onehot encoder given a numeric column");
        std::unordered_map<std::string_view, std::size_t> index;
        for (std::size_t i = 0; i < categories_.size(); ++i) index.emplace(categories_[i], i);
        Matrix out(column.values.size(), categories_.size());
        for (std::size_t r = 0; r < column.values.size(); ++r) {
            const double id = column.values[r];
            if (id < 0 || id != std::floor(id) || static_cast<std::size_t>(id) >= column.vocabulary.size())
                throw EncoderError("unseen category id " + detail::format_double(id));
            const auto& name = column.vocabulary[static_cast<std::size_t>(id)];
            auto it = index.find(name);
            if (it == index.end()) throw EncoderError("unseen category '" + name + "'");
            out(r, it->second) = 1.0;
        }
        return out;
    }

    Matrix encode(const ColumnData& column) const {
        Rng unused(0);
        if (is_randomized(spec_.kind))
            throw EncoderError(std::string(to_string(spec_.kind)) + " encoding needs an explicit random stream");
        return encode(column, unused);
    }

    /// Maps encoded rows back to raw values (category indices for onehot).
    /// Inputs outside the valid range are clamped first.
    std::vector<double> decode(const Matrix& m) const {
        if (m.cols != output_dim())
            throw EncoderError("decode: matrix width " + std::to_string(m.cols) + " != output_dim " +
                               std::to_string(output_dim()));
        std::vector<double> out(m.rows);
        for (std::size_t i = 0; i < m.rows; ++i) {
            auto row = m.row(i);
            switch (spec_.kind) {
                case EncoderKind::minmax: out[i] = decode_minmax(row[0]); break;
                case EncoderKind::quantile:
                case EncoderKind::cdf: out[i] = ecdf_.quantile(row[0]); break;
                case EncoderKind::ple: out[i] = decode_ple(row); break;
                case EncoderKind::ple_cdf: {
                    std::vector<double> comp(row.size());
                    for (std::size_t t = 0; t < row.size(); ++t) comp[t] = component_cdfs_[t].quantile(row[t]);
                    out[i] = decode_ple(comp);
                    break;
                }
                case EncoderKind::ptp: out[i] = decode_ptp(row); break;
                case EncoderKind::onehot:
                    out[i] = static_cast<double>(std::max_element(row.begin(), row.end()) - row.begin());
                    break;
            }
        }
        return out;
    }

    /// Versioned key/value text form.
    std::string serialize() const {
        std::ostringstream out;
        auto list = [&](std::string_view key, const std::vector<double>& v) {
            out << key << ' ' << v.size();
            for (double x : v) out << ' ' << detail::format_double(x);
            out << '\n';
        };
        out << "encoder_format 1\n";
        out << "kind " << to_string(spec_.kind) << '\n';
        out << "n_bins " << spec_.n_bins << '\n';
        out << "n_prototypes " << spec_.n_prototypes << '\n';
        out << "temperature_param " << detail::format_double(spec_.temperature) << '\n';
        out << "n_quantiles " << spec_.n_quantiles << '\n';
        out << "min " << detail::format_double(lo_) << '\n';
        out << "max " << detail::format_double(hi_) << '\n';
        out << "temperature " << detail::format_double(temperature_) << '\n';
        list("sorted", ecdf_.sorted);
        list("edges", edges_);
        list("prototypes", prototypes_);
        out << "component_cdfs " << component_cdfs_.size() << '\n';
        for (const auto& c : component_cdfs_) list("component", c.sorted);
        out << "categories " << categories_.size() << '\n';
        for (const auto& c : categories_) out << "category " << detail::quote_token(c) << '\n';
        out << "end\n";
        return out.str();
    }

    static FittedEncoder deserialize(std::string_view text) {
        std::istringstream in{std::string(text)};
        FittedEncoder enc;
        std::string key;
        auto expect = [&](std::string_view want) {
            if (!(in >> key) || key != want)
                throw EncoderError("encoder text: expected '" + std::string(want) + "', got '" + key + "'");
        };
        auto read_double = [&] {
            std::string tok;
            in >> tok;
            auto v = detail::parse_double(tok);
            if (!v) throw EncoderError("encoder text: bad number '" + tok + "'");
            return *v;
        };
        auto read_list = [&](std::string_view k) {
            expect(k);
            std::size_t n = 0;
            in >> n;
            std::vector<double> v(n);
            for (auto& x : v) x = read_double();
            return v;
        };
        expect("encoder_format");
        int version = 0;
        in >> version;
        if (version != 1) throw EncoderError("unsupported encoder format version " + std::to_string(version));
        expect("kind");
        std::string kind;
        in >> kind;
        enc.spec_.kind = parse_encoder_kind(kind);
        expect("n_bins");
        in >> enc.spec_.n_bins;
        expect("n_prototypes");
        in >> enc.spec_.n_prototypes;
        expect("temperature_param");
        enc.spec_.temperature = read_double();
        expect("n_quantiles");
        in >> enc.spec_.n_quantiles;
        expect("min");
        enc.lo_ = read_double();
        expect("max");
        enc.hi_ = read_double();
        expect("temperature");
        enc.temperature_ = read_double();
        enc.ecdf_.sorted = read_list("sorted");
        enc.edges_ = read_list("edges");
        enc.prototypes_ = read_list("prototypes");
        expect("component_cdfs");
        std::size_t nc = 0;
        in >> nc;
        for (std::size_t i = 0; i < nc; ++i) enc.component_cdfs_.push_back({read_list("component")});
        expect("categories");
        std::size_t ncat = 0;
        in >> ncat;
        std::string line;
        std::getline(in, line);
        for (std::size_t i = 0; i < ncat; ++i) {
            std::getline(in, line);
            std::string_view sv = line;
            if (!sv.starts_with("category ")) throw EncoderError("encoder text: expected category line");
            sv.remove_prefix(9);
            enc.categories_.push_back(detail::read_token(sv, 0));
        }
        expect("end");
        if (!in) throw EncoderError("encoder text: truncated input");
        return enc;
    }

private:
    static double default_temperature(const std::vector<double>& protos) {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < protos.size(); ++i) gaps.push_back(protos[i] - protos[i - 1]);
        double tau = detail::median(gaps);
        if (tau > 0.0) return tau;
        double sum = 0.0;
        std::size_t count = 0;
        for (double g : gaps)
            if (g > 0.0) {
                sum += g;
                ++count;
            }
        return count ? sum / static_cast<double>(count) : 1.0;
    }

    double encode_minmax(double x) const {
        if (hi_ == lo_) return 0.5;
        return std::clamp((x - lo_) / (hi_ - lo_), 0.0, 1.0);
    }

    double decode_minmax(double u) const {
        if (hi_ == lo_) return lo_;
        return lo_ + std::clamp(u, 0.0, 1.0) * (hi_ - lo_);
    }

    Matrix encode_ple(std::span<const double> values) const {
        const std::size_t bins = edges_.size() - 1;
        Matrix out(values.size(), bins);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double x = values[i];
            for (std::size_t t = 0; t < bins; ++t) {
                const double lo = edges_[t];
                const double hi = edges_[t + 1];
                if (x >= hi)
                    out(i, t) = 1.0;
                else if (x < lo)
                    out(i, t) = 0.0;
                else
                    out(i, t) = (x - lo) / (hi - lo);
            }
        }
        return out;
    }

    double decode_ple(std::span<const double> row) const {
        // Well-formed rows are ones, at most one fraction, then zeros.
        std::size_t t = 0;
        while (t < row.size() && row[t] >= 1.0) ++t;
        std::size_t active = t;
        if (t < row.size() && row[t] > 0.0) ++t;
        bool well_formed = true;
        for (; t < row.size(); ++t) well_formed = well_formed && row[t] <= 0.0;
        if (well_formed) {
            if (active == row.size()) return edges_.back();
            const double v = std::clamp(row[active], 0.0, 1.0);
            return edges_[active] + v * (edges_[active + 1] - edges_[active]);
        }
        // Off-manifold rows (e.g. drawn by a generative model): accumulate
        // the clamped per-bin fill.
        double x = edges_.front();
        for (std::size_t b = 0; b < row.size(); ++b) x += std::clamp(row[b], 0.0, 1.0) * (edges_[b + 1] - edges_[b]);
        return std::clamp(x, edges_.front(), edges_.back());
    }

    void encode_ptp(double x, std::span<double> out) const {
        double dmin = std::numeric_limits<double>::infinity();
        for (double p : prototypes_) dmin = std::min(dmin, std::abs(x - p));
        double sum = 0.0;
        for (std::size_t i = 0; i < prototypes_.size(); ++i) {
            out[i] = std::exp(-(std::abs(x - prototypes_[i]) - dmin) / temperature_);
            sum += out[i];
        }
        for (double& w : out) w /= sum;
    }

    /// Inverts the softmax-of-distance law: within [p_a, p_b],
    /// ln(w_a / w_b) = (p_a + p_b - 2x) / tau. Every adjacent prototype pair
    /// yields a candidate; the one whose re-encoding is closest in L1 wins.
    double decode_ptp(std::span<const double> row) const {
        std::vector<double> w(row.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            w[i] = std::max(0.0, std::isfinite(row[i]) ? row[i] : 0.0);
            sum += w[i];
        }
        if (sum <= 0.0) {
            double avg = 0.0;
            for (double p : prototypes_) avg += p;
            return avg / static_cast<double>(prototypes_.size());
        }
        for (double& x : w) x /= sum;

        std::vector<double> probe(prototypes_.size());
        double best_x = prototypes_.front();
        double best_err = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a + 1 < prototypes_.size(); ++a) {
            const double pa = prototypes_[a];
            const double pb = prototypes_[a + 1];
            if (!(pb > pa)) continue;
            double x;
            if (w[a] > 0.0 && w[a + 1] > 0.0)
                x = std::clamp(0.5 * (pa + pb - temperature_ * std::log(w[a] / w[a + 1])), pa, pb);
            else
                x = w[a] >= w[a + 1] ? pa : pb;
            encode_ptp(x, probe);
            double err = 0.0;
            for (std::size_t i = 0; i < probe.size(); ++i) err += std::abs(probe[i] - w[i]);
            if (err < best_err) {
                best_err = err;
                best_x = x;
            }
        }
        return best_x;
    }

    EncoderSpec spec_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    detail::Ecdf ecdf_;
    std::vector<double> edges_;
    std::vector<detail::Ecdf> component_cdfs_;
    std::vector<double> prototypes_;
    double temperature_ = 1.0;
    std::vector<std::string> categories_;
};

inline FittedEncoder fit_encoder(const EncoderSpec& spec, const ColumnData& column) {
    return FittedEncoder::fit(spec, column);
}

inline FittedEncoder fit_encoder(const EncoderSpec& spec, std::span<const double> numeric) {
    return FittedEncoder::fit(spec, ColumnData::numeric({numeric.begin(), numeric.end()}));
}

// ----------------------------------------------------------------------------
// Target transforms
// ----------------------------------------------------------------------------

enum class TargetTransformKind { identity, standardize, median_cut, dummy };

struct TargetTransform {
    TargetTransformKind kind = TargetTransformKind::identity;
    double mean = 0.0;
    double std = 1.0;
    double median = 0.0;

    static TargetTransform fit(TargetTransformKind kind, std::span<const double> target) {
        TargetTransform tt;
        tt.kind = kind;
        if (kind == TargetTransformKind::standardize || kind == TargetTransformKind::median_cut) {
            if (target.empty()) throw EncoderError("target transform fitted on an empty target");
            for (double v : target)
                if (!std::isfinite(v)) throw EncoderError("target transform needs a finite numeric target");
        }
        if (kind == TargetTransformKind::standardize) {
            auto ms = detail::mean_std(target);
            if (ms.std == 0.0) throw EncoderError("cannot standardize a constant target (std = 0)");
            tt.mean = ms.mean;
            tt.std = ms.std;
        } else if (kind == TargetTransformKind::median_cut) {
            tt.median = detail::median({target.begin(), target.end()});
        }
        return tt;
    }

    std::vector<double> apply(std::span<const double> target) const {
        std::vector<double> out(target.size());
        for (std::size_t i = 0; i < target.size(); ++i) {
            switch (kind) {
                case TargetTransformKind::identity: out[i] = target[i]; break;
                case TargetTransformKind::standardize: out[i] = (target[i] - mean) / std; break;
                case TargetTransformKind::median_cut: out[i] = target[i] <= median ? 0.0 : 1.0; break;
                case TargetTransformKind::dummy: out[i] = 0.0; break;
            }
        }
        return out;
    }

    /// Inverse of standardize; identity for the other kinds.
    std::vector<double> invert(std::span<const double> z) const {
        std::vector<double> out(z.begin(), z.end());
        if (kind == TargetTransformKind::standardize)
            for (double& v : out) v = v * std + mean;
        return out;
    }
};

/// Fits on `target` and applies to the same values.
inline std::vector<double> transform_target(TargetTransformKind kind, std::span<const double> target) {
    return TargetTransform::fit(kind, target).apply(target);
}

}  // namespace synthbench
