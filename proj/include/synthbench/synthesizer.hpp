#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "dataset.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace synthbench {

using ParamValue = std::variant<std::int64_t, double, std::string>;
using Config = std::map<std::string, ParamValue>;

inline std::string to_string(const ParamValue& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&v)) return detail::format_double(*d);
    return std::get<std::string>(v);
}

inline bool param_equal(const ParamValue& a, const ParamValue& b) {
    if (a.index() == b.index()) return a == b;
    auto num = [](const ParamValue& v) -> std::optional<double> {
        if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
        if (auto* d = std::get_if<double>(&v)) return *d;
        return std::nullopt;
    };
    auto x = num(a);
    auto y = num(b);
    return x && y && *x == *y;
}

inline double as_double(const ParamValue& v, const std::string& name) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto parsed = detail::parse_double(std::get<std::string>(v))) return *parsed;
    throw GeneratorError("parameter '" + name + "' must be numeric");
}

inline std::int64_t as_int(const ParamValue& v, const std::string& name) {
    const double d = as_double(v, name);
    if (d != std::floor(d)) throw GeneratorError("parameter '" + name + "' must be an integer");
    return static_cast<std::int64_t>(d);
}

inline std::int64_t config_int(const Config& c, const std::string& name, std::int64_t fallback) {
    auto it = c.find(name);
    return it == c.end() ? fallback : as_int(it->second, name);
}

inline double config_double(const Config& c, const std::string& name, double fallback) {
    auto it = c.find(name);
    return it == c.end() ? fallback : as_double(it->second, name);
}

inline std::string config_string(const Config& c, const std::string& name, const std::string& fallback) {
    auto it = c.find(name);
    return it == c.end() ? fallback : to_string(it->second);
}

struct StepReport {
    std::size_t step_index = 0;
    bool early_stop = false;
    double wall_seconds = 0.0;
};

/// Training contract shared by built-in and bridged generators:
/// prepare_fit once, train_step any number of times, then sample.
class Synthesizer {
public:
    virtual ~Synthesizer() = default;

    virtual void prepare_fit(const Config& config, const Table& train, std::uint64_t seed) = 0;
    /// One unit of training. Generators with nothing to train report
    /// early_stop on their first step.
    virtual StepReport train_step() = 0;
    /// n rows with the training schema, deterministic in (state, n, seed).
    virtual Table sample(std::size_t n, std::uint64_t seed) = 0;

    virtual std::string name() const = 0;
};

namespace detail {

class NoTrainingSynthesizer : public Synthesizer {
public:
    void prepare_fit(const Config& config, const Table& train, std::uint64_t seed) override {
        train_ = std::make_unique<Table>(train);
        seed_ = seed;
        steps_ = 0;
        configure(config);
    }

    StepReport train_step() override {
        require_fit();
        return {++steps_, true, 0.0};
    }

protected:
    virtual void configure(const Config&) {}

    const Table& train() const {
        require_fit();
        return *train_;
    }

    void require_fit() const {
        if (!train_) throw GeneratorError(name() + ": prepare_fit has not been called");
    }

    std::uint64_t seed_ = 0;

private:
    std::unique_ptr<Table> train_;
    std::size_t steps_ = 0;
};

}  // namespace detail

/// n train rows taken from consecutive random permutations of train: no
/// row repeats until every row has been used.
inline Table traincopy_sample(const Table& train, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw GeneratorError("traincopy: n must be >= 1");
    Rng rng = Rng(seed).split("traincopy");
    std::vector<std::size_t> idx;
    idx.reserve(n);
    std::vector<std::size_t> perm(train.n_rows());
    for (std::uint64_t pass = 0; idx.size() < n; ++pass) {
        std::iota(perm.begin(), perm.end(), 0);
        Rng pass_rng = rng.split(pass);
        pass_rng.shuffle(std::span<std::size_t>(perm));
        const std::size_t take = std::min(perm.size(), n - idx.size());
        idx.insert(idx.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return train.select_rows(idx);
}

/// Every column drawn independently from its empirical marginal.
inline Table marginals_sample(const Table& train, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw GeneratorError("marginals: n must be >= 1");
    const std::size_t cols = train.n_cols();
    std::vector<double> cells(n * cols);
    Rng base = Rng(seed).split("marginals");
    for (std::size_t c = 0; c < cols; ++c) {
        Rng rng = base.split(c);
        for (std::size_t r = 0; r < n; ++r) cells[r * cols + c] = train.at(rng.below(train.n_rows()), c);
    }
    return train.with_cells(std::move(cells));
}

class TrainCopy final : public detail::NoTrainingSynthesizer {
public:
    Table sample(std::size_t n, std::uint64_t seed) override {
        return traincopy_sample(train(), n, detail::mix64(seed_ ^ detail::mix64(seed)));
    }
    std::string name() const override { return "traincopy"; }
};

class Marginals final : public detail::NoTrainingSynthesizer {
public:
    Table sample(std::size_t n, std::uint64_t seed) override {
        return marginals_sample(train(), n, detail::mix64(seed_ ^ detail::mix64(seed)));
    }
    std::string name() const override { return "marginals"; }
};

}  // namespace synthbench
