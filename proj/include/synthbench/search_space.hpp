#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csv.hpp"
#include "dataset.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "synthesizer.hpp"

namespace synthbench {

struct Choice {
    std::vector<ParamValue> values;
};

/// exp(Uniform(ln lo, ln hi)) rounded to a multiple of q.
struct QLogUniform {
    double lo = 0.0;
    double hi = 0.0;
    double q = 0.0;

    std::int64_t k_min() const { return static_cast<std::int64_t>(std::ceil(lo / q - 1e-9)); }
    std::int64_t k_max() const { return static_cast<std::int64_t>(std::floor(hi / q + 1e-9)); }
};

/// Integers lo..hi inclusive.
struct GridInt {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

struct ParamSpec {
    std::string name;
    std::variant<Choice, QLogUniform, GridInt> dist;

    bool is_enumerable() const { return !std::holds_alternative<QLogUniform>(dist); }

    std::size_t cardinality() const {
        if (auto* c = std::get_if<Choice>(&dist)) return c->values.size();
        if (auto* g = std::get_if<GridInt>(&dist)) return static_cast<std::size_t>(g->hi - g->lo + 1);
        return 0;
    }

    /// Whether `v` can be produced by this parameter (q-multiples checked to
    /// a relative 1e-9).
    bool contains(const ParamValue& v) const {
        if (auto* c = std::get_if<Choice>(&dist))
            return std::any_of(c->values.begin(), c->values.end(), [&](const ParamValue& x) { return param_equal(x, v); });
        if (std::holds_alternative<std::string>(v)) return false;
        const double x = as_double(v, name);
        if (auto* g = std::get_if<GridInt>(&dist))
            return x == std::floor(x) && x >= static_cast<double>(g->lo) && x <= static_cast<double>(g->hi);
        const auto& q = std::get<QLogUniform>(dist);
        const double k = std::round(x / q.q);
        if (std::abs(x / q.q - k) > 1e-9 * std::max(1.0, k)) return false;
        return k >= static_cast<double>(q.k_min()) && k <= static_cast<double>(q.k_max());
    }

    void validate() const {
        if (name.empty()) throw TunerError("parameter with empty name");
        if (auto* c = std::get_if<Choice>(&dist)) {
            if (c->values.empty()) throw TunerError("parameter '" + name + "': empty choice list");
        } else if (auto* g = std::get_if<GridInt>(&dist)) {
            if (!(g->lo < g->hi)) throw TunerError("parameter '" + name + "': grid needs lo < hi");
        } else {
            const auto& q = std::get<QLogUniform>(dist);
            if (!(q.lo > 0 && q.lo < q.hi)) throw TunerError("parameter '" + name + "': qloguniform needs 0 < lo < hi");
            if (!(q.q > 0)) throw TunerError("parameter '" + name + "': qloguniform needs q > 0");
            if (q.k_min() > q.k_max())
                throw TunerError("parameter '" + name + "': no multiple of q lies in [lo, hi]");
        }
    }
};

struct SearchSpace {
    std::vector<ParamSpec> params;
    std::size_t max_trials = 1;
    /// Per-trial wall-time budget in seconds; 0 means unbounded.
    double time_budget_s = 0.0;
    /// 0 means unbounded.
    std::size_t max_steps = 0;
    std::size_t grace_steps = 5;
    /// Enumerate every grid point instead of sampling.
    bool exhaust_grid = false;

    const ParamSpec* find(std::string_view name) const {
        for (const auto& p : params)
            if (p.name == name) return &p;
        return nullptr;
    }

    void validate() const {
        std::set<std::string> names;
        for (const auto& p : params) {
            p.validate();
            if (!names.insert(p.name).second) throw TunerError("duplicate parameter '" + p.name + "'");
            if (exhaust_grid && !p.is_enumerable())
                throw TunerError("exhaust_grid: parameter '" + p.name + "' is continuous");
        }
        if (max_trials < 1) throw TunerError("max_trials must be >= 1");
        if (time_budget_s < 0) throw TunerError("time_budget must be >= 0");
    }

    std::size_t grid_size() const {
        std::size_t n = 1;
        for (const auto& p : params) n *= p.cardinality();
        return n;
    }

    /// Trials per fold: max_trials, capped by the grid size when exhausting.
    std::size_t trial_count() const { return exhaust_grid ? std::min(max_trials, grid_size()) : max_trials; }

    bool contains(const Config& c) const {
        for (const auto& p : params) {
            auto it = c.find(p.name);
            if (it == c.end() || !p.contains(it->second)) return false;
        }
        return true;
    }
};

inline ParamValue sample_param(const ParamSpec& p, Rng& rng) {
    if (auto* c = std::get_if<Choice>(&p.dist)) return c->values[rng.below(c->values.size())];
    if (auto* g = std::get_if<GridInt>(&p.dist)) return ParamValue{rng.between(g->lo, g->hi)};
    const auto& q = std::get<QLogUniform>(p.dist);
    const double x = std::exp(rng.uniform(std::log(q.lo), std::log(q.hi)));
    const auto k = std::clamp(static_cast<std::int64_t>(std::llround(x / q.q)), q.k_min(), q.k_max());
    return ParamValue{static_cast<double>(k) * q.q};
}

/// One draw per parameter, in declaration order.
inline Config sample_config(const SearchSpace& space, Rng& rng) {
    Config c;
    for (const auto& p : space.params) c[p.name] = sample_param(p, rng);
    return c;
}

/// The i-th point of the grid, last parameter varying fastest.
inline Config grid_config(const SearchSpace& space, std::size_t i) {
    if (i >= space.grid_size()) throw TunerError("grid index out of range");
    Config c;
    for (std::size_t j = space.params.size(); j-- > 0;) {
        const auto& p = space.params[j];
        const std::size_t card = p.cardinality();
        const std::size_t digit = i % card;
        i /= card;
        if (auto* ch = std::get_if<Choice>(&p.dist))
            c[p.name] = ch->values[digit];
        else
            c[p.name] = ParamValue{std::get<GridInt>(p.dist).lo + static_cast<std::int64_t>(digit)};
    }
    return c;
}

/// Configuration of a trial; independent of execution order.
inline Config trial_config(const SearchSpace& space, std::uint64_t seed, std::size_t fold, std::size_t trial_id) {
    if (space.exhaust_grid) return grid_config(space, trial_id);
    Rng rng = Rng(seed).split("trial").split(fold).split(trial_id);
    return sample_config(space, rng);
}

// ----------------------------------------------------------------------------
// Text format
// ----------------------------------------------------------------------------

/// "90s", "20m", "1.5h", or plain seconds.
inline double parse_duration(std::string_view s) {
    s = detail::trim(s);
    double scale = 1.0;
    if (!s.empty()) {
        switch (s.back()) {
            case 's': s.remove_suffix(1); break;
            case 'm': scale = 60.0; s.remove_suffix(1); break;
            case 'h': scale = 3600.0; s.remove_suffix(1); break;
            default: break;
        }
    }
    auto v = detail::parse_double(s);
    if (!v || *v < 0 || !std::isfinite(*v)) throw TunerError("invalid duration '" + std::string(s) + "'");
    return *v * scale;
}

inline std::string format_duration(double seconds) {
    if (seconds > 0 && std::fmod(seconds, 3600.0) == 0.0) return detail::format_double(seconds / 3600.0) + "h";
    if (seconds > 0 && std::fmod(seconds, 60.0) == 0.0) return detail::format_double(seconds / 60.0) + "m";
    return detail::format_double(seconds) + "s";
}

/// Space-file token for a value; doubles always carry a '.' or exponent so
/// they read back as doubles.
inline std::string format_param_token(const ParamValue& v) {
    if (auto* s = std::get_if<std::string>(&v)) return detail::quote_token(*s);
    std::string t = to_string(v);
    if (std::holds_alternative<double>(v) && t.find_first_of(".eEn") == std::string::npos) t += ".0";
    return t;
}

namespace detail {

inline std::string space_token(std::string_view& rest, std::size_t line) {
    rest = trim(rest);
    const bool quoted = !rest.empty() && rest.front() == '"';
    std::string tok;
    try {
        tok = read_token(rest, line);
    } catch (const DatasetError&) {
        throw TunerError("line " + std::to_string(line) + ": unterminated quote");
    }
    if (tok.empty() && !quoted) throw TunerError("line " + std::to_string(line) + ": expected a token");
    return tok;
}

inline ParamValue read_param_token(std::string_view& rest, std::size_t line) {
    rest = trim(rest);
    const bool quoted = !rest.empty() && rest.front() == '"';
    std::string tok = space_token(rest, line);
    if (quoted) return tok;
    if (auto i = parse_int(tok)) return ParamValue{static_cast<std::int64_t>(*i)};
    if (auto d = parse_double(tok)) return ParamValue{*d};
    return tok;
}

inline double read_number(std::string_view& rest, std::size_t line, const std::string& what) {
    const std::string tok = space_token(rest, line);
    auto v = parse_double(tok);
    if (!v) throw TunerError("line " + std::to_string(line) + ": " + what + " expects a number, got '" + tok + "'");
    return *v;
}

inline std::int64_t read_integer(std::string_view& rest, std::size_t line, const std::string& what) {
    const std::string tok = space_token(rest, line);
    auto v = parse_int(tok);
    if (!v) throw TunerError("line " + std::to_string(line) + ": " + what + " expects an integer, got '" + tok + "'");
    return *v;
}

}  // namespace detail

/// Line-oriented format:
///   max_trials 50
///   time_budget 20m
///   param "lr" qloguniform 1e-4 1e-2 1e-4
///   param "encoder" choice "cdf" "ple_cdf"
///   param "k" grid 2 20
inline SearchSpace parse_search_space(std::string_view text) {
    SearchSpace space;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            else if (line[i] == '#' && !quoted) {
                line = line.substr(0, i);
                break;
            }
        }
        line = detail::trim(line);
        if (line.empty()) continue;
        std::string_view rest = line;
        const std::string key = detail::space_token(rest, line_no);
        auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
        if (key == "max_trials") {
            const auto v = detail::read_integer(rest, line_no, key);
            if (v < 1) throw TunerError(where() + "max_trials must be >= 1");
            space.max_trials = static_cast<std::size_t>(v);
        } else if (key == "max_steps") {
            const auto v = detail::read_integer(rest, line_no, key);
            if (v < 0) throw TunerError(where() + "max_steps must be >= 0");
            space.max_steps = static_cast<std::size_t>(v);
        } else if (key == "grace_steps") {
            const auto v = detail::read_integer(rest, line_no, key);
            if (v < 0) throw TunerError(where() + "grace_steps must be >= 0");
            space.grace_steps = static_cast<std::size_t>(v);
        } else if (key == "time_budget") {
            space.time_budget_s = parse_duration(detail::space_token(rest, line_no));
        } else if (key == "exhaust_grid") {
            const std::string v = detail::space_token(rest, line_no);
            if (v != "true" && v != "false") throw TunerError(where() + "exhaust_grid expects true or false");
            space.exhaust_grid = v == "true";
        } else if (key == "param") {
            ParamSpec p;
            p.name = detail::space_token(rest, line_no);
            const std::string kind = detail::space_token(rest, line_no);
            if (kind == "choice") {
                Choice c;
                while (!detail::trim(rest).empty()) c.values.push_back(detail::read_param_token(rest, line_no));
                p.dist = std::move(c);
            } else if (kind == "qloguniform") {
                QLogUniform q;
                q.lo = detail::read_number(rest, line_no, kind);
                q.hi = detail::read_number(rest, line_no, kind);
                q.q = detail::read_number(rest, line_no, kind);
                p.dist = q;
            } else if (kind == "grid") {
                GridInt g;
                g.lo = detail::read_integer(rest, line_no, kind);
                g.hi = detail::read_integer(rest, line_no, kind);
                p.dist = g;
            } else {
                throw TunerError(where() + "unknown parameter kind '" + kind + "'");
            }
            space.params.push_back(std::move(p));
        } else {
            throw TunerError(where() + "unknown key '" + key + "'");
        }
        if (!detail::trim(rest).empty()) throw TunerError(where() + "unexpected trailing text");
    }
    space.validate();
    return space;
}

inline SearchSpace load_search_space(const std::string& path) {
    try {
        return parse_search_space(csv::read_file(path));
    } catch (const TunerError& e) {
        throw TunerError(path + ": " + e.what());
    }
}

inline std::string format_search_space(const SearchSpace& space) {
    std::ostringstream out;
    out << "max_trials " << space.max_trials << '\n';
    if (space.time_budget_s > 0) out << "time_budget " << format_duration(space.time_budget_s) << '\n';
    if (space.max_steps > 0) out << "max_steps " << space.max_steps << '\n';
    if (space.grace_steps != 5) out << "grace_steps " << space.grace_steps << '\n';
    if (space.exhaust_grid) out << "exhaust_grid true\n";
    for (const auto& p : space.params) {
        out << "param " << detail::quote_token(p.name);
        if (auto* c = std::get_if<Choice>(&p.dist)) {
            out << " choice";
            for (const auto& v : c->values) out << ' ' << format_param_token(v);
        } else if (auto* g = std::get_if<GridInt>(&p.dist)) {
            out << " grid " << g->lo << ' ' << g->hi;
        } else {
            const auto& q = std::get<QLogUniform>(p.dist);
            out << " qloguniform " << detail::format_double(q.lo) << ' ' << detail::format_double(q.hi) << ' '
                << detail::format_double(q.q);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace synthbench
