#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cost.hpp"
#include "csv.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"

namespace synthbench {

struct ScoreRow {
    std::string dataset;
    std::string model;
    std::size_t fold = 0;
    std::size_t sample_index = 0;
    std::string metric;
    double value = 0.0;

    auto key() const { return std::tie(dataset, model, metric, fold, sample_index); }
};

using ScoreTable = std::vector<ScoreRow>;

inline const std::vector<std::string>& score_header() {
    static const std::vector<std::string> h{"dataset", "model", "fold", "sample_index", "metric", "value"};
    return h;
}

inline void sort_scores(ScoreTable& t) {
    std::sort(t.begin(), t.end(), [](const ScoreRow& a, const ScoreRow& b) { return a.key() < b.key(); });
}

inline void write_scores_csv(std::ostream& out, const ScoreTable& scores) {
    csv::write_record(out, score_header());
    for (const auto& s : scores)
        csv::write_record(out, {s.dataset, s.model, std::to_string(s.fold), std::to_string(s.sample_index), s.metric,
                                detail::format_double(s.value)});
}

inline ScoreTable parse_scores_csv(std::string_view text, const std::string& origin = "scores") {
    const auto records = csv::parse(text);
    if (records.empty()) return {};
    if (records.front() != score_header()) throw ReportError(origin + ": unexpected header");
    ScoreTable out;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        auto fail = [&](const std::string& what) {
            return ReportError(origin + ": row " + std::to_string(i + 1) + ": " + what);
        };
        if (r.size() != 6) throw fail("expected 6 fields");
        auto fold = detail::parse_int(r[2]);
        auto sample = detail::parse_int(r[3]);
        auto value = detail::parse_double(r[5]);
        if (!fold || *fold < 0 || !sample || *sample < 0) throw fail("bad fold or sample index");
        if (!value) throw fail("bad value '" + r[5] + "'");
        out.push_back({r[0], r[1], static_cast<std::size_t>(*fold), static_cast<std::size_t>(*sample), r[4], *value});
    }
    return out;
}

inline ScoreTable read_scores_csv(const std::string& path) { return parse_scores_csv(csv::read_file(path), path); }

// ----------------------------------------------------------------------------
// Aggregation
// ----------------------------------------------------------------------------

struct AggregateRow {
    std::string dataset;
    std::string model;
    std::string metric;
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
    /// Every (fold, sample) cell of the protocol is present.
    bool complete = false;
};

/// Mean and population std per (dataset, model, metric).
inline std::vector<AggregateRow> aggregate(const ScoreTable& scores, std::size_t n_folds = 3, std::size_t n_samples = 5) {
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<const ScoreRow*>> groups;
    for (const auto& s : scores) groups[{s.dataset, s.model, s.metric}].push_back(&s);
    std::vector<AggregateRow> out;
    for (const auto& [key, rows] : groups) {
        std::vector<double> v;
        std::set<std::pair<std::size_t, std::size_t>> cells;
        for (const auto* r : rows) {
            v.push_back(r->value);
            if (r->fold < n_folds && r->sample_index < n_samples) cells.insert({r->fold, r->sample_index});
        }
        const auto ms = detail::mean_std(v);
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), ms.mean, ms.std, v.size(),
                       cells.size() == n_folds * n_samples});
    }
    return out;
}

struct Quartiles {
    std::string model;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    std::size_t count = 0;
};

/// Linear-interpolation quartiles per model over every cell of `metric`.
inline std::vector<Quartiles> quartile_summary(const ScoreTable& scores, const std::string& metric) {
    std::map<std::string, std::vector<double>> by_model;
    for (const auto& s : scores)
        if (s.metric == metric) by_model[s.model].push_back(s.value);
    std::vector<Quartiles> out;
    for (auto& [model, v] : by_model) {
        std::sort(v.begin(), v.end());
        out.push_back({model, detail::percentile_sorted(v, 0.25), detail::percentile_sorted(v, 0.5),
                       detail::percentile_sorted(v, 0.75), v.size()});
    }
    return out;
}

// ----------------------------------------------------------------------------
// Ranks, Friedman statistic, Nemenyi critical difference
// ----------------------------------------------------------------------------

enum class Direction { lower_better, higher_better };

/// Two-tailed Nemenyi q_0.05 for k = 2..10 models (studentized range / sqrt 2),
/// as tabulated by Demsar (2006).
inline std::optional<double> nemenyi_q05(std::size_t k) {
    static constexpr double q[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
    if (k < 2 || k > 10) return std::nullopt;
    return q[k - 2];
}

inline double critical_difference(std::size_t k, std::size_t n_blocks) {
    const auto q = nemenyi_q05(k);
    if (!q || n_blocks == 0) return std::numeric_limits<double>::quiet_NaN();
    const double kd = static_cast<double>(k);
    return *q * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n_blocks)));
}

/// Ranks 1..k, best first; tied values share their average rank.
inline std::vector<double> rank_values(const std::vector<double>& values, Direction dir) {
    const std::size_t k = values.size();
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dir == Direction::lower_better ? values[a] < values[b] : values[a] > values[b];
    });
    std::vector<double> ranks(k);
    for (std::size_t i = 0; i < k;) {
        std::size_t j = i;
        while (j < k && values[order[j]] == values[order[i]]) ++j;
        const double avg = static_cast<double>(i + 1 + j) / 2.0;
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
        i = j;
    }
    return ranks;
}

struct RankResult {
    std::string metric;
    /// (model, average rank), best first.
    std::vector<std::pair<std::string, double>> average_ranks;
    std::size_t k = 0;
    std::size_t n_blocks = 0;
    double friedman_chi2 = 0.0;
    /// NaN when no q value is tabulated for k.
    double critical_difference = 0.0;
    /// Model pairs whose average ranks differ by less than the CD.
    std::vector<std::pair<std::string, std::string>> bridged;
};

/// Blocks are (dataset, fold); a model's value in a block is the mean over
/// its samples. Every block must hold every model.
inline RankResult rank_models(const ScoreTable& scores, const std::string& metric, Direction dir) {
    std::set<std::string> models;
    std::map<std::pair<std::string, std::size_t>, std::map<std::string, std::vector<double>>> blocks;
    for (const auto& s : scores) {
        if (s.metric != metric) continue;
        models.insert(s.model);
        blocks[{s.dataset, s.fold}][s.model].push_back(s.value);
    }
    RankResult res;
    res.metric = metric;
    res.k = models.size();
    res.n_blocks = blocks.size();
    if (res.k < 2) throw ReportError("rank_models: need at least 2 models for '" + metric + "'");
    std::map<std::string, double> rank_sum;
    for (const auto& [block, per_model] : blocks) {
        if (per_model.size() != res.k)
            throw ReportError("rank_models: block (" + block.first + ", fold " + std::to_string(block.second) +
                              ") lacks some models for '" + metric + "'");
        std::vector<double> values;
        for (const auto& m : models) {
            const auto& v = per_model.at(m);
            double sum = 0.0;
            for (double x : v) sum += x;
            values.push_back(sum / static_cast<double>(v.size()));
        }
        const auto ranks = rank_values(values, dir);
        std::size_t i = 0;
        for (const auto& m : models) rank_sum[m] += ranks[i++];
    }
    const double n = static_cast<double>(res.n_blocks);
    const double k = static_cast<double>(res.k);
    double sum_sq = 0.0;
    for (const auto& m : models) {
        const double r = rank_sum[m] / n;
        res.average_ranks.emplace_back(m, r);
        sum_sq += r * r;
    }
    std::stable_sort(res.average_ranks.begin(), res.average_ranks.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    res.friedman_chi2 = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    res.critical_difference = critical_difference(res.k, res.n_blocks);
    if (!std::isnan(res.critical_difference)) {
        for (std::size_t i = 0; i < res.average_ranks.size(); ++i)
            for (std::size_t j = i + 1; j < res.average_ranks.size(); ++j)
                if (res.average_ranks[j].second - res.average_ranks[i].second < res.critical_difference)
                    res.bridged.emplace_back(res.average_ranks[i].first, res.average_ranks[j].first);
    }
    return res;
}

/// Ranking direction of the standard metrics. dcr_rate is ranked on its
/// distance to one half, see ranking_values().
inline Direction metric_direction(const std::string& metric) {
    if (metric == "c2st" || metric == "dcr_rate") return Direction::lower_better;
    return Direction::higher_better;
}

/// Score table prepared for ranking: dcr_rate becomes |dcr_rate - 0.5|.
inline ScoreTable ranking_values(ScoreTable scores) {
    for (auto& s : scores)
        if (s.metric == "dcr_rate") s.value = std::abs(s.value - 0.5);
    return scores;
}

// ----------------------------------------------------------------------------
// Emission
// ----------------------------------------------------------------------------

struct ReportOptions {
    bool svg = true;
    std::size_t n_folds = 3;
    std::size_t n_samples = 5;
};

namespace detail {

inline std::string file_safe(std::string_view s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
    return out.empty() ? "_" : out;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ReportError("cannot write '" + p.string() + "'");
    out << text;
    if (!out) throw ReportError("write failed for '" + p.string() + "'");
}

inline std::string svg_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

/// Rank axis 1..k, one tick per model, and a bar of length CD.
inline std::string cd_svg(const RankResult& r) {
    const double width = 640.0;
    const double left = 60.0;
    const double right = width - 60.0;
    const double axis_y = 60.0;
    const double k = static_cast<double>(r.k);
    auto x_of = [&](double rank) { return left + (rank - 1.0) / std::max(k - 1.0, 1.0) * (right - left); };
    const double height = axis_y + 40.0 + 22.0 * static_cast<double>(r.average_ranks.size());
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_fixed(width, 0) << "\" height=\""
      << format_fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<text x=\"" << format_fixed(left, 1) << "\" y=\"16\">" << svg_escape(r.metric) << ": average rank (N = "
      << r.n_blocks << ")</text>\n";
    s << "<line x1=\"" << format_fixed(left, 1) << "\" y1=\"" << format_fixed(axis_y, 1) << "\" x2=\""
      << format_fixed(right, 1) << "\" y2=\"" << format_fixed(axis_y, 1) << "\" stroke=\"black\"/>\n";
    for (std::size_t i = 1; i <= r.k; ++i) {
        const double x = x_of(static_cast<double>(i));
        s << "<line x1=\"" << format_fixed(x, 1) << "\" y1=\"" << format_fixed(axis_y - 5, 1) << "\" x2=\""
          << format_fixed(x, 1) << "\" y2=\"" << format_fixed(axis_y, 1) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << format_fixed(x - 3, 1) << "\" y=\"" << format_fixed(axis_y - 8, 1) << "\">" << i
          << "</text>\n";
    }
    if (!std::isnan(r.critical_difference)) {
        const double x0 = x_of(1.0);
        const double x1 = x_of(1.0 + r.critical_difference);
        s << "<line x1=\"" << format_fixed(x0, 1) << "\" y1=\"30\" x2=\"" << format_fixed(std::min(x1, right), 1)
          << "\" y2=\"30\" stroke=\"black\" stroke-width=\"3\"/>\n";
        s << "<text x=\"" << format_fixed(std::min(x1, right) + 6, 1) << "\" y=\"34\">CD = "
          << format_fixed(r.critical_difference, 3) << "</text>\n";
    }
    double y = axis_y + 24.0;
    for (const auto& [model, rank] : r.average_ranks) {
        const double x = x_of(rank);
        s << "<line x1=\"" << format_fixed(x, 1) << "\" y1=\"" << format_fixed(axis_y, 1) << "\" x2=\""
          << format_fixed(x, 1) << "\" y2=\"" << format_fixed(y - 4, 1) << "\" stroke=\"gray\"/>\n";
        s << "<text x=\"" << format_fixed(x + 4, 1) << "\" y=\"" << format_fixed(y, 1) << "\">" << svg_escape(model)
          << " (" << format_fixed(rank, 2) << ")</text>\n";
        y += 22.0;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace detail

/// Writes aggregate, quartile, cost, rank and critical-difference CSVs plus
/// summary.md (and one SVG per ranked metric) into out_dir. Returns the
/// paths written, in a fixed order.
inline std::vector<std::filesystem::path> emit_report(const ScoreTable& scores, const std::vector<CostRow>& costs,
                                                      const std::filesystem::path& out_dir,
                                                      const ReportOptions& opts = {}) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ReportError("cannot create '" + out_dir.string() + "': " + ec.message());
    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        detail::write_text(out_dir / name, text);
        written.push_back(out_dir / name);
    };

    ScoreTable sorted = scores;
    sort_scores(sorted);
    std::set<std::string> metrics;
    std::set<std::string> datasets;
    for (const auto& s : sorted) {
        metrics.insert(s.metric);
        datasets.insert(s.dataset);
    }
    const auto agg = aggregate(sorted, opts.n_folds, opts.n_samples);

    std::ostringstream md;
    md << "# Benchmark summary\n\n";
    if (sorted.empty()) md << "No scores.\n\n";

    // aggregate.csv and one file per dataset
    {
        std::ostringstream all;
        csv::write_record(all, {"dataset", "model", "metric", "mean", "std", "count", "complete"});
        for (const auto& a : agg)
            csv::write_record(all, {a.dataset, a.model, a.metric, detail::format_double(a.mean),
                                    detail::format_double(a.std), std::to_string(a.count), a.complete ? "true" : "false"});
        emit("aggregate.csv", all.str());
        for (const auto& d : datasets) {
            std::ostringstream one;
            csv::write_record(one, {"model", "metric", "mean", "std", "count", "complete"});
            md << "## Dataset " << d << "\n\n| model | metric | mean | std | cells |\n|---|---|---|---|---|\n";
            for (const auto& a : agg) {
                if (a.dataset != d) continue;
                csv::write_record(one, {a.model, a.metric, detail::format_double(a.mean), detail::format_double(a.std),
                                        std::to_string(a.count), a.complete ? "true" : "false"});
                md << "| " << a.model << " | " << a.metric << " | " << detail::format_fixed(a.mean, 3) << " | "
                   << detail::format_fixed(a.std, 3) << " | " << a.count << (a.complete ? "" : " (incomplete)")
                   << " |\n";
            }
            md << '\n';
            emit("dataset_" + detail::file_safe(d) + ".csv", one.str());
        }
    }

    // quartiles.csv
    {
        std::ostringstream q;
        csv::write_record(q, {"metric", "model", "p25", "p50", "p75", "count"});
        for (const auto& m : metrics) {
            md << "## Quartiles: " << m << "\n\n| model | P25 | P50 | P75 |\n|---|---|---|---|\n";
            for (const auto& r : quartile_summary(sorted, m)) {
                csv::write_record(q, {m, r.model, detail::format_double(r.p25), detail::format_double(r.p50),
                                      detail::format_double(r.p75), std::to_string(r.count)});
                md << "| " << r.model << " | " << detail::format_fixed(r.p25, 3) << " | "
                   << detail::format_fixed(r.p50, 3) << " | " << detail::format_fixed(r.p75, 3) << " |\n";
            }
            md << '\n';
        }
        emit("quartiles.csv", q.str());
    }

    // cost.csv
    {
        std::vector<CostRow> c = costs;
        std::sort(c.begin(), c.end(), [](const CostRow& a, const CostRow& b) {
            return std::tie(a.model, a.dataset) < std::tie(b.model, b.dataset);
        });
        std::ostringstream out;
        write_cost_csv(out, c);
        emit("cost.csv", out.str());
        if (!c.empty()) {
            md << "## Tuning cost\n\n| model | dataset | device seconds | kWh | CO2 (kg) |\n|---|---|---|---|---|\n";
            for (const auto& r : c)
                md << "| " << r.model << " | " << r.dataset << " | " << detail::format_fixed(r.cost.device_seconds, 1)
                   << " | " << detail::format_fixed(r.cost.kwh, 6) << " | " << detail::format_fixed(r.cost.co2_kg, 6)
                   << " |\n";
            md << '\n';
        }
    }

    // ranks.csv, cd.csv, cd_pairs.csv
    {
        std::ostringstream ranks;
        std::ostringstream cd;
        std::ostringstream pairs;
        csv::write_record(ranks, {"metric", "model", "avg_rank"});
        csv::write_record(cd, {"metric", "k", "n_blocks", "friedman_chi2", "critical_difference"});
        csv::write_record(pairs, {"metric", "model_a", "model_b"});
        const ScoreTable rankable = ranking_values(sorted);
        std::vector<RankResult> svgs;
        for (const auto& m : metrics) {
            RankResult r;
            try {
                r = rank_models(rankable, m, metric_direction(m));
            } catch (const ReportError& e) {
                md << "## Ranks: " << m << "\n\nnot ranked: " << e.what() << "\n\n";
                continue;
            }
            md << "## Ranks: " << m << "\n\n| model | average rank |\n|---|---|\n";
            for (const auto& [model, rank] : r.average_ranks) {
                csv::write_record(ranks, {m, model, detail::format_double(rank)});
                md << "| " << model << " | " << detail::format_fixed(rank, 2) << " |\n";
            }
            const std::string cd_text =
                std::isnan(r.critical_difference) ? "" : detail::format_double(r.critical_difference);
            csv::write_record(cd, {m, std::to_string(r.k), std::to_string(r.n_blocks),
                                   detail::format_double(r.friedman_chi2), cd_text});
            for (const auto& [a, b] : r.bridged) csv::write_record(pairs, {m, a, b});
            md << "\nFriedman chi2 = " << detail::format_fixed(r.friedman_chi2, 3) << ", N = " << r.n_blocks
               << ", CD = " << (cd_text.empty() ? "n/a" : detail::format_fixed(r.critical_difference, 3)) << "\n\n";
            svgs.push_back(std::move(r));
        }
        emit("ranks.csv", ranks.str());
        emit("cd.csv", cd.str());
        emit("cd_pairs.csv", pairs.str());
        if (opts.svg)
            for (const auto& r : svgs) emit("cd_" + detail::file_safe(r.metric) + ".svg", detail::cd_svg(r));
    }

    emit("summary.md", md.str());
    return written;
}

}  // namespace synthbench
