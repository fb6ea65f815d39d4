#pragma once

// Test data generators shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "synthbench/synthbench.hpp"

namespace sbtest {

using namespace synthbench;

using TempDir = synthbench::detail::ScratchDir;

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline Table parse_table(const std::string& csv_text, const std::string& schema_text) {
    return parse_csv_table(csv_text, parse_schema(schema_text));
}

// ----------------------------------------------------------------------------
// Random mixed tables
// ----------------------------------------------------------------------------

struct RandomTableOptions {
    std::size_t min_rows = 2;
    std::size_t max_rows = 100;
    std::size_t max_numeric = 3;
    std::size_t max_categorical = 2;
    /// Numerics on a small integer grid, so ties and duplicates are common.
    bool integer_grid = true;
    int grid_max = 9;
};

/// Schema and vocabularies of a random mixed table; at least one column.
inline Table random_prototype(Rng& rng, const RandomTableOptions& o) {
    const std::size_t n_num = static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(o.max_numeric)));
    std::size_t n_cat = static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(o.max_categorical)));
    if (n_num + n_cat == 0) n_cat = 1;
    Schema schema;
    schema.dataset_name = "random";
    schema.task = TaskKind::regression;
    Table::Vocabularies vocab;
    for (std::size_t c = 0; c < n_num; ++c) {
        schema.columns.push_back({"n" + std::to_string(c), ColumnKind::numeric, false});
        vocab.emplace_back();
    }
    for (std::size_t c = 0; c < n_cat; ++c) {
        schema.columns.push_back({"k" + std::to_string(c), ColumnKind::categorical, false});
        const auto size = static_cast<std::size_t>(rng.between(2, 4));
        std::vector<std::string> v;
        for (std::size_t i = 0; i < size; ++i) v.push_back(std::string(1, static_cast<char>('a' + i)));
        vocab.push_back(std::move(v));
    }
    std::vector<double> cells(schema.columns.size(), 0.0);
    return Table(std::move(schema), std::move(vocab), std::move(cells));
}

/// Random rows in the prototype's schema.
inline Table random_rows(const Table& proto, std::size_t n, Rng& rng, const RandomTableOptions& o) {
    std::vector<double> cells(n * proto.n_cols());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < proto.n_cols(); ++c) {
            double v;
            if (!proto.is_numeric(c))
                v = static_cast<double>(rng.below(proto.vocabulary(c).size()));
            else if (o.integer_grid)
                v = static_cast<double>(rng.between(0, o.grid_max));
            else
                v = rng.normal() * 3.0 + 1.0;
            cells[r * proto.n_cols() + c] = v;
        }
    return proto.with_cells(std::move(cells));
}

inline std::size_t random_size(Rng& rng, const RandomTableOptions& o) {
    return static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(o.min_rows), static_cast<std::int64_t>(o.max_rows)));
}

// ----------------------------------------------------------------------------
// Adult-like census data: 6 numeric and 9 categorical columns, binary target
// ----------------------------------------------------------------------------

inline Table adult_like(std::size_t n, std::uint64_t seed) {
    Rng rng = Rng(seed).split("adult-like");
    Schema schema;
    schema.dataset_name = "adult_like";
    schema.task = TaskKind::binclass;
    const std::vector<std::pair<std::string, std::vector<std::string>>> cats{
        {"workclass", {"Federal-gov", "Local-gov", "Private", "Self-emp"}},
        {"education", {"11th", "Bachelors", "Doctorate", "HS-grad", "Masters", "Some-college"}},
        {"marital_status", {"Divorced", "Married", "Never-married"}},
        {"occupation", {"Adm-clerical", "Craft-repair", "Exec-managerial", "Other-service", "Prof-specialty", "Sales"}},
        {"relationship", {"Husband", "Not-in-family", "Own-child", "Wife"}},
        {"race", {"Asian-Pac-Islander", "Black", "White"}},
        {"sex", {"Female", "Male"}},
        {"native_country", {"Mexico", "Other", "United-States"}},
        {"income", {"<=50K", ">50K"}},
    };
    for (const char* c : {"age", "fnlwgt", "education_num", "capital_gain", "capital_loss", "hours_per_week"})
        schema.columns.push_back({c, ColumnKind::numeric, false});
    Table::Vocabularies vocab(6);
    for (const auto& [name, values] : cats) {
        schema.columns.push_back({name, ColumnKind::categorical, name == "income"});
        vocab.push_back(values);
    }
    auto id = [&](std::size_t cat, const std::string& v) {
        const auto& vs = cats[cat].second;
        return static_cast<double>(std::find(vs.begin(), vs.end(), v) - vs.begin());
    };
    auto pick = [&](std::initializer_list<std::pair<const char*, double>> w) {
        double u = rng.uniform();
        for (const auto& [v, p] : w) {
            if (u < p) return std::string(v);
            u -= p;
        }
        return std::string(w.begin()[w.size() - 1].first);
    };

    std::vector<double> cells;
    cells.reserve(n * 15);
    for (std::size_t r = 0; r < n; ++r) {
        const double age = std::clamp(std::round(17.0 + std::abs(rng.normal()) * 18.0 + rng.uniform() * 12.0), 17.0, 90.0);
        const double edu = std::clamp(std::round(10.0 + 2.5 * rng.normal()), 1.0, 16.0);
        const bool male = rng.uniform() < 0.67;
        const bool married = rng.uniform() < std::clamp((age - 20.0) / 40.0, 0.05, 0.65);
        const double hours = std::clamp(std::round(40.0 + 10.0 * rng.normal() + (male ? 4.0 : -2.0)), 1.0, 99.0);
        const double gain = rng.uniform() < 0.08 ? std::round(std::exp(8.0 + rng.normal())) : 0.0;
        const double loss = rng.uniform() < 0.04 ? std::round(1500.0 + 400.0 * rng.normal()) : 0.0;
        const double fnlwgt = std::round(190000.0 * std::exp(0.5 * rng.normal()));

        const std::string education = edu <= 7    ? "11th"
                                      : edu <= 9  ? "HS-grad"
                                      : edu <= 12 ? "Some-college"
                                      : edu <= 13 ? "Bachelors"
                                      : edu <= 14 ? "Masters"
                                                  : "Doctorate";
        const std::string occupation =
            edu >= 13 ? pick({{"Prof-specialty", 0.45}, {"Exec-managerial", 0.35}, {"Sales", 0.2}})
                      : pick({{"Craft-repair", 0.3}, {"Adm-clerical", 0.25}, {"Other-service", 0.25}, {"Sales", 0.2}});
        const std::string marital = married ? "Married" : (age > 35 && rng.uniform() < 0.5 ? "Divorced" : "Never-married");
        const std::string relationship =
            married ? (male ? "Husband" : "Wife") : (age < 25 ? "Own-child" : "Not-in-family");
        const double logit = -9.0 + 0.045 * age + 0.38 * edu + 0.03 * hours + (married ? 1.6 : 0.0) +
                             (gain > 5000 ? 2.0 : 0.0) + (male ? 0.3 : 0.0);
        const bool rich = rng.uniform() < 1.0 / (1.0 + std::exp(-logit));

        cells.insert(cells.end(), {age, fnlwgt, edu, gain, std::max(loss, 0.0), hours});
        cells.push_back(id(0, pick({{"Private", 0.72}, {"Self-emp", 0.12}, {"Local-gov", 0.1}, {"Federal-gov", 0.06}})));
        cells.push_back(id(1, education));
        cells.push_back(id(2, marital));
        cells.push_back(id(3, occupation));
        cells.push_back(id(4, relationship));
        cells.push_back(id(5, pick({{"White", 0.85}, {"Black", 0.1}, {"Asian-Pac-Islander", 0.05}})));
        cells.push_back(id(6, male ? "Male" : "Female"));
        cells.push_back(id(7, pick({{"United-States", 0.9}, {"Mexico", 0.04}, {"Other", 0.06}})));
        cells.push_back(id(8, rich ? ">50K" : "<=50K"));
    }
    return Table(std::move(schema), std::move(vocab), std::move(cells));
}

/// Two numeric columns with y = a x + noise, no target.
inline Table correlated_pair(std::size_t n, std::uint64_t seed, double slope = 1.0, double noise = 0.0) {
    Rng rng = Rng(seed).split("correlated");
    Schema schema;
    schema.dataset_name = "correlated";
    schema.task = TaskKind::regression;
    schema.columns = {{"x", ColumnKind::numeric, false}, {"y", ColumnKind::numeric, false}};
    std::vector<double> cells;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.normal();
        cells.insert(cells.end(), {x, slope * x + noise * rng.normal()});
    }
    return Table(std::move(schema), Table::Vocabularies(2), std::move(cells));
}

/// Table of one numeric column.
inline Table numeric_column(const std::vector<double>& values, const std::string& name = "x") {
    Schema schema;
    schema.dataset_name = "column";
    schema.task = TaskKind::regression;
    schema.columns = {{name, ColumnKind::numeric, false}};
    return Table(std::move(schema), Table::Vocabularies(1), values);
}

/// Rows `a` followed by rows `b` (same schema and vocabularies).
inline Table concat(const Table& a, const Table& b) {
    std::vector<double> cells(a.cells().begin(), a.cells().end());
    cells.insert(cells.end(), b.cells().begin(), b.cells().end());
    return a.with_cells(std::move(cells));
}

/// Rows sorted lexicographically, for multiset comparisons.
inline std::vector<std::vector<double>> sorted_rows(const Table& t) {
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < t.n_rows(); ++r) rows.emplace_back(t.row(r).begin(), t.row(r).end());
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace sbtest
