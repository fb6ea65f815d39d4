#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csv.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace synthbench {

enum class ColumnKind { numeric, categorical };
enum class TaskKind { binclass, multiclass, regression };

inline std::string_view to_string(ColumnKind k) { return k == ColumnKind::numeric ? "numeric" : "categorical"; }

inline std::string_view to_string(TaskKind t) {
    switch (t) {
        case TaskKind::binclass: return "binclass";
        case TaskKind::multiclass: return "multiclass";
        case TaskKind::regression: return "regression";
    }
    return "?";
}

inline bool is_classification(TaskKind t) { return t != TaskKind::regression; }

enum class DatasetErrc {
    io,
    empty_file,
    duplicate_header,
    missing_column,
    unparseable_numeric,
    missing_value,
    ragged_row,
    invalid_schema,
    invalid_target,
    unknown_category,
    invalid_argument,
};

/// Ingestion/validation failure. `row` is the 1-based data row (0 when not
/// row specific) and `column` the offending column name, if any.
class DatasetError : public Error {
public:
    DatasetError(DatasetErrc code, const std::string& what, std::size_t row = 0, std::string column = {})
        : Error(what), code_(code), row_(row), column_(std::move(column)) {}

    DatasetErrc code() const noexcept { return code_; }
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    DatasetErrc code_;
    std::size_t row_;
    std::string column_;
};

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    bool is_target = false;

    friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

struct Schema {
    std::string dataset_name;
    std::vector<ColumnSchema> columns;
    TaskKind task = TaskKind::regression;

    std::optional<std::size_t> target_index() const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].is_target) return i;
        return std::nullopt;
    }

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].name == name) return i;
        return std::nullopt;
    }

    /// Structural equality: columns and task; the dataset name is ignored.
    bool compatible_with(const Schema& other) const { return columns == other.columns && task == other.task; }

    void validate() const {
        std::size_t targets = 0;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i].name.empty())
                throw DatasetError(DatasetErrc::invalid_schema, "schema: empty column name");
            for (std::size_t j = 0; j < i; ++j)
                if (columns[j].name == columns[i].name)
                    throw DatasetError(DatasetErrc::invalid_schema, "schema: duplicate column '" + columns[i].name + "'",
                                       0, columns[i].name);
            targets += columns[i].is_target ? 1 : 0;
        }
        if (targets > 1) throw DatasetError(DatasetErrc::invalid_schema, "schema: more than one target column");
        if (auto t = target_index()) {
            const auto& c = columns[*t];
            if (task == TaskKind::regression && c.kind != ColumnKind::numeric)
                throw DatasetError(DatasetErrc::invalid_target, "regression target '" + c.name + "' must be numeric", 0,
                                   c.name);
            if (is_classification(task) && c.kind != ColumnKind::categorical)
                throw DatasetError(DatasetErrc::invalid_target,
                                   "classification target '" + c.name + "' must be categorical", 0, c.name);
        }
    }
};

/// Immutable row-major table. Numeric cells hold finite reals, categorical
/// cells hold integral ids into the column's vocabulary. Row subsets share
/// vocabularies with their parent, so every split of a table encodes
/// categories identically.
class Table {
public:
    using Vocabularies = std::vector<std::vector<std::string>>;

    Table(Schema schema, std::shared_ptr<const Vocabularies> vocabularies, std::vector<double> cells)
        : schema_(std::make_shared<const Schema>(std::move(schema))),
          vocab_(std::move(vocabularies)),
          cells_(std::move(cells)) {
        validate();
    }

    Table(Schema schema, Vocabularies vocabularies, std::vector<double> cells)
        : Table(std::move(schema), std::make_shared<const Vocabularies>(std::move(vocabularies)), std::move(cells)) {}

    const Schema& schema() const noexcept { return *schema_; }
    TaskKind task() const noexcept { return schema_->task; }
    std::size_t n_cols() const noexcept { return schema_->columns.size(); }
    std::size_t n_rows() const noexcept { return cells_.size() / n_cols(); }
    const ColumnSchema& column_schema(std::size_t c) const { return schema_->columns.at(c); }
    bool is_numeric(std::size_t c) const { return column_schema(c).kind == ColumnKind::numeric; }
    std::optional<std::size_t> target_index() const { return schema_->target_index(); }

    double at(std::size_t r, std::size_t c) const { return cells_[r * n_cols() + c]; }
    std::span<const double> row(std::size_t r) const { return {cells_.data() + r * n_cols(), n_cols()}; }
    std::span<const double> cells() const noexcept { return cells_; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(n_rows());
        for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, c);
        return out;
    }

    const std::vector<std::string>& vocabulary(std::size_t c) const { return (*vocab_)[c]; }
    const std::shared_ptr<const Vocabularies>& vocabularies() const noexcept { return vocab_; }

    const std::string& category(std::size_t c, double id) const { return (*vocab_)[c][static_cast<std::size_t>(id)]; }

    std::optional<std::size_t> category_id(std::size_t c, std::string_view name) const {
        const auto& v = (*vocab_)[c];
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] == name) return i;
        return std::nullopt;
    }

    Table select_rows(std::span<const std::size_t> idx) const {
        std::vector<double> cells;
        cells.reserve(idx.size() * n_cols());
        for (std::size_t r : idx) {
            if (r >= n_rows())
                throw DatasetError(DatasetErrc::invalid_argument, "row index " + std::to_string(r) + " out of range");
            auto src = row(r);
            cells.insert(cells.end(), src.begin(), src.end());
        }
        return Table(schema_, vocab_, std::move(cells));
    }

    /// New table with this table's schema and vocabularies and the given cells.
    Table with_cells(std::vector<double> cells) const { return Table(schema_, vocab_, std::move(cells)); }

    /// Rendered cell text: shortest round-trip decimal or category name.
    std::string cell_text(std::size_t r, std::size_t c) const {
        return is_numeric(c) ? detail::format_double(at(r, c)) : category(c, at(r, c));
    }

private:
    Table(std::shared_ptr<const Schema> schema, std::shared_ptr<const Vocabularies> vocab, std::vector<double> cells)
        : schema_(std::move(schema)), vocab_(std::move(vocab)), cells_(std::move(cells)) {
        validate();
    }

    void validate() const {
        schema_->validate();
        if (schema_->columns.empty()) throw DatasetError(DatasetErrc::invalid_schema, "table has no columns");
        if (!vocab_ || vocab_->size() != n_cols())
            throw DatasetError(DatasetErrc::invalid_schema, "vocabulary count does not match column count");
        if (cells_.size() % n_cols() != 0)
            throw DatasetError(DatasetErrc::ragged_row, "cell count is not a multiple of the column count");
        if (cells_.empty()) throw DatasetError(DatasetErrc::empty_file, "table has no rows");
        for (std::size_t r = 0; r < n_rows(); ++r) {
            for (std::size_t c = 0; c < n_cols(); ++c) {
                const double v = at(r, c);
                if (!std::isfinite(v))
                    throw DatasetError(DatasetErrc::missing_value, "non-finite cell", r + 1, column_schema(c).name);
                if (!is_numeric(c) &&
                    (v < 0 || v != std::floor(v) || static_cast<std::size_t>(v) >= (*vocab_)[c].size()))
                    throw DatasetError(DatasetErrc::unknown_category, "categorical id outside vocabulary", r + 1,
                                       column_schema(c).name);
            }
        }
    }

    std::shared_ptr<const Schema> schema_;
    std::shared_ptr<const Vocabularies> vocab_;
    std::vector<double> cells_;
};

// ----------------------------------------------------------------------------
// Schema files
// ----------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Reads a bare or double-quoted token; quotes allow spaces and '='.
inline std::string read_token(std::string_view& s, std::size_t line) {
    s = trim(s);
    std::string out;
    if (!s.empty() && s.front() == '"') {
        std::size_t i = 1;
        for (; i < s.size() && s[i] != '"'; ++i) {
            if (s[i] == '\\' && i + 1 < s.size()) ++i;
            out.push_back(s[i]);
        }
        if (i >= s.size())
            throw DatasetError(DatasetErrc::invalid_schema, "schema line " + std::to_string(line) + ": unterminated quote");
        s.remove_prefix(i + 1);
        return out;
    }
    std::size_t i = 0;
    while (i < s.size() && s[i] != '=' && s[i] != ' ' && s[i] != '\t') ++i;
    out = std::string(s.substr(0, i));
    s.remove_prefix(i);
    return out;
}

inline std::string quote_token(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace detail

/// Declarative schema description before it is bound to a CSV header.
struct SchemaSpec {
    std::string dataset_name;
    std::optional<TaskKind> task;
    std::optional<std::string> target;
    std::vector<std::pair<std::string, ColumnKind>> columns;
};

inline TaskKind parse_task(std::string_view s) {
    if (s == "binclass") return TaskKind::binclass;
    if (s == "multiclass") return TaskKind::multiclass;
    if (s == "regression") return TaskKind::regression;
    throw DatasetError(DatasetErrc::invalid_schema, "unknown task '" + std::string(s) + "'");
}

/// Parses the key/value schema format:
///
///     name = "adult"
///     task = "binclass"
///     target = "income"
///     [columns]
///     age = "numeric"
///     "native country" = "categorical"
///
/// Outside a [columns] section every key other than name/task/target
/// declares a column.
inline SchemaSpec parse_schema(std::string_view text) {
    SchemaSpec spec;
    bool in_columns = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line != "[columns]")
                throw DatasetError(DatasetErrc::invalid_schema,
                                   "schema line " + std::to_string(line_no) + ": unknown section " + std::string(line));
            in_columns = true;
            continue;
        }
        std::string key = detail::read_token(line, line_no);
        line = detail::trim(line);
        if (line.empty() || line.front() != '=')
            throw DatasetError(DatasetErrc::invalid_schema, "schema line " + std::to_string(line_no) + ": expected '='");
        line.remove_prefix(1);
        std::string value = detail::read_token(line, line_no);
        if (!detail::trim(line).empty() && detail::trim(line).front() != '#')
            throw DatasetError(DatasetErrc::invalid_schema,
                               "schema line " + std::to_string(line_no) + ": trailing characters");
        if (!in_columns && key == "name") {
            spec.dataset_name = value;
        } else if (!in_columns && key == "task") {
            spec.task = parse_task(value);
        } else if (!in_columns && key == "target") {
            spec.target = value;
        } else {
            ColumnKind kind;
            if (value == "numeric")
                kind = ColumnKind::numeric;
            else if (value == "categorical")
                kind = ColumnKind::categorical;
            else
                throw DatasetError(DatasetErrc::invalid_schema,
                                   "schema line " + std::to_string(line_no) + ": column '" + key +
                                       "' must be \"numeric\" or \"categorical\"",
                                   0, key);
            for (const auto& [n, k] : spec.columns)
                if (n == key)
                    throw DatasetError(DatasetErrc::invalid_schema, "schema declares column '" + key + "' twice", 0,
                                       key);
            spec.columns.emplace_back(std::move(key), kind);
        }
    }
    if (!spec.task) throw DatasetError(DatasetErrc::invalid_schema, "schema has no task");
    return spec;
}

inline SchemaSpec load_schema(const std::string& path) {
    std::string text;
    try {
        text = csv::read_file(path);
    } catch (const Error&) {
        throw DatasetError(DatasetErrc::io, "cannot open schema file '" + path + "'");
    }
    auto spec = parse_schema(text);
    if (spec.dataset_name.empty()) spec.dataset_name = std::filesystem::path(path).stem().string();
    return spec;
}

inline std::string format_schema(const Schema& schema) {
    std::string out;
    out += "name = " + detail::quote_token(schema.dataset_name) + "\n";
    out += "task = \"" + std::string(to_string(schema.task)) + "\"\n";
    if (auto t = schema.target_index()) out += "target = " + detail::quote_token(schema.columns[*t].name) + "\n";
    out += "[columns]\n";
    for (const auto& c : schema.columns)
        out += detail::quote_token(c.name) + " = \"" + std::string(to_string(c.kind)) + "\"\n";
    return out;
}

// ----------------------------------------------------------------------------
// CSV ingestion
// ----------------------------------------------------------------------------

enum class MissingPolicy { reject, impute_median };

struct LoadOptions {
    MissingPolicy missing = MissingPolicy::reject;
    /// When set, categorical cells are interned against this table's
    /// vocabularies and unseen categories are rejected.
    const Table* vocabulary_source = nullptr;
};

inline bool is_missing_token(std::string_view s) {
    s = detail::trim(s);
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "?" || s == "null";
}

/// Builds a table from a header plus data records. Column order follows the
/// header; every header column must be declared in the schema.
inline Table table_from_records(const SchemaSpec& spec, const csv::Record& header,
                                const std::vector<csv::Record>& rows, const LoadOptions& opts = {}) {
    Schema schema;
    schema.dataset_name = spec.dataset_name;
    schema.task = *spec.task;
    for (std::size_t i = 0; i < header.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j)
            if (header[j] == header[i])
                throw DatasetError(DatasetErrc::duplicate_header, "duplicate header column '" + header[i] + "'", 0,
                                   header[i]);
        auto it = std::find_if(spec.columns.begin(), spec.columns.end(),
                               [&](const auto& p) { return p.first == header[i]; });
        if (it == spec.columns.end())
            throw DatasetError(DatasetErrc::missing_column,
                               "header column '" + header[i] + "' is not declared in the schema", 0, header[i]);
        ColumnSchema col{header[i], it->second, spec.target && *spec.target == header[i]};
        if (col.is_target && is_classification(schema.task)) col.kind = ColumnKind::categorical;
        schema.columns.push_back(std::move(col));
    }
    for (const auto& [name, kind] : spec.columns)
        if (std::find(header.begin(), header.end(), name) == header.end())
            throw DatasetError(DatasetErrc::missing_column, "schema column '" + name + "' is missing from the CSV header",
                               0, name);
    if (spec.target && !schema.find(*spec.target))
        throw DatasetError(DatasetErrc::missing_column, "target column '" + *spec.target + "' not found", 0,
                           *spec.target);
    schema.validate();
    if (rows.empty()) throw DatasetError(DatasetErrc::empty_file, "CSV has a header but no data rows");

    const std::size_t n_cols = header.size();
    const std::size_t n_rows = rows.size();
    for (std::size_t r = 0; r < n_rows; ++r)
        if (rows[r].size() != n_cols)
            throw DatasetError(DatasetErrc::ragged_row,
                               "row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                                   " fields, expected " + std::to_string(n_cols),
                               r + 1);

    Table::Vocabularies vocab(n_cols);
    std::vector<double> cells(n_rows * n_cols, 0.0);
    for (std::size_t c = 0; c < n_cols; ++c) {
        const auto& col = schema.columns[c];
        if (col.kind == ColumnKind::numeric) {
            std::vector<std::size_t> missing;
            std::vector<double> present;
            for (std::size_t r = 0; r < n_rows; ++r) {
                const auto& text = rows[r][c];
                if (is_missing_token(text)) {
                    if (opts.missing == MissingPolicy::reject)
                        throw DatasetError(DatasetErrc::missing_value,
                                           "missing numeric value at row " + std::to_string(r + 1) + ", column '" +
                                               col.name + "'",
                                           r + 1, col.name);
                    missing.push_back(r);
                    continue;
                }
                auto v = detail::parse_double(text);
                if (!v || !std::isfinite(*v))
                    throw DatasetError(DatasetErrc::unparseable_numeric,
                                       "cannot parse '" + text + "' as a number at row " + std::to_string(r + 1) +
                                           ", column '" + col.name + "'",
                                       r + 1, col.name);
                cells[r * n_cols + c] = *v;
                present.push_back(*v);
            }
            if (!missing.empty()) {
                if (present.empty())
                    throw DatasetError(DatasetErrc::missing_value, "column '" + col.name + "' has no values to impute",
                                       0, col.name);
                const double fill = detail::median(present);
                for (std::size_t r : missing) cells[r * n_cols + c] = fill;
            }
            continue;
        }
        if (opts.vocabulary_source) {
            const Table& src = *opts.vocabulary_source;
            auto sc = src.schema().find(col.name);
            if (!sc || src.is_numeric(*sc))
                throw DatasetError(DatasetErrc::invalid_schema,
                                   "vocabulary source lacks categorical column '" + col.name + "'", 0, col.name);
            vocab[c] = src.vocabulary(*sc);
            std::unordered_map<std::string, std::size_t> ids;
            for (std::size_t i = 0; i < vocab[c].size(); ++i) ids.emplace(vocab[c][i], i);
            for (std::size_t r = 0; r < n_rows; ++r) {
                auto it = ids.find(rows[r][c]);
                if (it == ids.end())
                    throw DatasetError(DatasetErrc::unknown_category,
                                       "unknown category '" + rows[r][c] + "' at row " + std::to_string(r + 1) +
                                           ", column '" + col.name + "'",
                                       r + 1, col.name);
                cells[r * n_cols + c] = static_cast<double>(it->second);
            }
            continue;
        }
        // Sorted vocabulary: ids do not depend on row order.
        std::vector<std::string> names;
        for (std::size_t r = 0; r < n_rows; ++r) names.push_back(rows[r][c]);
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        std::unordered_map<std::string, std::size_t> ids;
        for (std::size_t i = 0; i < names.size(); ++i) ids.emplace(names[i], i);
        for (std::size_t r = 0; r < n_rows; ++r) cells[r * n_cols + c] = static_cast<double>(ids.at(rows[r][c]));
        vocab[c] = std::move(names);
    }

    if (auto t = schema.target_index(); t && !opts.vocabulary_source) {
        const auto k = vocab[*t].size();
        if (schema.task == TaskKind::binclass && k != 2)
            throw DatasetError(DatasetErrc::invalid_target,
                               "binclass target '" + schema.columns[*t].name + "' has " + std::to_string(k) +
                                   " distinct values, expected 2",
                               0, schema.columns[*t].name);
        if (schema.task == TaskKind::multiclass && k < 2)
            throw DatasetError(DatasetErrc::invalid_target, "multiclass target needs at least 2 classes", 0,
                               schema.columns[*t].name);
    }
    return Table(std::move(schema), std::move(vocab), std::move(cells));
}

inline Table parse_csv_table(std::string_view text, const SchemaSpec& spec, const LoadOptions& opts = {}) {
    std::vector<csv::Record> records;
    try {
        records = csv::parse(text);
    } catch (const csv::ParseError& e) {
        throw DatasetError(DatasetErrc::ragged_row, e.what(), 0);
    }
    if (records.empty()) throw DatasetError(DatasetErrc::empty_file, "CSV is empty");
    csv::Record header = std::move(records.front());
    records.erase(records.begin());
    return table_from_records(spec, header, records, opts);
}

inline Table load_csv(const std::string& path, const SchemaSpec& spec, const LoadOptions& opts = {}) {
    std::string text;
    try {
        text = csv::read_file(path);
    } catch (const Error&) {
        throw DatasetError(DatasetErrc::io, "cannot open CSV file '" + path + "'");
    }
    return parse_csv_table(text, spec, opts);
}

inline Table load_csv(const std::string& path, const std::string& schema_path, const LoadOptions& opts = {}) {
    return load_csv(path, load_schema(schema_path), opts);
}

inline SchemaSpec to_spec(const Schema& schema) {
    SchemaSpec spec;
    spec.dataset_name = schema.dataset_name;
    spec.task = schema.task;
    if (auto t = schema.target_index()) spec.target = schema.columns[*t].name;
    for (const auto& c : schema.columns) spec.columns.emplace_back(c.name, c.kind);
    return spec;
}

/// Canonical CSV: header row, shortest round-trip numerics, category names.
inline void write_csv(std::ostream& out, const Table& table) {
    csv::Record rec;
    for (const auto& c : table.schema().columns) rec.push_back(c.name);
    csv::write_record(out, rec);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        rec.clear();
        for (std::size_t c = 0; c < table.n_cols(); ++c) rec.push_back(table.cell_text(r, c));
        csv::write_record(out, rec);
    }
}

inline void write_csv(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError(DatasetErrc::io, "cannot write CSV file '" + path + "'");
    write_csv(out, table);
    if (!out) throw DatasetError(DatasetErrc::io, "write failed for '" + path + "'");
}

inline void write_schema(const std::string& path, const Schema& schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError(DatasetErrc::io, "cannot write schema file '" + path + "'");
    out << format_schema(schema);
}

// ----------------------------------------------------------------------------
// Splits and subsamples
// ----------------------------------------------------------------------------

struct FoldSplit {
    std::size_t fold_index = 0;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    std::vector<std::size_t> test_idx;
};

/// Stream for a (seed, dataset) pair; every split of a dataset derives from it.
inline Rng dataset_rng(std::uint64_t seed, const Table& table) { return Rng(seed).split(table.schema().dataset_name); }

namespace detail {

/// Orders row indices so that each class's rows are spread evenly through
/// the sequence: rows are shuffled, grouped by class, then interleaved by
/// their within-class fractional position.
inline std::vector<std::size_t> class_interleaved_order(const Table& table, std::vector<std::size_t> order) {
    auto t = table.target_index();
    if (!t || !is_classification(table.task())) return order;
    std::map<double, std::vector<std::size_t>> by_class;
    for (std::size_t r : order) by_class[table.at(r, *t)].push_back(r);
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(order.size());
    for (const auto& [cls, rows] : by_class)
        for (std::size_t i = 0; i < rows.size(); ++i)
            keyed.emplace_back((static_cast<double>(i) + 0.5) / static_cast<double>(rows.size()), rows[i]);
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < keyed.size(); ++i) order[i] = keyed[i].second;
    return order;
}

}  // namespace detail

/// Three rotating test thirds; the remaining two thirds of each fold are split
/// 75/25 into train/validation, giving roughly 1/2, 1/6, 1/3 of the rows.
inline std::array<FoldSplit, 3> make_folds(const Table& table, std::uint64_t seed, bool stratified = false) {
    const std::size_t n = table.n_rows();
    if (n < 6)
        throw DatasetError(DatasetErrc::invalid_argument,
                           "make_folds needs at least 6 rows, got " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = dataset_rng(seed, table).split("folds");
    rng.shuffle(std::span<std::size_t>(order));
    if (stratified) order = detail::class_interleaved_order(table, std::move(order));

    std::array<std::vector<std::size_t>, 3> thirds;
    if (stratified) {
        for (std::size_t i = 0; i < n; ++i) thirds[i % 3].push_back(order[i]);
    } else {
        std::size_t pos = 0;
        for (std::size_t f = 0; f < 3; ++f) {
            const std::size_t size = n / 3 + (f < n % 3 ? 1 : 0);
            thirds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                             order.begin() + static_cast<std::ptrdiff_t>(pos + size));
            pos += size;
        }
    }

    std::array<FoldSplit, 3> folds;
    for (std::size_t f = 0; f < 3; ++f) {
        FoldSplit& split = folds[f];
        split.fold_index = f;
        split.test_idx = thirds[f];
        std::vector<std::size_t> rest;
        for (std::size_t g = 1; g < 3; ++g) {
            const auto& part = thirds[(f + g) % 3];
            rest.insert(rest.end(), part.begin(), part.end());
        }
        if (stratified) {
            for (std::size_t i = 0; i < rest.size(); ++i) (i % 4 == 3 ? split.val_idx : split.train_idx).push_back(rest[i]);
        } else {
            const std::size_t n_train = (3 * rest.size() + 2) / 4;
            split.train_idx.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_train));
            split.val_idx.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_train), rest.end());
        }
    }
    return folds;
}

/// Largest-remainder allocation of `n` draws across groups of the given sizes,
/// capped at each group's size unless `capped` is false.
inline std::vector<std::size_t> proportional_allocation(std::span<const std::size_t> sizes, std::size_t n,
                                                      bool capped = true) {
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    std::vector<std::size_t> alloc(sizes.size(), 0);
    if (total == 0) return alloc;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        const double exact = static_cast<double>(n) * static_cast<double>(sizes[g]) / static_cast<double>(total);
        alloc[g] = static_cast<std::size_t>(std::floor(exact));
        if (capped) alloc[g] = std::min(sizes[g], alloc[g]);
        assigned += alloc[g];
        remainders.emplace_back(exact - static_cast<double>(alloc[g]), g);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n && i < remainders.size(); ++i) {
        const std::size_t g = remainders[i].second;
        if (!capped || alloc[g] < sizes[g]) {
            ++alloc[g];
            ++assigned;
        }
    }
    return alloc;
}

/// Row indices of a seeded subsample of size n. Classification tables keep
/// class proportions (largest-remainder quotas); regression tables are
/// sampled uniformly without replacement. Output order is shuffled.
inline std::vector<std::size_t> stratified_subsample_indices(const Table& table, std::size_t n, std::uint64_t seed) {
    const std::size_t N = table.n_rows();
    if (n < 1 || n > N)
        throw DatasetError(DatasetErrc::invalid_argument,
                           "subsample size " + std::to_string(n) + " outside [1, " + std::to_string(N) + "]");
    Rng rng = Rng(seed).split("subsample");
    std::vector<std::size_t> out;
    auto t = table.target_index();
    if (t && is_classification(table.task())) {
        std::map<double, std::vector<std::size_t>> by_class;
        for (std::size_t r = 0; r < N; ++r) by_class[table.at(r, *t)].push_back(r);
        std::vector<std::size_t> sizes;
        for (const auto& [cls, rows] : by_class) sizes.push_back(rows.size());
        auto alloc = proportional_allocation(sizes, n);
        std::size_t g = 0;
        for (auto& [cls, rows] : by_class) {
            rng.shuffle(std::span<std::size_t>(rows));
            out.insert(out.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(alloc[g++]));
        }
    } else {
        std::vector<std::size_t> all(N);
        std::iota(all.begin(), all.end(), 0);
        rng.shuffle(std::span<std::size_t>(all));
        out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    }
    rng.shuffle(std::span<std::size_t>(out));
    return out;
}

/// Keeps the first occurrence of every distinct row.
inline Table deduplicate_rows(const Table& table) {
    std::vector<std::size_t> order(table.n_rows());
    std::iota(order.begin(), order.end(), 0);
    auto row_less = [&](std::size_t a, std::size_t b) {
        auto ra = table.row(a);
        auto rb = table.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::stable_sort(order.begin(), order.end(), row_less);
    std::vector<bool> keep(table.n_rows(), false);
    for (std::size_t i = 0; i < order.size(); ++i)
        if (i == 0 || row_less(order[i - 1], order[i])) keep[order[i]] = true;
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < keep.size(); ++r)
        if (keep[r]) idx.push_back(r);
    return table.select_rows(idx);
}

inline Table stratified_subsample(const Table& table, std::size_t n, std::uint64_t seed) {
    const auto idx = stratified_subsample_indices(table, n, seed);
    return table.select_rows(idx);
}

}  // namespace synthbench
