#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace synthbench::csv {

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

using Record = std::vector<std::string>;

/// RFC-4180 parser: comma separated, double-quote quoting with "" escapes,
/// CRLF or LF record terminators, quoted fields may span lines.
inline std::vector<Record> parse(std::string_view text) {
    std::vector<Record> records;
    Record record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;
    std::size_t line = 1;

    // Skip a UTF-8 byte order mark.
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted)
                    throw ParseError("unexpected quote inside unquoted field on line " + std::to_string(line), line);
                in_quotes = true;
                field_was_quoted = true;
                record_has_content = true;
                break;
            case ',':
                end_field();
                record_has_content = true;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                [[fallthrough]];
            case '\n':
                if (record_has_content || !field.empty()) end_record();
                ++line;
                break;
            default:
                if (field_was_quoted)
                    throw ParseError("characters after closing quote on line " + std::to_string(line), line);
                field.push_back(c);
                record_has_content = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field at end of input", line);
    if (record_has_content || !field.empty()) end_record();
    return records;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline bool needs_quotes(std::string_view f) {
    if (f.empty()) return false;
    if (f.front() == ' ' || f.back() == ' ') return true;
    return f.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view f) {
    if (!needs_quotes(f)) {
        out << f;
        return;
    }
    out << '"';
    for (char c : f) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

inline void write_record(std::ostream& out, const Record& record) {
    for (std::size_t i = 0; i < record.size(); ++i) {
        if (i) out << ',';
        write_field(out, record[i]);
    }
    out << '\n';
}

}  // namespace synthbench::csv
