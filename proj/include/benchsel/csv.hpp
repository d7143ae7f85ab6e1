#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "benchsel/errors.hpp"

namespace benchsel::csv {

struct record {
    std::size_t line = 0;  // 1-based line number in the source text
    std::vector<std::string> fields;
};

inline std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

/// Splits RFC 4180-style text into records. Quoted fields may contain commas
/// and doubled quotes, but not line breaks. Blank lines and lines whose first
/// character is '#' are skipped. Unquoted fields are trimmed.
inline std::vector<record> parse(std::string_view text) {
    std::vector<record> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;  // UTF-8 BOM

    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty() || line.front() == '#') continue;

        record rec;
        rec.line = line_no;
        std::size_t i = 0;
        while (true) {
            std::string field;
            // skip leading blanks before a possible opening quote
            std::size_t j = i;
            while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
            if (j < line.size() && line[j] == '"') {
                i = j + 1;
                bool closed = false;
                while (i < line.size()) {
                    if (line[i] == '"') {
                        if (i + 1 < line.size() && line[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                            continue;
                        }
                        closed = true;
                        ++i;
                        break;
                    }
                    field.push_back(line[i++]);
                }
                if (!closed) {
                    throw schema_error("unterminated quoted field", line_no, rec.fields.size() + 1);
                }
                while (i < line.size() && line[i] != ',') {
                    if (line[i] != ' ' && line[i] != '\t') {
                        throw schema_error("unexpected text after closing quote", line_no,
                                           rec.fields.size() + 1);
                    }
                    ++i;
                }
            } else {
                std::size_t comma = line.find(',', i);
                if (comma == std::string_view::npos) comma = line.size();
                field = std::string(trim(line.substr(i, comma - i)));
                i = comma;
            }
            rec.fields.push_back(std::move(field));
            if (i >= line.size()) break;
            ++i;  // consume ','
            if (i == line.size()) {
                rec.fields.emplace_back();
                break;
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parses a finite real number (decimal or scientific notation). Returns
/// nullopt for anything else, including inf/nan spellings.
inline std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

/// Quotes a field only when it needs it.
inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace benchsel::csv
