#pragma once

// Minimal RFC 4180 reader/writer plus round-trip number formatting.

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"

namespace topothresh::csv {

using row = std::vector<std::string>;

/// Streams records from an RFC 4180 source. Quoted fields may span lines;
/// `line()` reports the line on which the last returned record started.
class reader {
public:
    reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

    std::optional<row> next() {
        row fields;
        std::string field;
        bool in_quotes = false;
        bool any = false;
        bool was_quoted = false;
        record_line_ = line_ + 1;

        int c;
        while ((c = in_.get()) != std::char_traits<char>::eof()) {
            any = true;
            char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
                continue;
            }
            if (ch == '"') {
                if (!field.empty() || was_quoted)
                    throw parse_error(name_, record_line_, "unexpected quote inside unquoted field");
                in_quotes = true;
                was_quoted = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
                was_quoted = false;
            } else if (ch == '\r') {
                if (in_.peek() == '\n') continue;
                field.push_back(ch);
            } else if (ch == '\n') {
                ++line_;
                fields.push_back(std::move(field));
                return fields;
            } else {
                if (was_quoted)
                    throw parse_error(name_, record_line_, "characters after closing quote");
                field.push_back(ch);
            }
        }
        if (in_quotes) throw parse_error(name_, record_line_, "unterminated quoted field");
        if (!any) return std::nullopt;
        ++line_;
        fields.push_back(std::move(field));
        return fields;
    }

    std::size_t line() const noexcept { return record_line_; }
    const std::string& name() const noexcept { return name_; }

private:
    std::istream& in_;
    std::string name_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

inline bool is_blank(const row& r) {
    return r.size() == 1 && r[0].find_first_not_of(" \t") == std::string::npos;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string quote(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// Shortest decimal form that parses back to the same double.
inline std::string format(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
    s = trim(s);
    Int v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline void write_row(std::ostream& out, const row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out << ',';
        out << quote(r[i]);
    }
    out << '\n';
}

}  // namespace topothresh::csv
