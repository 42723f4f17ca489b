/*
* Copyright (C) 2026 gravepi contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/

#pragma once

#include "gravepi/errors.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

namespace gravepi::csv {

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_number(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string format_number(long long value)
{
    return std::to_string(value);
}

inline double parse_double(std::string_view text, std::size_t line = 0)
{
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    while (!text.empty() && text.back() == ' ') {
        text.remove_suffix(1);
    }
    double value = 0.0;
    auto res     = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("expected a number, got '" + std::string(text) + "'", line);
    }
    return value;
}

inline long long parse_int(std::string_view text, std::size_t line = 0)
{
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    while (!text.empty() && text.back() == ' ') {
        text.remove_suffix(1);
    }
    long long value = 0;
    auto res        = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("expected an integer, got '" + std::string(text) + "'", line);
    }
    return value;
}

inline std::vector<std::string> split_line(std::string_view line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

/// A parsed comma-separated file with a mandatory header row. Fields are unquoted.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // 1-based source line of each row

    std::size_t column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw ParseError("missing column '" + std::string(name) + "'", 1);
    }

    /// Throws unless the header is exactly `expected`.
    void require_header(const std::vector<std::string>& expected) const
    {
        if (header != expected) {
            std::string want;
            for (const auto& h : expected) {
                want += (want.empty() ? "" : ",") + h;
            }
            throw ParseError("header must be '" + want + "'", 1);
        }
    }
};

inline Table parse(std::istream& in)
{
    Table table;
    std::string line;
    std::size_t lineno = 0;
    bool have_header   = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header  = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(lineno);
    }
    if (!have_header) {
        throw ParseError("empty file: header row is mandatory");
    }
    return table;
}

inline Table read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    return parse(in);
}

/// Row-oriented writer. Values are joined with commas and lines end with LF.
class Writer {
public:
    explicit Writer(std::ostream& out)
        : out_(out)
    {
    }

    template <class... Ts>
    void row(const Ts&... fields)
    {
        bool first = true;
        (emit(fields, first), ...);
        out_ << '\n';
    }

    void row(const std::vector<std::string>& fields)
    {
        bool first = true;
        for (const auto& f : fields) {
            emit(f, first);
        }
        out_ << '\n';
    }

private:
    void sep(bool& first)
    {
        if (!first) {
            out_ << ',';
        }
        first = false;
    }
    void emit(const std::string& s, bool& first)
    {
        sep(first);
        out_ << s;
    }
    void emit(const char* s, bool& first)
    {
        sep(first);
        out_ << s;
    }
    void emit(double v, bool& first)
    {
        sep(first);
        out_ << format_number(v);
    }
    template <class I>
        requires std::is_integral_v<I>
    void emit(I v, bool& first)
    {
        sep(first);
        out_ << v;
    }

    std::ostream& out_;
};

} // namespace gravepi::csv
