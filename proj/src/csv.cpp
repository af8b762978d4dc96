// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/csv.hpp>

#include <charconv>
#include <cmath>

namespace feelab
{
std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, end);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_{out}
{
    bool first = true;
    for (const auto& h : header)
        put(first, h);
    out_ << '\n';
}

void CsvWriter::put(bool& first, std::string_view s)
{
    if (!first)
        out_ << ',';
    first = false;
    if (s.find_first_of(",\"\n") == std::string_view::npos)
    {
        out_ << s;
        return;
    }
    out_ << '"';
    for (char ch : s)
    {
        if (ch == '"')
            out_ << '"';
        out_ << ch;
    }
    out_ << '"';
}
}  // namespace feelab
