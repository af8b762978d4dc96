// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace feelab
{
/// Locale-independent shortest form with 12 significant digits.
std::string format_real(double v);

/// Writes RFC 4180-style rows; doubles go through format_real.
class CsvWriter
{
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);

    template <class... Fields>
    void row(const Fields&... fields)
    {
        bool first = true;
        ((put(first, fields)), ...);
        out_ << '\n';
    }

    /// Pre-formatted fields, quoted as needed.
    void row_fields(const std::vector<std::string>& fields)
    {
        bool first = true;
        for (const auto& f : fields)
            put(first, std::string_view{f});
        out_ << '\n';
    }

private:
    void put(bool& first, std::string_view s);
    void put(bool& first, const std::string& s) { put(first, std::string_view{s}); }
    void put(bool& first, const char* s) { put(first, std::string_view{s}); }
    void put(bool& first, double v) { put(first, std::string_view{format_real(v)}); }
    void put(bool& first, bool v) { put(first, std::string_view{v ? "true" : "false"}); }

    template <std::integral I>
        requires(!std::same_as<I, bool>)
    void put(bool& first, I v)
    {
        put(first, std::string_view{std::to_string(v)});
    }

    std::ostream& out_;
};
}  // namespace feelab
