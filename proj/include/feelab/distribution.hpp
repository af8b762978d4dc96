// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace feelab
{
enum class DistributionKind
{
    uniform,
    truncated_exponential,
    tabulated
};

std::string_view to_string(DistributionKind kind);

/// Distribution F(c) of user delay cost on [0, c_bar].
///
/// Immutable value type; the CDF satisfies F(0) = 0 and F(c_bar) = 1.
class WaitCostDistribution
{
public:
    /// Uniform on [0, c_bar].
    static WaitCostDistribution uniform(double c_bar = 1.0);

    /// Exponential with the given rate, truncated to [0, c_bar] and renormalized.
    static WaitCostDistribution truncated_exponential(double rate, double c_bar = 1.0);

    /// Piecewise-linear CDF through (c, F) knots. The first knot must be
    /// (0, 0), the last must have F = 1, c strictly increasing, F non-decreasing.
    static WaitCostDistribution tabulated(std::vector<std::pair<double, double>> knots);

    /// Two whitespace- or comma-separated columns `c F(c)` per line; `#` starts
    /// a comment. Throws ConfigError on malformed or non-monotone input.
    static WaitCostDistribution load_tabulated(const std::filesystem::path& path);

    DistributionKind kind() const noexcept;
    double c_bar() const noexcept;

    double cdf(double c) const noexcept;
    double pdf(double c) const noexcept;
    double survival(double c) const noexcept { return 1.0 - cdf(c); }

    /// Inverse CDF for u in [0, 1].
    double quantile(double u) const noexcept;

    /// Points in (0, c_bar) where the density is not smooth.
    std::span<const double> breakpoints() const noexcept;

    /// Short human-readable description, e.g. "uniform(c_bar=1)".
    std::string describe() const;

private:
    struct Uniform
    {
        double c_bar;
    };
    struct TruncatedExponential
    {
        double rate;
        double c_bar;
        double mass;  // 1 - exp(-rate * c_bar)
    };
    struct Tabulated
    {
        std::vector<double> c;
        std::vector<double> F;
    };

    explicit WaitCostDistribution(std::variant<Uniform, TruncatedExponential, Tabulated> impl);

    std::variant<Uniform, TruncatedExponential, Tabulated> impl_;
    std::vector<double> breaks_;
};
}  // namespace feelab
