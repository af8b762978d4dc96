// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/distribution.hpp>

#include <feelab/errors.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace feelab
{
namespace
{
template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string real_text(double v)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, end);
}
}  // namespace

std::string_view to_string(DistributionKind kind)
{
    switch (kind)
    {
    case DistributionKind::uniform:
        return "uniform";
    case DistributionKind::truncated_exponential:
        return "truncated-exponential";
    case DistributionKind::tabulated:
        return "tabulated";
    }
    return "unknown";
}

WaitCostDistribution::WaitCostDistribution(std::variant<Uniform, TruncatedExponential, Tabulated> impl)
  : impl_{std::move(impl)}
{
    if (auto* t = std::get_if<Tabulated>(&impl_))
        breaks_.assign(t->c.begin() + 1, t->c.end() - 1);
}

WaitCostDistribution WaitCostDistribution::uniform(double c_bar)
{
    if (!(c_bar > 0.0) || !std::isfinite(c_bar))
        throw DomainError("uniform distribution requires c_bar > 0");
    return WaitCostDistribution{Uniform{c_bar}};
}

WaitCostDistribution WaitCostDistribution::truncated_exponential(double rate, double c_bar)
{
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw DomainError("truncated exponential requires rate > 0");
    if (!(c_bar > 0.0) || !std::isfinite(c_bar))
        throw DomainError("truncated exponential requires c_bar > 0");
    return WaitCostDistribution{TruncatedExponential{rate, c_bar, -std::expm1(-rate * c_bar)}};
}

WaitCostDistribution WaitCostDistribution::tabulated(std::vector<std::pair<double, double>> knots)
{
    if (knots.size() < 2)
        throw ConfigError("tabulated distribution needs at least two knots");
    Tabulated t;
    for (auto [c, F] : knots)
    {
        if (!std::isfinite(c) || !std::isfinite(F))
            throw ConfigError("tabulated distribution has a non-finite entry");
        if (!t.c.empty())
        {
            if (!(c > t.c.back()))
                throw ConfigError("tabulated distribution: c must be strictly increasing");
            if (F < t.F.back())
                throw ConfigError("tabulated distribution: F must be non-decreasing");
        }
        t.c.push_back(c);
        t.F.push_back(F);
    }
    if (t.c.front() != 0.0 || t.F.front() != 0.0)
        throw ConfigError("tabulated distribution must start at (0, 0)");
    if (std::abs(t.F.back() - 1.0) > 1e-12)
        throw ConfigError("tabulated distribution must end at F = 1");
    t.F.back() = 1.0;
    return WaitCostDistribution{std::move(t)};
}

WaitCostDistribution WaitCostDistribution::load_tabulated(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open distribution table " + path.string());
    std::vector<std::pair<double, double>> knots;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        fields.imbue(std::locale::classic());
        double c = 0.0;
        double F = 0.0;
        if (!(fields >> c))
            continue;
        std::string extra;
        if (!(fields >> F) || (fields >> extra))
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
        knots.emplace_back(c, F);
    }
    return tabulated(std::move(knots));
}

DistributionKind WaitCostDistribution::kind() const noexcept
{
    return std::visit(
        overloaded{[](const Uniform&) { return DistributionKind::uniform; },
                   [](const TruncatedExponential&) { return DistributionKind::truncated_exponential; },
                   [](const Tabulated&) { return DistributionKind::tabulated; }},
        impl_);
}

double WaitCostDistribution::c_bar() const noexcept
{
    return std::visit(overloaded{[](const Uniform& u) { return u.c_bar; },
                                 [](const TruncatedExponential& e) { return e.c_bar; },
                                 [](const Tabulated& t) { return t.c.back(); }},
                      impl_);
}

double WaitCostDistribution::cdf(double c) const noexcept
{
    if (c <= 0.0)
        return 0.0;
    if (c >= c_bar())
        return 1.0;
    return std::visit(
        overloaded{[c](const Uniform& u) { return c / u.c_bar; },
                   [c](const TruncatedExponential& e) { return -std::expm1(-e.rate * c) / e.mass; },
                   [c](const Tabulated& t) {
                       auto it = std::upper_bound(t.c.begin(), t.c.end(), c);
                       const auto i = static_cast<std::size_t>(it - t.c.begin()) - 1;
                       const double w = (c - t.c[i]) / (t.c[i + 1] - t.c[i]);
                       return t.F[i] + w * (t.F[i + 1] - t.F[i]);
                   }},
        impl_);
}

double WaitCostDistribution::pdf(double c) const noexcept
{
    if (c < 0.0 || c > c_bar())
        return 0.0;
    return std::visit(
        overloaded{[](const Uniform& u) { return 1.0 / u.c_bar; },
                   [c](const TruncatedExponential& e) { return e.rate * std::exp(-e.rate * c) / e.mass; },
                   [c](const Tabulated& t) {
                       auto it = std::upper_bound(t.c.begin(), t.c.end(), c);
                       if (it == t.c.end())
                           --it;
                       const auto i = static_cast<std::size_t>(it - t.c.begin()) - 1;
                       return (t.F[i + 1] - t.F[i]) / (t.c[i + 1] - t.c[i]);
                   }},
        impl_);
}

double WaitCostDistribution::quantile(double u) const noexcept
{
    u = std::clamp(u, 0.0, 1.0);
    return std::visit(
        overloaded{[u](const Uniform& d) { return u * d.c_bar; },
                   [u](const TruncatedExponential& e) {
                       return std::min(e.c_bar, -std::log1p(-u * e.mass) / e.rate);
                   },
                   [u](const Tabulated& t) {
                       // first knot with F >= u; flat segments map to their left end
                       auto it = std::lower_bound(t.F.begin(), t.F.end(), u);
                       if (it == t.F.begin())
                           return 0.0;
                       const auto i = static_cast<std::size_t>(it - t.F.begin());
                       const double w = (u - t.F[i - 1]) / (t.F[i] - t.F[i - 1]);
                       return t.c[i - 1] + w * (t.c[i] - t.c[i - 1]);
                   }},
        impl_);
}

std::span<const double> WaitCostDistribution::breakpoints() const noexcept
{
    return breaks_;
}

std::string WaitCostDistribution::describe() const
{
    return std::visit(
        overloaded{[](const Uniform& u) { return "uniform(c_bar=" + real_text(u.c_bar) + ")"; },
                   [](const TruncatedExponential& e) {
                       return "truncated-exponential(rate=" + real_text(e.rate) +
                              ",c_bar=" + real_text(e.c_bar) + ")";
                   },
                   [](const Tabulated& t) {
                       return "tabulated(knots=" + std::to_string(t.c.size()) +
                              ",c_bar=" + real_text(t.c.back()) + ")";
                   }},
        impl_);
}
}  // namespace feelab
