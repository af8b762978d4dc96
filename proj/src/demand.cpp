// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/demand.hpp>

#include <cmath>
#include <numbers>

namespace feelab
{
namespace
{
// Fee integrals can be exponentially small at low congestion, so accuracy is
// relative only.
constexpr Tolerance quad_tol{1e-300, 1e-11, 400};

// Past this root exp(-a) underflows and the kernel is its load-0 limit.
constexpr double alpha_flat = 700.0;

void check_cost(double c, const WaitCostDistribution& dist)
{
    if (!(c >= 0.0 && c <= dist.c_bar()))
        throw DomainError("wait cost must lie in [0, c_bar]");
}
}  // namespace

void CongestionPoint::validate() const
{
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw DomainError("block rate mu must be positive");
    if (!(rho > 0.0))
        throw DomainError("congestion rho must be positive");
    if (!(rho < 1.0))
        throw CongestionOverflow("congestion must stay below 1", rho);
}

WaitKernel wait_kernel(double load)
{
    if (!(load >= 0.0))
        throw DomainError("load must be non-negative");
    if (!(load < 1.0))
        throw CongestionOverflow("load must stay below 1", load);

    WaitKernel k;
    k.load = load;
    if (load == 0.0)
    {
        k.alpha = std::numeric_limits<double>::infinity();
        return k;
    }
    k.alpha = solve_alpha(load);
    if (k.alpha > alpha_flat)
        return k;

    const double a = k.alpha;
    const double tail = std::exp(-a);
    const double denom = one_minus_poisson_tail(a);
    k.wait = 1.0 / denom;
    k.excess = (1.0 + a) * tail / denom;
    k.slope = tail * a * a * a * k.wait * k.wait * k.wait;
    k.elasticity = load * tail * a * a * a * k.wait * k.wait;
    return k;
}

double wait_time(double c, const CongestionPoint& point, const WaitCostDistribution& dist)
{
    point.validate();
    check_cost(c, dist);
    return wait_kernel(point.rho * dist.survival(c)).wait / point.mu;
}

double wait_time_slope(double c, const CongestionPoint& point, const WaitCostDistribution& dist)
{
    point.validate();
    check_cost(c, dist);
    const auto k = wait_kernel(point.rho * dist.survival(c));
    return -point.rho * dist.pdf(c) * k.slope / point.mu;
}

namespace
{
double fee_integrand(double s, const CongestionPoint& point, const WaitCostDistribution& dist)
{
    const auto k = wait_kernel(point.rho * dist.survival(s));
    return s * dist.pdf(s) * point.rho * k.slope / point.mu;
}

double fee_between(double lo, double hi, const CongestionPoint& point, const WaitCostDistribution& dist)
{
    return integrate([&](double s) { return fee_integrand(s, point, dist); }, lo, hi,
                     dist.breakpoints(), quad_tol);
}
}  // namespace

double fee(double c, const CongestionPoint& point, const WaitCostDistribution& dist)
{
    point.validate();
    check_cost(c, dist);
    return fee_between(0.0, c, point, dist);
}

FeeSchedule fee_schedule(const CongestionPoint& point, const WaitCostDistribution& dist, int nodes)
{
    point.validate();
    if (nodes < 2)
        throw DomainError("fee schedule needs at least two nodes");
    const double c_bar = dist.c_bar();
    FeeSchedule out;
    out.points.reserve(static_cast<std::size_t>(nodes));
    double prev_c = 0.0;
    double cumulative = 0.0;
    for (int k = 0; k < nodes; ++k)
    {
        double c = 0.5 * c_bar * (1.0 - std::cos(std::numbers::pi * k / (nodes - 1)));
        if (k == nodes - 1)
            c = c_bar;
        cumulative += fee_between(prev_c, c, point, dist);
        out.points.push_back({c, cumulative, wait_time(c, point, dist)});
        prev_c = c;
    }
    return out;
}

double psi(const CongestionPoint& point, const WaitCostDistribution& dist)
{
    point.validate();
    // integral of (F̄ - c f) vanishes, so W may be replaced by its excess over 1/mu
    auto integrand = [&](double c) {
        const double weight = dist.survival(c) - c * dist.pdf(c);
        return weight * wait_kernel(point.rho * dist.survival(c)).excess;
    };
    const double integral = integrate(integrand, 0.0, dist.c_bar(), dist.breakpoints(), quad_tol);
    return point.rho * integral / point.mu;
}

double psi_from_fees(const CongestionPoint& point, const WaitCostDistribution& dist)
{
    point.validate();
    auto integrand = [&](double c) { return fee(c, point, dist) * dist.pdf(c); };
    const Tolerance outer{1e-300, 1e-10, 400};
    return point.rho * integrate(integrand, 0.0, dist.c_bar(), dist.breakpoints(), outer);
}

double epsilon(const CongestionPoint& point, const WaitCostDistribution& dist)
{
    point.validate();
    auto level = [&](double c) {
        const double weight = dist.survival(c) - c * dist.pdf(c);
        return weight * wait_kernel(point.rho * dist.survival(c)).excess;
    };
    auto response = [&](double c) {
        const double weight = dist.survival(c) - c * dist.pdf(c);
        const auto k = wait_kernel(point.rho * dist.survival(c));
        return weight * k.wait * k.elasticity;
    };
    const double denom = integrate(level, 0.0, dist.c_bar(), dist.breakpoints(), quad_tol);
    const double numer = integrate(response, 0.0, dist.c_bar(), dist.breakpoints(), quad_tol);
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw EvaluationError("average fee underflows; elasticity undefined", point.rho);
    return 1.0 + numer / denom;
}

double epsilon_bar(double rho)
{
    CongestionPoint{rho}.validate();
    return 1.0 + wait_kernel(rho).elasticity;
}

double expected_wait_cost(const CongestionPoint& point, const WaitCostDistribution& dist)
{
    point.validate();
    auto integrand = [&](double c) {
        return c * dist.pdf(c) * wait_kernel(point.rho * dist.survival(c)).wait;
    };
    return integrate(integrand, 0.0, dist.c_bar(), dist.breakpoints(), quad_tol) / point.mu;
}
}  // namespace feelab
