// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/numerics.hpp>

#include <cmath>
#include <limits>

namespace feelab
{
namespace
{
// (1 - exp(-a)) / a, decreasing from 1 at a = 0 to 0 at infinity.
double mean_inclusion(double a) noexcept
{
    if (a == 0.0)
        return 1.0;
    return -std::expm1(-a) / a;
}
}  // namespace

double alpha_residual(double x, double a) noexcept
{
    return std::expm1(-a) + x * a;
}

double one_minus_poisson_tail(double a) noexcept
{
    if (a < 0.1)
    {
        // sum_{k>=2} (-1)^k (k-1) a^k / k!
        double term = a * a / 2.0;  // a^k / k! at k = 2
        double sum = term;
        for (int k = 3; k <= 16; ++k)
        {
            term *= -a / k;
            sum += (k - 1) * term;
        }
        return sum;
    }
    return -std::expm1(-a) - a * std::exp(-a);
}

double solve_alpha(double x, const Tolerance& tol)
{
    tol.validate();
    if (!(x > 0.0) || x > 1.0)
        throw DomainError("solve_alpha requires x in (0, 1]");
    if (x == 1.0)
        return 0.0;

    // Beyond a ~ 40 exp(-a) is below half an ulp of 1, so a = 1/x to double.
    if (x < 1.0 / 40.0)
    {
        double a = 1.0 / x;
        a = -std::expm1(-a) / x;
        return a;
    }

    double lo = 0.0;
    double hi = 2.0 / x;
    double a = x > 0.5 ? 2.0 * (1.0 - x) / x : 1.0 / x;
    for (int it = 0; it < tol.max_iter; ++it)
    {
        const double q = mean_inclusion(a) - x;
        if (q > 0.0)
            lo = a;
        else if (q < 0.0)
            hi = a;
        else
            return a;

        // d/da mean_inclusion = -D(a) / a^2
        const double slope = -one_minus_poisson_tail(a) / (a * a);
        double next = a - q / slope;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        const double step = std::abs(next - a);
        a = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * a || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * a)
        {
            if (std::abs(alpha_residual(x, a)) > tol.abs_tol)
                throw ConvergenceError("solve_alpha: residual above tolerance");
            return a;
        }
    }
    throw ConvergenceError("solve_alpha: iteration budget exhausted");
}
}  // namespace feelab
