// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <feelab/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace feelab
{
/// Stopping rule shared by the iterative kernels.
///
/// For quadrature `max_iter` caps the number of interval bisections.
struct Tolerance
{
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_iter = 200;

    void validate() const
    {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter < 1)
            throw DomainError("tolerance requires abs_tol > 0, rel_tol > 0, max_iter >= 1");
    }
};

/// Positive root of exp(-a) + x*a - 1 = 0 for x in (0, 1].
///
/// The trivial root a = 0 is excluded. x == 1 is the degenerate boundary where
/// the positive root merges with zero; 0 is returned exactly.
double solve_alpha(double x, const Tolerance& tol = {});

/// exp(-a) + x*a - 1, evaluated without cancellation for small a.
double alpha_residual(double x, double a) noexcept;

/// 1 - (1 + a) exp(-a), accurate for small a.
double one_minus_poisson_tail(double a) noexcept;

struct QuadratureResult
{
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    int subdivisions = 0;
    bool converged = false;
};

namespace detail
{
// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval
{
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

template <class F>
Interval gauss_kronrod(F& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto eval = [&](double x) {
        const double y = f(x);
        if (!std::isfinite(y))
            throw EvaluationError("integrand is not finite", x);
        return y;
    };
    const double fc = eval(center);
    double kronrod = fc * kronrod_weights[7];
    double gauss = fc * gauss_weights[3];
    for (std::size_t j = 0; j < 7; ++j)
    {
        const double dx = half * kronrod_nodes[j];
        const double sum = eval(center - dx) + eval(center + dx);
        kronrod += kronrod_weights[j] * sum;
        if (j % 2 == 1)
            gauss += gauss_weights[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}
}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature over [a, b], split at `knots`.
///
/// The interval with the largest error estimate is bisected until the total
/// estimate is below max(abs_tol, rel_tol * |value|) or `max_iter`
/// bisections have been spent. Knots outside (a, b) are ignored.
template <class F>
QuadratureResult integrate_detailed(
    F&& f, double a, double b, std::span<const double> knots, const Tolerance& tol = {})
{
    tol.validate();
    if (!(a <= b))
        throw DomainError("integrate requires a <= b");
    QuadratureResult out;
    if (a == b)
    {
        out.converged = true;
        return out;
    }

    std::vector<double> cuts{a};
    for (double k : knots)
        if (k > a && k < b)
            cuts.push_back(k);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<detail::Interval> heap;
    double value = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    {
        auto piece = detail::gauss_kronrod(f, cuts[i], cuts[i + 1]);
        out.evaluations += 15;
        value += piece.value;
        error += piece.error;
        heap.push(piece);
    }

    const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * (b - a);
    while (error > std::max(tol.abs_tol, tol.rel_tol * std::abs(value)) &&
           out.subdivisions < tol.max_iter)
    {
        auto worst = heap.top();
        if (worst.b - worst.a < min_width)
            break;
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gauss_kronrod(f, worst.a, mid);
        auto right = detail::gauss_kronrod(f, mid, worst.b);
        out.evaluations += 30;
        ++out.subdivisions;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running update.
    value = 0.0;
    error = 0.0;
    while (!heap.empty())
    {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = value;
    out.error = error;
    out.converged = error <= std::max(tol.abs_tol, tol.rel_tol * std::abs(value));
    return out;
}

template <class F>
double integrate(F&& f, double a, double b, std::span<const double> knots, const Tolerance& tol = {})
{
    return integrate_detailed(f, a, b, knots, tol).value;
}

template <class F>
double integrate(F&& f, double a, double b, const Tolerance& tol = {})
{
    return integrate_detailed(f, a, b, std::span<const double>{}, tol).value;
}

/// Central difference of log g in log x: d log g / d log x at x0.
template <class G>
double log_derivative(G&& g, double x0, double step = 1e-4)
{
    if (!(x0 > 0.0))
        throw DomainError("log_derivative requires x0 > 0");
    if (!(step > 0.0 && step <= 0.1))
        throw DomainError("log_derivative requires step in (0, 0.1]");
    const double xp = x0 * std::exp(step);
    const double xm = x0 * std::exp(-step);
    const double gp = g(xp);
    const double gm = g(xm);
    if (!std::isfinite(gp) || !(gp > 0.0))
        throw EvaluationError("log_derivative needs a positive finite value", xp);
    if (!std::isfinite(gm) || !(gm > 0.0))
        throw EvaluationError("log_derivative needs a positive finite value", xm);
    return (std::log(gp) - std::log(gm)) / (2.0 * step);
}

/// Root of a continuous f on [lo, hi] with f(lo), f(hi) of opposite sign.
///
/// Illinois-modified regula falsi with bisection whenever the bracket fails to
/// shrink by half. Stops when the bracket is below max(abs_tol, rel_tol*|x|).
template <class F>
double find_root(F&& f, double lo, double hi, const Tolerance& tol = {})
{
    tol.validate();
    if (!(lo < hi))
        throw DomainError("find_root requires lo < hi");
    double flo = f(lo);
    double fhi = f(hi);
    if (!std::isfinite(flo))
        throw EvaluationError("find_root: f not finite", lo);
    if (!std::isfinite(fhi))
        throw EvaluationError("find_root: f not finite", hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw DomainError("find_root: endpoints do not bracket a root");

    int side = 0;
    for (int it = 0; it < tol.max_iter; ++it)
    {
        const double width = hi - lo;
        double x = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(x > lo && x < hi))
            x = 0.5 * (lo + hi);
        double fx = f(x);
        if (!std::isfinite(fx))
            throw EvaluationError("find_root: f not finite", x);
        if (fx == 0.0)
            return x;
        if ((fx > 0.0) == (flo > 0.0))
        {
            lo = x;
            flo = fx;
            if (side == -1)
                fhi *= 0.5;
            side = -1;
        }
        else
        {
            hi = x;
            fhi = fx;
            if (side == 1)
                flo *= 0.5;
            side = 1;
        }
        if (hi - lo > 0.5 * width)
        {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if (!std::isfinite(fm))
                throw EvaluationError("find_root: f not finite", mid);
            if (fm == 0.0)
                return mid;
            if ((fm > 0.0) == (flo > 0.0))
            {
                lo = mid;
                flo = fm;
            }
            else
            {
                hi = mid;
                fhi = fm;
            }
            side = 0;
        }
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= std::max(tol.abs_tol, tol.rel_tol * std::abs(mid)))
            return mid;
    }
    throw ConvergenceError("find_root: iteration budget exhausted");
}

/// Tracks successive step sizes of a geometric iteration.
class ConvergenceMonitor
{
public:
    enum class Status
    {
        running,
        converged,
        diverging
    };

    /// `growth_window` consecutive increases of |delta| flag divergence.
    explicit ConvergenceMonitor(double tol, int growth_window = 10)
      : tol_{tol}, window_{growth_window}
    {
        if (!(tol > 0.0) || growth_window < 1)
            throw DomainError("ConvergenceMonitor requires tol > 0 and window >= 1");
    }

    Status push(double delta)
    {
        const double mag = std::abs(delta);
        if (!std::isfinite(mag))
            return Status::diverging;
        if (mag < tol_)
            return Status::converged;
        growth_ = (has_last_ && mag > last_) ? growth_ + 1 : 0;
        last_ = mag;
        has_last_ = true;
        return growth_ >= window_ ? Status::diverging : Status::running;
    }

    int growth_streak() const noexcept { return growth_; }

private:
    double tol_;
    int window_;
    double last_ = 0.0;
    bool has_last_ = false;
    int growth_ = 0;
};
}  // namespace feelab
