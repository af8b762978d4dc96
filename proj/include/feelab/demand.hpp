// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <feelab/distribution.hpp>
#include <feelab/numerics.hpp>

#include <vector>

namespace feelab
{
/// Congestion rho = lambda / (mu S) together with the block rate mu.
struct CongestionPoint
{
    double rho;
    double mu = 1.0;

    void validate() const;
};

/// The wait-time formula evaluated at load x = rho * (1 - F(c)).
///
/// Wait quantities are in units of the mean block interval 1/mu.
struct WaitKernel
{
    double load = 0.0;
    double alpha = 0.0;       ///< positive root at `load`; +inf at load 0
    double wait = 1.0;        ///< mu * W
    double excess = 0.0;      ///< mu * W - 1, without cancellation
    double slope = 0.0;       ///< d(mu W)/dx = exp(-a) a^3 (mu W)^3
    double elasticity = 0.0;  ///< x/W dW/dx = x exp(-a) a^3 (mu W)^2
};

/// Throws CongestionOverflow for load >= 1, DomainError for load < 0.
WaitKernel wait_kernel(double load);

/// Expected wait of a user with delay cost c (time units).
double wait_time(double c, const CongestionPoint& point, const WaitCostDistribution& dist);

/// dW/dc, by the chain rule through the load: -rho f(c) dW/dx. Non-positive.
double wait_time_slope(double c, const CongestionPoint& point, const WaitCostDistribution& dist);

/// Equilibrium fee bid tf(c) = integral_0^c s |dW/ds| ds.
///
/// |dW/ds| = rho f(s) dW/dx; the f(s) in the displayed integrand is the chain
/// factor of the load, so the integrand is s f(s) rho dW/dx.
double fee(double c, const CongestionPoint& point, const WaitCostDistribution& dist);

struct FeePoint
{
    double c;
    double fee;
    double wait;
};

/// Fees and waits on Chebyshev-spaced costs over [0, c_bar], ascending in c.
struct FeeSchedule
{
    std::vector<FeePoint> points;
};

FeeSchedule fee_schedule(const CongestionPoint& point, const WaitCostDistribution& dist, int nodes = 65);

/// Average fee psi(rho) = rho * integral (F̄(c) - c f(c)) W(c; rho) dc.
double psi(const CongestionPoint& point, const WaitCostDistribution& dist);

/// The same quantity through the bids: rho * integral tf(c) dF(c).
///
/// Nested quadrature; far slower than psi() and kept as its cross-check.
double psi_from_fees(const CongestionPoint& point, const WaitCostDistribution& dist);

/// Elasticity d log psi / d log rho in closed form.
double epsilon(const CongestionPoint& point, const WaitCostDistribution& dist);

/// Distribution-free candidate bound 1 + rho exp(-a(rho)) a(rho)^3 (mu W(rho))^2.
double epsilon_bar(double rho);

/// Mean delay cost per user, integral c W(c; rho) dF(c) (USD).
double expected_wait_cost(const CongestionPoint& point, const WaitCostDistribution& dist);
}  // namespace feelab
