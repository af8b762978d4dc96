// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <feelab/distribution.hpp>

namespace feelab
{
/// Exogenous constants of the record-keeping market.
///
/// `f_e` is the per-period cost of operating a pool; the same constant enters
/// the pool profit and the free-entry condition.
struct MarketParams
{
    double sigma = 0.88;  ///< returns to pool size, in (0, 1)
    double U = 1.0;       ///< technology constant (proofs per unit time)
    double c_m = 1.0;     ///< cost per worker per unit time (USD)
    double f_e = 1.0;     ///< fixed cost per pool per period (USD)
    double mu = 1.0;      ///< block rate
    double P = 1.0;       ///< exchange rate (USD per coin)
    double br = 0.0;      ///< block reward (coins per block)
    double nu = 0.0;      ///< value of a verified transaction (USD)
    double alpha_const = 0.0;

    /// Fills alpha_const = mu U (sigma/c_m)^sigma ((1-sigma)/f_e)^(1-sigma) and validates.
    static MarketParams make(double sigma, double U, double c_m, double f_e, double mu, double P,
                             double br, double nu);

    double difficulty_constant() const;
    double block_reward_value() const { return P * br; }

    /// Throws DomainError on a violated invariant, including a stale alpha_const.
    void validate() const;
};

struct SupplyState
{
    double N = 0.0;       ///< active pools
    double n_star = 0.0;  ///< workers per pool
    double H = 0.0;       ///< hash rate per pool
    double d = 0.0;       ///< log(mu H N)
    double Rev = 0.0;     ///< fee revenue per block (USD)
};

/// H(n; S) = U n^sigma / S.
double hash_rate(double n, double S, const MarketParams& params);

/// Expected profit of a pool with n workers facing aggregate hash rate
/// `aggregate_H`: H(n)/aggregate_H (Rev + P br) - c_m n - f_e.
double pool_profit(double n, double S, double aggregate_H, double Rev, const MarketParams& params);

/// Profit-maximizing pool size taking S and the aggregate hash rate as given.
double best_response_pool_size(double S, double aggregate_H, double Rev, const MarketParams& params);

/// Free-entry equilibrium at fee revenue Rev per block.
SupplyState equilibrium_from_revenue(double S, double Rev, const MarketParams& params);

/// Free-entry equilibrium at predicate size S and congestion rho (Rev = S psi(rho)).
SupplyState equilibrium_miners(double S, double rho, const MarketParams& params,
                               const WaitCostDistribution& dist);

/// d = log(alpha_const (S psi(rho) + P br) / S).
double difficulty(double S, double rho, const MarketParams& params, const WaitCostDistribution& dist);

/// Same as difficulty() with psi already evaluated.
double difficulty_from_psi(double S, double psi_value, const MarketParams& params);
}  // namespace feelab
