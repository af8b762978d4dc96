// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/supply.hpp>

#include <feelab/demand.hpp>
#include <feelab/errors.hpp>

#include <cmath>
#include <limits>

namespace feelab
{
MarketParams MarketParams::make(double sigma, double U, double c_m, double f_e, double mu, double P,
                                double br, double nu)
{
    MarketParams p;
    p.sigma = sigma;
    p.U = U;
    p.c_m = c_m;
    p.f_e = f_e;
    p.mu = mu;
    p.P = P;
    p.br = br;
    p.nu = nu;
    p.alpha_const = p.difficulty_constant();
    p.validate();
    return p;
}

double MarketParams::difficulty_constant() const
{
    return mu * U * std::pow(sigma / c_m, sigma) * std::pow((1.0 - sigma) / f_e, 1.0 - sigma);
}

void MarketParams::validate() const
{
    if (!(sigma > 0.0 && sigma < 1.0))
        throw DomainError("sigma must lie in (0, 1)");
    if (!(U > 0.0) || !(c_m > 0.0) || !(f_e > 0.0) || !(mu > 0.0))
        throw DomainError("U, c_m, f_e and mu must be positive");
    if (!(P >= 0.0) || !(br >= 0.0) || !(nu >= 0.0))
        throw DomainError("P, br and nu must be non-negative");
    const double expected = difficulty_constant();
    if (!(std::abs(alpha_const - expected) <= 1e-12 * std::abs(expected)))
        throw DomainError("alpha_const does not match the other parameters");
}

double hash_rate(double n, double S, const MarketParams& params)
{
    if (!(S > 0.0))
        throw DomainError("predicate size must be positive");
    if (!(n >= 0.0))
        throw DomainError("pool size must be non-negative");
    return params.U * std::pow(n, params.sigma) / S;
}

double pool_profit(double n, double S, double aggregate_H, double Rev, const MarketParams& params)
{
    if (!(aggregate_H > 0.0))
        throw DomainError("aggregate hash rate must be positive");
    const double rewards = Rev + params.block_reward_value();
    return hash_rate(n, S, params) / aggregate_H * rewards - params.c_m * n - params.f_e;
}

double best_response_pool_size(double S, double aggregate_H, double Rev, const MarketParams& params)
{
    if (!(S > 0.0))
        throw DomainError("predicate size must be positive");
    if (!(aggregate_H > 0.0))
        throw DomainError("aggregate hash rate must be positive");
    const double rewards = Rev + params.block_reward_value();
    if (!(rewards > 0.0))
        throw DomainError("mining rewards must be positive");
    const double base = params.sigma * rewards / (params.c_m * (S / params.U) * aggregate_H);
    return std::pow(base, 1.0 / (1.0 - params.sigma));
}

SupplyState equilibrium_from_revenue(double S, double Rev, const MarketParams& params)
{
    if (!(S > 0.0))
        throw DomainError("predicate size must be positive");
    if (!(Rev >= 0.0))
        throw DomainError("fee revenue must be non-negative");
    SupplyState s;
    const double rewards = Rev + params.block_reward_value();
    s.Rev = Rev;
    s.N = (1.0 - params.sigma) * rewards / params.f_e;
    if (s.N > 0.0)
    {
        s.n_star = params.sigma * rewards / (params.c_m * s.N);
        s.H = hash_rate(s.n_star, S, params);
        s.d = std::log(params.mu * s.H * s.N);
    }
    else
    {
        s.d = -std::numeric_limits<double>::infinity();
    }
    return s;
}

SupplyState equilibrium_miners(double S, double rho, const MarketParams& params,
                               const WaitCostDistribution& dist)
{
    const double Rev = S * psi({rho, params.mu}, dist);
    return equilibrium_from_revenue(S, Rev, params);
}

double difficulty_from_psi(double S, double psi_value, const MarketParams& params)
{
    if (!(S > 0.0))
        throw DomainError("predicate size must be positive");
    return std::log(params.alpha_const * (S * psi_value + params.block_reward_value()) / S);
}

double difficulty(double S, double rho, const MarketParams& params, const WaitCostDistribution& dist)
{
    return difficulty_from_psi(S, psi({rho, params.mu}, dist), params);
}
}  // namespace feelab
