// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <feelab/distribution.hpp>
#include <feelab/supply.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace feelab
{
enum class RuleKind
{
    fixed,
    floating,
    pegged
};

std::string_view to_string(RuleKind kind);

/// Predicate-size law of motion.
///
///   floating: log(S_{t+1}/S_t) = gamma (d_t - d_{t-1})
///   pegged:   log(S_{t+1}/S_t) = gamma (d_t - d_star)
///   fixed:    S_{t+1} = S_t
struct UpdateRule
{
    RuleKind kind = RuleKind::fixed;
    double gamma = 0.0;
    std::optional<double> d_star;

    static UpdateRule fixed() { return {}; }
    static UpdateRule floating(double gamma) { return {RuleKind::floating, gamma, std::nullopt}; }
    static UpdateRule pegged(double gamma, double d_star) { return {RuleKind::pegged, gamma, d_star}; }

    void validate() const;

    /// log(S_{t+1}/S_t) given this period's and last period's difficulty.
    double log_step(double d_now, double d_prev) const;
};

/// One period's equilibrium snapshot.
struct MarketState
{
    int t = 0;
    double S = 0.0;
    double lambda = 0.0;
    double rho = 0.0;
    double psi = 0.0;
    double Rev = 0.0;
    double N = 0.0;
    double d = 0.0;
    double welfare = 0.0;
};

/// Equilibrium at predicate size S and demand lambda. Throws CongestionOverflow
/// when lambda / (mu S) >= 1 and EvaluationError when the difficulty is not
/// representable.
MarketState make_state(int t, double S, double lambda, const MarketParams& params,
                       const WaitCostDistribution& dist);

/// Applies the rule to `state`. For the floating rule an absent `prev_d`
/// means d_{t-1} = d_t (no adjustment).
MarketState step(const MarketState& state, std::optional<double> prev_d, const UpdateRule& rule,
                 const MarketParams& params, const WaitCostDistribution& dist);

enum class Divergence
{
    overflow,
    oscillation,
    max_periods
};

std::string_view to_string(Divergence reason);

struct SimulationOptions
{
    int horizon = 10000;
    double ss_tol = 1e-8;
    int growth_window = 10;
    /// Difficulty of the period before the first state (floating rule).
    std::optional<double> prev_d;
};

struct Trajectory
{
    std::vector<MarketState> states;
    bool converged = false;
    std::optional<MarketState> steady_state;
    std::optional<Divergence> divergence_reason;
};

Trajectory simulate(double S0, double lambda, const UpdateRule& rule, const MarketParams& params,
                    const WaitCostDistribution& dist, const SimulationOptions& options = {});

struct ShockResult
{
    bool converged = false;
    std::optional<Divergence> divergence_reason;
    double dlog_lambda = 0.0;
    double measured = 0.0;  ///< (log rho*_1 - log rho*_0) / dlog_lambda
    double series = 0.0;    ///< linearized prediction along the trajectory
    bool series_exact = false;  ///< the series is the exact local result only at zero block reward
    double rho_before = 0.0;
    double rho_after = 0.0;
    Trajectory before;
    Trajectory after;
};

/// Runs to a steady state at lambda0, multiplies demand by exp(dlog_lambda)
/// and runs to the new steady state.
///
/// Series prediction, with eps_k the closed-form elasticity averaged over the
/// step from one period's congestion to the next (in log rho):
///   floating: 1 + sum_{t>=1} (-gamma)^t prod_{k=0}^{t-1} eps_k
///   pegged:   prod_{k>=0} (1 - gamma eps_k), eps_k taken between rho_k and the target
ShockResult shock_elasticity(double S0, double lambda0, double dlog_lambda, const UpdateRule& rule,
                             const MarketParams& params, const WaitCostDistribution& dist,
                             const SimulationOptions& options = {});

/// The post-shock half of shock_elasticity, starting from a known steady
/// state. `before` is left empty.
ShockResult shock_from(const MarketState& start, double dlog_lambda, const UpdateRule& rule,
                       const MarketParams& params, const WaitCostDistribution& dist,
                       const SimulationOptions& options = {});

/// nu lambda - lambda E[c W] - (Rev + P br) mu, in USD per unit time.
double welfare(double S, double lambda, const MarketParams& params, const WaitCostDistribution& dist);
double welfare(const MarketState& state, const MarketParams& params, const WaitCostDistribution& dist);

/// Target difficulty that makes (S_ref, rho_target) a pegged steady state.
double pegged_difficulty_for(double rho_target, double S_ref, const MarketParams& params,
                             const WaitCostDistribution& dist);

/// Steady-state congestion of the pegged rule at zero block reward:
/// the rho with psi(rho) = exp(d_star) / alpha_const.
double pegged_target_congestion(double d_star, const MarketParams& params,
                                const WaitCostDistribution& dist);

/// One row per period: t,S,lambda,rho,psi,Rev,N,d,welfare.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
}  // namespace feelab
