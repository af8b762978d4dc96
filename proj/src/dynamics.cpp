// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/dynamics.hpp>

#include <feelab/csv.hpp>
#include <feelab/demand.hpp>
#include <feelab/errors.hpp>
#include <feelab/numerics.hpp>

#include <cmath>

namespace feelab
{
std::string_view to_string(RuleKind kind)
{
    switch (kind)
    {
    case RuleKind::fixed:
        return "fixed";
    case RuleKind::floating:
        return "floating";
    case RuleKind::pegged:
        return "pegged";
    }
    return "unknown";
}

std::string_view to_string(Divergence reason)
{
    switch (reason)
    {
    case Divergence::overflow:
        return "overflow";
    case Divergence::oscillation:
        return "oscillation";
    case Divergence::max_periods:
        return "max-periods";
    }
    return "unknown";
}

void UpdateRule::validate() const
{
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw DomainError("update gain gamma must be non-negative");
    if (kind == RuleKind::pegged && !d_star)
        throw DomainError("pegged rule requires a target difficulty");
    if (d_star && !std::isfinite(*d_star))
        throw DomainError("target difficulty must be finite");
}

double UpdateRule::log_step(double d_now, double d_prev) const
{
    switch (kind)
    {
    case RuleKind::fixed:
        return 0.0;
    case RuleKind::floating:
        return gamma * (d_now - d_prev);
    case RuleKind::pegged:
        return gamma * (d_now - *d_star);
    }
    return 0.0;
}

MarketState make_state(int t, double S, double lambda, const MarketParams& params,
                       const WaitCostDistribution& dist)
{
    if (!(S > 0.0) || !std::isfinite(S))
        throw DomainError("predicate size must be positive and finite");
    if (!(lambda > 0.0))
        throw DomainError("demand must be positive");
    MarketState s;
    s.t = t;
    s.S = S;
    s.lambda = lambda;
    s.rho = lambda / (params.mu * S);
    const CongestionPoint point{s.rho, params.mu};
    point.validate();
    s.psi = psi(point, dist);
    const auto supply = equilibrium_from_revenue(S, S * s.psi, params);
    s.Rev = supply.Rev;
    s.N = supply.N;
    s.d = difficulty_from_psi(S, s.psi, params);
    if (!std::isfinite(s.d))
        throw EvaluationError("difficulty is not representable", s.rho);
    s.welfare = welfare(s, params, dist);
    return s;
}

MarketState step(const MarketState& state, std::optional<double> prev_d, const UpdateRule& rule,
                 const MarketParams& params, const WaitCostDistribution& dist)
{
    rule.validate();
    const double d_prev = prev_d.value_or(state.d);
    const double next_S = state.S * std::exp(rule.log_step(state.d, d_prev));
    return make_state(state.t + 1, next_S, state.lambda, params, dist);
}

Trajectory simulate(double S0, double lambda, const UpdateRule& rule, const MarketParams& params,
                    const WaitCostDistribution& dist, const SimulationOptions& options)
{
    rule.validate();
    if (options.horizon < 1)
        throw DomainError("horizon must be at least one period");
    Trajectory traj;
    traj.states.push_back(make_state(0, S0, lambda, params, dist));

    ConvergenceMonitor monitor(options.ss_tol, options.growth_window);
    std::optional<double> prev_d = options.prev_d;
    for (int t = 0; t < options.horizon; ++t)
    {
        const MarketState& current = traj.states.back();
        MarketState next;
        try
        {
            next = step(current, prev_d, rule, params, dist);
        }
        catch (const CongestionOverflow&)
        {
            traj.divergence_reason = Divergence::overflow;
            return traj;
        }
        catch (const EvaluationError&)
        {
            traj.divergence_reason = Divergence::overflow;
            return traj;
        }
        prev_d = current.d;
        const double delta = std::log(next.S) - std::log(current.S);
        traj.states.push_back(next);
        switch (monitor.push(delta))
        {
        case ConvergenceMonitor::Status::converged:
            traj.converged = true;
            traj.steady_state = traj.states.back();
            return traj;
        case ConvergenceMonitor::Status::diverging:
            traj.divergence_reason = Divergence::oscillation;
            return traj;
        case ConvergenceMonitor::Status::running:
            break;
        }
    }
    traj.divergence_reason = Divergence::max_periods;
    return traj;
}

namespace
{
constexpr double series_cutoff = 1e-12;
constexpr int series_max_terms = 100000;

// Mean of the closed-form elasticity over the step in log rho (three-point
// Gauss-Legendre), i.e. the arc elasticity of one period.
double step_elasticity(double rho_a, double rho_b, double mu, const WaitCostDistribution& dist)
{
    const double xa = std::log(rho_a);
    const double xb = std::log(rho_b);
    const double mid = 0.5 * (xa + xb);
    const double half = 0.5 * (xb - xa);
    const double e_mid = epsilon({std::exp(mid), mu}, dist);
    if (std::abs(half) < 1e-9)
        return e_mid;
    const double node = std::sqrt(0.6) * half;
    const double e_lo = epsilon({std::exp(mid - node), mu}, dist);
    const double e_hi = epsilon({std::exp(mid + node), mu}, dist);
    return (5.0 * e_lo + 8.0 * e_mid + 5.0 * e_hi) / 18.0;
}

double floating_series(double gamma, double rho_before, const Trajectory& after, double mu,
                       const WaitCostDistribution& dist)
{
    std::vector<double> path{rho_before};
    for (const auto& s : after.states)
        path.push_back(s.rho);
    double sum = 1.0;
    double product = 1.0;
    double last_eps = epsilon({path.back(), mu}, dist);
    for (int t = 1; t <= series_max_terms; ++t)
    {
        const auto k = static_cast<std::size_t>(t - 1);
        const double eps_k = k + 1 < path.size() ? step_elasticity(path[k], path[k + 1], mu, dist) : last_eps;
        product *= -gamma * eps_k;
        sum += product;
        if (std::abs(product) < series_cutoff)
            return sum;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double pegged_series(double gamma, double rho_target, const Trajectory& after, double mu,
                     const WaitCostDistribution& dist)
{
    double product = 1.0;
    const double target_eps = epsilon({rho_target, mu}, dist);
    for (int k = 0; k < series_max_terms; ++k)
    {
        const auto idx = static_cast<std::size_t>(k);
        const double eps_k = idx < after.states.size()
                                 ? step_elasticity(after.states[idx].rho, rho_target, mu, dist)
                                 : target_eps;
        product *= 1.0 - gamma * eps_k;
        if (std::abs(product) < series_cutoff)
            return product;
    }
    return std::numeric_limits<double>::quiet_NaN();
}
}  // namespace

ShockResult shock_from(const MarketState& start, double dlog_lambda, const UpdateRule& rule,
                       const MarketParams& params, const WaitCostDistribution& dist,
                       const SimulationOptions& options)
{
    if (!(dlog_lambda != 0.0) || !std::isfinite(dlog_lambda))
        throw DomainError("demand shock must be finite and non-zero");
    ShockResult out;
    out.dlog_lambda = dlog_lambda;
    out.series_exact = params.block_reward_value() == 0.0;
    out.rho_before = start.rho;

    SimulationOptions post = options;
    post.prev_d = start.d;
    try
    {
        out.after = simulate(start.S, start.lambda * std::exp(dlog_lambda), rule, params, dist, post);
    }
    catch (const CongestionOverflow&)
    {
        out.divergence_reason = Divergence::overflow;
        return out;
    }
    catch (const EvaluationError&)
    {
        out.divergence_reason = Divergence::overflow;
        return out;
    }
    if (!out.after.converged)
    {
        out.divergence_reason = out.after.divergence_reason;
        return out;
    }
    out.converged = true;
    out.rho_after = out.after.steady_state->rho;
    out.measured = (std::log(out.rho_after) - std::log(out.rho_before)) / dlog_lambda;

    switch (rule.kind)
    {
    case RuleKind::fixed:
        out.series = 1.0;
        break;
    case RuleKind::floating:
        out.series = floating_series(rule.gamma, out.rho_before, out.after, params.mu, dist);
        break;
    case RuleKind::pegged:
        out.series = pegged_series(rule.gamma, out.rho_after, out.after, params.mu, dist);
        break;
    }
    return out;
}

ShockResult shock_elasticity(double S0, double lambda0, double dlog_lambda, const UpdateRule& rule,
                             const MarketParams& params, const WaitCostDistribution& dist,
                             const SimulationOptions& options)
{
    if (!(dlog_lambda != 0.0) || !std::isfinite(dlog_lambda))
        throw DomainError("demand shock must be finite and non-zero");
    SimulationOptions pre = options;
    pre.prev_d.reset();
    Trajectory before = simulate(S0, lambda0, rule, params, dist, pre);
    if (!before.converged)
    {
        ShockResult out;
        out.dlog_lambda = dlog_lambda;
        out.series_exact = params.block_reward_value() == 0.0;
        out.divergence_reason = before.divergence_reason;
        out.before = std::move(before);
        return out;
    }
    ShockResult out = shock_from(*before.steady_state, dlog_lambda, rule, params, dist, options);
    out.before = std::move(before);
    return out;
}

double welfare(double S, double lambda, const MarketParams& params, const WaitCostDistribution& dist)
{
    if (lambda == 0.0)
        return 0.0;
    const CongestionPoint point{lambda / (params.mu * S), params.mu};
    const double Rev = S * psi(point, dist);
    return params.nu * lambda - lambda * expected_wait_cost(point, dist) -
           (Rev + params.block_reward_value()) * params.mu;
}

double welfare(const MarketState& state, const MarketParams& params, const WaitCostDistribution& dist)
{
    const CongestionPoint point{state.rho, params.mu};
    return params.nu * state.lambda - state.lambda * expected_wait_cost(point, dist) -
           (state.Rev + params.block_reward_value()) * params.mu;
}

double pegged_difficulty_for(double rho_target, double S_ref, const MarketParams& params,
                             const WaitCostDistribution& dist)
{
    return difficulty(S_ref, rho_target, params, dist);
}

double pegged_target_congestion(double d_star, const MarketParams& params, const WaitCostDistribution& dist)
{
    if (params.block_reward_value() != 0.0)
        throw DomainError("the pegged target congestion is defined at zero block reward");
    const double log_target = d_star - std::log(params.alpha_const);
    auto gap = [&](double rho) { return std::log(psi({rho, params.mu}, dist)) - log_target; };
    return find_root(gap, 0.02, 0.999, Tolerance{1e-14, 1e-13, 400});
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory)
{
    CsvWriter csv(out, {"t", "S", "lambda", "rho", "psi", "Rev", "N", "d", "welfare"});
    for (const auto& s : trajectory.states)
        csv.row(s.t, s.S, s.lambda, s.rho, s.psi, s.Rev, s.N, s.d, s.welfare);
}
}  // namespace feelab
