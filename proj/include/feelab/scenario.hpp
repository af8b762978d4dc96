// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <feelab/distribution.hpp>
#include <feelab/dynamics.hpp>
#include <feelab/supply.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace feelab
{
struct DistributionSpec
{
    std::string kind = "uniform";  ///< uniform | truncated-exponential | tabulated
    double c_bar = 1.0;
    double rate = 1.0;
    std::string file;  ///< tabulated CDF, relative to the scenario file

    WaitCostDistribution build(const std::filesystem::path& base_dir = {}) const;
};

struct SweepSpec
{
    std::string axis;  ///< gamma | lambda | rho | sigma
    std::vector<double> grid;
};

struct MonteCarloSpec
{
    int S = 64;
    std::optional<double> rho;
    std::optional<double> lambda;
    double blocks = 1e6;
    double warmup_fraction = 0.1;
    int seeds = 10;
    double threshold = 0.05;
    std::int64_t min_samples = 1000;
};

/// Everything one CLI invocation needs, with defaults from the baseline.
struct Scenario
{
    MarketParams params = MarketParams::make(0.88, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
    DistributionSpec dist_spec;
    WaitCostDistribution dist = WaitCostDistribution::uniform();
    UpdateRule rule;
    std::optional<double> rho_target;  ///< pegged target given as a congestion level
    double S0 = 2000.0;
    double lambda0 = 1600.0;
    SimulationOptions sim;
    double dlog_lambda = 0.02;
    SweepSpec sweep;
    std::vector<double> bound_grid;
    MonteCarloSpec mc;
    std::uint64_t seed = 1;

    double rho0() const { return lambda0 / (params.mu * S0); }
};

/// sigma 0.88, unit mu/U/c_m/f_e, no block reward, uniform costs on [0, 1],
/// S0 = 2000, rho0 = 0.8, fixed rule.
Scenario baseline_scenario();

/// Parses `key = value` lines over the baseline. `#` starts a comment. Lists
/// are comma separated. Throws ConfigError on unknown or duplicate keys, bad
/// values, and violated cross-field invariants.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Pegged target difficulty for `rho_target` at the scenario's S0.
double resolve_pegged_target(const Scenario& scenario, double rho_target);

/// The resolved configuration as ordered key/value text, for run manifests.
std::vector<std::pair<std::string, std::string>> scenario_entries(const Scenario& scenario);
}  // namespace feelab
