// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <feelab/queue_mc.hpp>
#include <feelab/scenario.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace feelab::cli
{
inline constexpr const char* version = "0.1.0";

enum ExitCode : int
{
    exit_ok = 0,
    exit_config = 2,
    exit_divergence = 3,
    exit_validation = 4,
};

struct Options
{
    std::filesystem::path scenario;  ///< empty: baseline
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string format = "csv";  ///< csv | json
};

/// One grid point of a sweep. Metrics follow sweep_metric_names().
struct SweepPoint
{
    int index = 0;
    double axis_value = 0.0;
    std::string status;  ///< converged | overflow | oscillation | max-periods | error | skipped
    std::string message;
    std::vector<double> metrics;
};

const std::vector<std::string>& sweep_metric_names();

/// Runs every grid point of `scenario.sweep`.
///
/// gamma, rho and sigma points are independent demand shocks of size
/// shock.dlog_lambda and run on up to `jobs` threads. lambda points form a
/// chain: each is reached by one shock from the previous point's steady state,
/// the first from the steady state at init.lambda0.
std::vector<SweepPoint> run_sweep(const Scenario& scenario, int jobs = 1);

struct McValidation
{
    mc::SimConfig config;
    mc::RunResult pooled;
    mc::ComparisonTable table;
    bool passed = false;
};

/// Replications of the queue at the scenario's MC settings, pooled and
/// compared with the analytic waits.
McValidation run_mc_validation(const Scenario& scenario, int jobs = 1);

/// Subcommand handlers. Each writes its files and manifest.json into
/// options.out and returns an exit code.
int cmd_steady_state(const Scenario& scenario, const Options& options, std::ostream& log);
int cmd_shock(const Scenario& scenario, const Options& options, std::ostream& log);
int cmd_sweep(const Scenario& scenario, const Options& options, std::ostream& log);
int cmd_elasticity_bound(const Scenario& scenario, const Options& options, std::ostream& log);
int cmd_mc_validate(const Scenario& scenario, const Options& options, std::ostream& log);

/// Parses the command line and dispatches. Never throws.
int run(int argc, char** argv, std::ostream& log, std::ostream& err);
}  // namespace feelab::cli
