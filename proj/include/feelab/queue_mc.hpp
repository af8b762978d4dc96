// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <feelab/distribution.hpp>

#include <array>
#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

namespace feelab::mc
{
/// Name of the generator behind every replication.
inline constexpr std::string_view rng_name = "mt19937_64";

/// One replication of the priority batch-service queue.
///
/// Users arrive as a Poisson(lambda) stream with i.i.d. delay costs; blocks
/// arrive as a Poisson(mu) stream and each removes up to S pending
/// transactions in descending cost order, FIFO among equal costs.
struct SimConfig
{
    double lambda = 0.0;
    double mu = 1.0;
    int S = 1;
    WaitCostDistribution dist = WaitCostDistribution::uniform();
    double horizon = 0.0;  ///< simulated time
    double warmup = 0.0;   ///< arrivals before this time are not measured
    std::uint64_t seed = 0;
    bool keep_samples = false;

    /// Throws DomainError (or CongestionOverflow for lambda >= mu S).
    void validate() const;

    /// lambda = rho mu S, horizon = blocks / mu, warmup a fraction of it.
    static SimConfig at_congestion(double rho, double mu, int S, WaitCostDistribution dist,
                                   double blocks, std::uint64_t seed, double warmup_fraction = 0.1);

    double rho() const { return lambda / (mu * S); }
};

struct WaitSample
{
    double c;
    double wait;
};

struct DecileStats
{
    std::int64_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
    void add(const DecileStats& o)
    {
        n += o.n;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
};

struct RunResult
{
    std::vector<WaitSample> samples;  ///< filled only with keep_samples
    std::array<DecileStats, 10> deciles{};
    std::int64_t arrivals = 0;
    std::int64_t blocks = 0;
    std::int64_t measured = 0;
    /// time-averaged pending count over the first and second half of the
    /// measurement window
    double mean_pending_first_half = 0.0;
    double mean_pending_second_half = 0.0;
};

RunResult run(const SimConfig& config);

/// Seed of replication `index` derived from a base seed (splitmix64 step).
std::uint64_t replication_seed(std::uint64_t base, int index);

/// Independent replications of `base` with seeds replication_seed(base.seed, i),
/// evaluated on up to `jobs` threads. Results are in replication order.
std::vector<RunResult> run_replications(const SimConfig& base, int count, int jobs = 1);

/// Pools decile statistics (and counters) of several replications.
RunResult merge(const std::vector<RunResult>& results);

struct ComparisonRow
{
    int decile;
    double c_mid;
    double empirical_mean;
    double theory;
    double rel_error;
    std::int64_t n_samples;
};

struct ComparisonTable
{
    std::vector<ComparisonRow> rows;  ///< deciles with at least one sample
    bool sufficient = true;           ///< every decile has >= min_samples
    bool monotone = true;             ///< empirical mean non-increasing in decile
    double max_rel_error = 0.0;
    double mean_rel_error = 0.0;
};

/// Per-decile comparison against the analytic wait at the decile's median cost.
ComparisonTable compare_to_theory(const RunResult& result, const SimConfig& config,
                                  std::int64_t min_samples = 1000);

/// decile,c_mid,empirical_mean,theory,rel_error,n_samples
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
}  // namespace feelab::mc
