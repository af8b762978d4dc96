// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/queue_mc.hpp>

#include <feelab/csv.hpp>
#include <feelab/demand.hpp>
#include <feelab/errors.hpp>
#include <feelab/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

namespace feelab::mc
{
namespace
{
struct Pending
{
    double cost;
    std::uint64_t seq;
    double arrival;
    int decile;
};

// Highest cost on top; among equal costs the earliest arrival.
struct ServiceOrder
{
    bool operator()(const Pending& a, const Pending& b) const
    {
        if (a.cost != b.cost)
            return a.cost < b.cost;
        return a.seq > b.seq;
    }
};

class Stream
{
public:
    explicit Stream(std::uint64_t seed) : engine_{seed} {}

    // uniform on [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};
}  // namespace

void SimConfig::validate() const
{
    if (S < 1)
        throw DomainError("block capacity S must be at least 1");
    if (!(mu > 0.0))
        throw DomainError("block rate mu must be positive");
    if (!(lambda >= 0.0))
        throw DomainError("arrival rate must be non-negative");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError("horizon must be positive");
    if (!(warmup >= 0.0 && warmup < horizon))
        throw DomainError("warmup must lie in [0, horizon)");
    if (!(rho() < 1.0))
        throw CongestionOverflow("simulated queue is unstable", rho());
}

SimConfig SimConfig::at_congestion(double rho, double mu, int S, WaitCostDistribution dist, double blocks,
                                   std::uint64_t seed, double warmup_fraction)
{
    SimConfig c;
    c.lambda = rho * mu * S;
    c.mu = mu;
    c.S = S;
    c.dist = std::move(dist);
    c.horizon = blocks / mu;
    c.warmup = warmup_fraction * c.horizon;
    c.seed = seed;
    c.validate();
    return c;
}

RunResult run(const SimConfig& config)
{
    config.validate();
    RunResult out;
    Stream arrivals_rng{config.seed};
    Stream blocks_rng{replication_seed(config.seed, -1)};

    std::priority_queue<Pending, std::vector<Pending>, ServiceOrder> pool;
    const double mid = 0.5 * (config.warmup + config.horizon);
    double area_first = 0.0;
    double area_second = 0.0;
    double last_t = config.warmup;
    auto account = [&](double t) {
        // pending-count area between the previous event and t, split at mid
        if (t <= config.warmup)
            return;
        const double from = std::max(last_t, config.warmup);
        const auto n = static_cast<double>(pool.size());
        if (t <= mid)
            area_first += n * (t - from);
        else if (from >= mid)
            area_second += n * (t - from);
        else
        {
            area_first += n * (mid - from);
            area_second += n * (t - mid);
        }
        last_t = t;
    };

    const double inf = std::numeric_limits<double>::infinity();
    double next_arrival = config.lambda > 0.0 ? arrivals_rng.exponential(config.lambda) : inf;
    double next_block = blocks_rng.exponential(config.mu);
    std::uint64_t seq = 0;
    while (true)
    {
        const double t = std::min(next_arrival, next_block);
        if (t > config.horizon)
            break;
        account(t);
        if (next_arrival <= next_block)
        {
            const double u = arrivals_rng.uniform();
            const int decile = std::min(9, static_cast<int>(u * 10.0));
            pool.push({config.dist.quantile(u), seq++, t, decile});
            ++out.arrivals;
            next_arrival = t + arrivals_rng.exponential(config.lambda);
        }
        else
        {
            ++out.blocks;
            for (int k = 0; k < config.S && !pool.empty(); ++k)
            {
                const Pending p = pool.top();
                pool.pop();
                if (p.arrival < config.warmup)
                    continue;
                const double wait = t - p.arrival;
                auto& bin = out.deciles[static_cast<std::size_t>(p.decile)];
                ++bin.n;
                bin.sum += wait;
                bin.sum_sq += wait * wait;
                ++out.measured;
                if (config.keep_samples)
                    out.samples.push_back({p.cost, wait});
            }
            next_block = t + blocks_rng.exponential(config.mu);
        }
    }
    account(config.horizon);
    out.mean_pending_first_half = area_first / (mid - config.warmup);
    out.mean_pending_second_half = area_second / (config.horizon - mid);
    return out;
}

std::uint64_t replication_seed(std::uint64_t base, int index)
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(static_cast<std::int64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<RunResult> run_replications(const SimConfig& base, int count, int jobs)
{
    base.validate();
    if (count < 1)
        throw DomainError("need at least one replication");
    std::vector<RunResult> results(static_cast<std::size_t>(count));
    parallel_for(results.size(), jobs, [&](std::size_t i) {
        SimConfig cfg = base;
        cfg.seed = replication_seed(base.seed, static_cast<int>(i));
        results[i] = run(cfg);
    });
    return results;
}

RunResult merge(const std::vector<RunResult>& results)
{
    RunResult out;
    if (results.empty())
        return out;
    for (const auto& r : results)
    {
        for (std::size_t d = 0; d < out.deciles.size(); ++d)
            out.deciles[d].add(r.deciles[d]);
        out.arrivals += r.arrivals;
        out.blocks += r.blocks;
        out.measured += r.measured;
        out.mean_pending_first_half += r.mean_pending_first_half;
        out.mean_pending_second_half += r.mean_pending_second_half;
        out.samples.insert(out.samples.end(), r.samples.begin(), r.samples.end());
    }
    out.mean_pending_first_half /= static_cast<double>(results.size());
    out.mean_pending_second_half /= static_cast<double>(results.size());
    return out;
}

ComparisonTable compare_to_theory(const RunResult& result, const SimConfig& config, std::int64_t min_samples)
{
    config.validate();
    ComparisonTable table;
    const CongestionPoint point{config.rho(), config.mu};
    double total_error = 0.0;
    double previous_mean = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 10; ++d)
    {
        const auto& bin = result.deciles[static_cast<std::size_t>(d)];
        if (bin.n < min_samples)
            table.sufficient = false;
        if (bin.n == 0)
            continue;
        ComparisonRow row;
        row.decile = d;
        row.c_mid = config.dist.quantile((d + 0.5) / 10.0);
        row.empirical_mean = bin.mean();
        row.theory = wait_time(row.c_mid, point, config.dist);
        row.rel_error = std::abs(row.empirical_mean - row.theory) / row.theory;
        row.n_samples = bin.n;
        if (row.empirical_mean > previous_mean)
            table.monotone = false;
        previous_mean = row.empirical_mean;
        table.max_rel_error = std::max(table.max_rel_error, row.rel_error);
        total_error += row.rel_error;
        table.rows.push_back(row);
    }
    if (!table.rows.empty())
        table.mean_rel_error = total_error / static_cast<double>(table.rows.size());
    return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table)
{
    CsvWriter csv(out, {"decile", "c_mid", "empirical_mean", "theory", "rel_error", "n_samples"});
    for (const auto& r : table.rows)
        csv.row(r.decile, r.c_mid, r.empirical_mean, r.theory, r.rel_error, r.n_samples);
}
}  // namespace feelab::mc
