// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "oracles.hpp"

#include <feelab/demand.hpp>
#include <feelab/errors.hpp>
#include <feelab/supply.hpp>

#include <cmath>

using namespace feelab;

namespace
{
MarketParams random_params(oracle::Lcg& rng, bool with_reward)
{
    return MarketParams::make(rng.uniform(0.3, 0.95), rng.uniform(0.5, 5.0), rng.uniform(0.2, 3.0),
                              rng.uniform(0.2, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 2.0),
                              with_reward ? rng.uniform(0.0, 500.0) : 0.0, rng.uniform(0.0, 10.0));
}

// mu H N assembled from the primitives, without the closed-form constant
double difficulty_from_primitives(double S, double rho, const MarketParams& p, const WaitCostDistribution& dist)
{
    const double R = S * psi({rho, p.mu}, dist) + p.P * p.br;
    const double N = (1.0 - p.sigma) * R / p.f_e;
    const double n = p.sigma * R / (p.c_m * N);
    const double H = p.U * std::pow(n, p.sigma) / S;
    return std::log(p.mu * H * N);
}
}  // namespace

TEST_CASE("hash rate")
{
    const auto p = MarketParams::make(0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
    CHECK(hash_rate(0.0, 3.0, p) == 0.0);
    CHECK(hash_rate(4.0, 2.0, p) == doctest::Approx(1.0));
    CHECK(hash_rate(9.0, 6.0, p) == doctest::Approx(2.0 * hash_rate(9.0, 12.0, p)));
    CHECK_THROWS_AS(hash_rate(1.0, 0.0, p), DomainError);
    CHECK_THROWS_AS(hash_rate(-1.0, 1.0, p), DomainError);
}

TEST_CASE("market parameter invariants")
{
    CHECK_THROWS_AS(MarketParams::make(1.0, 1, 1, 1, 1, 1, 0, 0), DomainError);
    CHECK_THROWS_AS(MarketParams::make(0.0, 1, 1, 1, 1, 1, 0, 0), DomainError);
    CHECK_THROWS_AS(MarketParams::make(0.5, 0, 1, 1, 1, 1, 0, 0), DomainError);
    CHECK_THROWS_AS(MarketParams::make(0.5, 1, 1, 1, 0, 1, 0, 0), DomainError);
    CHECK_THROWS_AS(MarketParams::make(0.5, 1, 1, 1, 1, 1, -1, 0), DomainError);
    auto p = MarketParams::make(0.88, 1, 1, 1, 1, 1, 0, 0);
    CHECK(p.alpha_const == doctest::Approx(std::pow(0.88, 0.88) * std::pow(0.12, 0.12)));
    p.sigma = 0.5;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("best response and the symmetric fixed point")
{
    const auto p = MarketParams::make(0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
    // symmetric n* = sigma R / (c_m N) = 0.5 * 100 / 10
    const double S = 3.0, N = 10.0, n_sym = 5.0;
    const double aggregate = N * hash_rate(n_sym, S, p);
    CHECK(best_response_pool_size(S, aggregate, 100.0, p) == doctest::Approx(n_sym).epsilon(1e-12));
    CHECK_THROWS_AS(best_response_pool_size(S, 0.0, 100.0, p), DomainError);
    CHECK_THROWS_AS(best_response_pool_size(S, 1.0, 0.0, p), DomainError);

    oracle::Lcg rng(21);
    for (int i = 0; i < 20; ++i)
    {
        const auto q = random_params(rng, true);
        const double Sq = rng.uniform(10, 5000);
        const double Rev = rng.uniform(1, 1000);
        const double agg = rng.uniform(0.1, 100) * hash_rate(1.0, Sq, q);
        const double n = best_response_pool_size(Sq, agg, Rev, q);
        const double best = pool_profit(n, Sq, agg, Rev, q);
        // grid-search oracle around the best response
        for (int k = -20; k <= 20; ++k)
        {
            if (k == 0)
                continue;
            REQUIRE(pool_profit(n * (1.0 + 0.001 * k), Sq, agg, Rev, q) < best);
        }
    }
}

TEST_CASE("free-entry equilibrium")
{
    const auto p = MarketParams::make(0.9, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
    const auto s = equilibrium_from_revenue(50.0, 100.0, p);
    CHECK(s.N == doctest::Approx(10.0));
    CHECK(s.Rev == 100.0);

    oracle::Lcg rng(23);
    const auto dist = WaitCostDistribution::uniform();
    for (int i = 0; i < 50; ++i)
    {
        const auto q = random_params(rng, i % 2 == 1);
        const double S = rng.uniform(10, 10000);
        const double rho = rng.uniform(0.05, 0.95);
        const auto e = equilibrium_miners(S, rho, q, dist);
        const double R = e.Rev + q.block_reward_value();
        CHECK(e.Rev == doctest::Approx(S * psi({rho, q.mu}, dist)).epsilon(1e-14));
        // zero profit at the symmetric equilibrium
        REQUIRE(std::abs(pool_profit(e.n_star, S, e.N * e.H, e.Rev, q)) <= 1e-8 * R);
        // each pool wins a block with probability 1/N
        CHECK(e.H / (e.N * e.H) == doctest::Approx(1.0 / e.N));
        // per-pool hash rate depends only on technology and S
        const double closed = q.U * std::pow(q.sigma * q.f_e / ((1.0 - q.sigma) * q.c_m), q.sigma) / S;
        REQUIRE(e.H == doctest::Approx(closed).epsilon(1e-12));
        // the pool size is its own best response
        REQUIRE(best_response_pool_size(S, e.N * e.H, e.Rev, q) == doctest::Approx(e.n_star).epsilon(1e-10));
    }
}

TEST_CASE("pool count comparative statics")
{
    auto p = MarketParams::make(0.8, 1, 1, 1, 1, 1, 0, 0);
    double prev = 0.0;
    for (double Rev : {1.0, 5.0, 20.0, 100.0})
    {
        const double N = equilibrium_from_revenue(10.0, Rev, p).N;
        CHECK(N > prev);
        prev = N;
    }
    prev = 1e300;
    for (double fe : {0.5, 1.0, 2.0, 4.0})
    {
        const auto q = MarketParams::make(0.8, 1, 1, fe, 1, 1, 0, 0);
        const double N = equilibrium_from_revenue(10.0, 20.0, q).N;
        CHECK(N < prev);
        prev = N;
    }
}

TEST_CASE("difficulty identity across random draws")
{
    oracle::Lcg rng(29);
    for (int i = 0; i < 50; ++i)
    {
        const auto q = random_params(rng, i % 2 == 0);
        const double S = rng.uniform(10, 10000);
        const double rho = rng.uniform(0.05, 0.95);
        const auto dist = i % 3 == 0 ? WaitCostDistribution::truncated_exponential(2.0)
                                     : WaitCostDistribution::uniform(rng.uniform(0.5, 2.0));
        const double closed = difficulty(S, rho, q, dist);
        REQUIRE(closed == doctest::Approx(difficulty_from_primitives(S, rho, q, dist)).epsilon(1e-8));
        REQUIRE(closed == doctest::Approx(equilibrium_miners(S, rho, q, dist).d).epsilon(1e-8));
    }
}

TEST_CASE("difficulty dependence on predicate size")
{
    const auto dist = WaitCostDistribution::uniform();
    const auto free = MarketParams::make(0.88, 1, 1, 1, 1, 1, 0, 0);
    CHECK(difficulty(100.0, 0.7, free, dist) == doctest::Approx(difficulty(1e5, 0.7, free, dist)).epsilon(1e-14));
    CHECK(difficulty(100.0, 0.7, free, dist) ==
          doctest::Approx(std::log(free.alpha_const * psi({0.7, 1.0}, dist))).epsilon(1e-14));

    const auto rewarded = MarketParams::make(0.88, 1, 1, 1, 1, 1, 50.0, 0);
    double prev = 1e300;
    for (double S : {10.0, 100.0, 1000.0, 10000.0})
    {
        const double d = difficulty(S, 0.7, rewarded, dist);
        CHECK(d < prev);
        prev = d;
    }
}
