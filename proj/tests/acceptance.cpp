// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. One line per criterion: "criterion N PASS|FAIL ...".
// Usage: acceptance [--criterion N]

#include "oracles.hpp"

#include <feelab/commands.hpp>
#include <feelab/demand.hpp>
#include <feelab/dynamics.hpp>
#include <feelab/numerics.hpp>
#include <feelab/queue_mc.hpp>
#include <feelab/scenario.hpp>
#include <feelab/supply.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace feelab;

namespace
{
// Pinned tolerances and budgets.
namespace tol
{
constexpr double root_residual = 1e-10;
constexpr double root_runtime_s = 1.0;
constexpr double shape_convexity = -1e-9;
constexpr double shape_runtime_s = 10.0;
constexpr double elasticity_floor = 1.0 - 1e-9;
constexpr double elasticity_bound_slack = 1e-9;
constexpr double elasticity_convexity = -1e-9;
constexpr double elasticity_agreement = 1e-4;
constexpr double difficulty_identity = 1e-8;
constexpr double zero_profit = 1e-8;
constexpr double series_agreement = 1e-3;
constexpr double prop1_runtime_s = 60.0;
constexpr double pegged_invariance = 1e-4;
constexpr double growth_elasticity = 1e-3;
constexpr double distortion_factor = 10.0;
constexpr double figure_oracle = 1e-6;
constexpr double figure_convexity = -1e-9;
constexpr double mc_rel_error = 0.05;
constexpr double mc_runtime_s = 300.0;
}  // namespace tol

struct Outcome
{
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        pass = pass && ok;
        if (!detail.empty())
            detail += "; ";
        detail += what + (ok ? "" : " [violated]");
    }
};

std::string num(double v)
{
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

class Stopwatch
{
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

const MarketParams baseline = MarketParams::make(0.88, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
const WaitCostDistribution uniform = WaitCostDistribution::uniform();

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i)
        v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

// 1. residual of the root on random loads
Outcome root_residual()
{
    Outcome out;
    std::mt19937_64 rng(20240101);
    std::uniform_real_distribution<double> load(0.0, 1.0);
    std::vector<double> xs;
    while (xs.size() < 1000)
    {
        const double x = load(rng);
        if (x > 0.0)
            xs.push_back(x);
    }
    Stopwatch clock;
    double worst = 0.0;
    for (double x : xs)
        worst = std::max(worst, std::abs(alpha_residual(x, solve_alpha(x))));
    const double elapsed = clock.seconds();
    double worst_plain = 0.0;
    for (double x : xs)
    {
        const double a = solve_alpha(x);
        worst_plain = std::max(worst_plain, std::abs(std::exp(-a) + x * a - 1.0));
    }
    out.require(worst <= tol::root_residual && worst_plain <= tol::root_residual,
                "max residual " + num(std::max(worst, worst_plain)) + " <= " + num(tol::root_residual));
    out.require(elapsed < tol::root_runtime_s, "runtime " + num(elapsed) + " s < " + num(tol::root_runtime_s) + " s");
    return out;
}

// 2. wait-time shape on a 50 x 50 grid
Outcome wait_shape()
{
    Outcome out;
    Stopwatch clock;
    const auto rhos = linspace(0.02, 0.98, 50);
    const auto cs = linspace(0.0, 1.0, 50);
    std::vector<std::vector<double>> W(50, std::vector<double>(50)), E(50, std::vector<double>(50));
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j)
        {
            const CongestionPoint p{rhos[j], 1.0};
            W[i][j] = wait_time(cs[i], p, uniform);
            E[i][j] = wait_kernel(rhos[j] * uniform.survival(cs[i])).excess;
        }
    // monotone in W; strict in the excess W - 1/mu wherever it is representable
    bool dec_c = true, inc_rho = true, convex = true;
    double worst_second = 1e300;
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j)
        {
            if (i + 1 < 50)
                dec_c = dec_c && W[i + 1][j] <= W[i][j] && (E[i][j] == 0.0 || E[i + 1][j] < E[i][j]);
            if (j + 1 < 50)
                inc_rho = inc_rho && W[i][j + 1] >= W[i][j] && (E[i][j + 1] == 0.0 || E[i][j + 1] > E[i][j]);
            if (j + 2 < 50)
            {
                const double second = W[i][j + 2] - 2 * W[i][j + 1] + W[i][j];
                worst_second = std::min(worst_second, second);
                convex = convex && second >= tol::shape_convexity;
            }
        }
    const double elapsed = clock.seconds();
    out.require(dec_c, "W decreasing in c");
    out.require(inc_rho, "W increasing in rho");
    out.require(convex, "min second difference in rho " + num(worst_second) + " >= " + num(tol::shape_convexity));
    out.require(elapsed < tol::shape_runtime_s, "runtime " + num(elapsed) + " s < " + num(tol::shape_runtime_s) + " s");
    return out;
}

// 3. elasticity of the average fee
Outcome elasticity_suite()
{
    Outcome out;
    const auto grid = linspace(0.01, 0.99, 100);
    const std::vector<std::pair<std::string, WaitCostDistribution>> dists{
        {"uniform", uniform}, {"truncated-exponential(3)", WaitCostDistribution::truncated_exponential(3.0)}};
    for (const auto& [name, dist] : dists)
    {
        std::vector<double> eps;
        for (double r : grid)
            eps.push_back(epsilon({r, 1.0}, dist));
        const double lowest = *std::min_element(eps.begin(), eps.end());
        int decreases = 0;
        double worst_drop = 0.0, worst_second = 1e300, worst_excess = -1e300, first_ok = -1.0;
        for (std::size_t i = 0; i < eps.size(); ++i)
        {
            if (i + 1 < eps.size() && eps[i + 1] < eps[i])
            {
                ++decreases;
                worst_drop = std::max(worst_drop, eps[i] - eps[i + 1]);
            }
            if (i + 2 < eps.size())
                worst_second = std::min(worst_second, eps[i + 2] - 2 * eps[i + 1] + eps[i]);
            const double excess = eps[i] - epsilon_bar(grid[i]);
            worst_excess = std::max(worst_excess, excess);
            if (excess <= tol::elasticity_bound_slack && first_ok < 0.0)
                first_ok = grid[i];
        }
        out.require(lowest >= tol::elasticity_floor, name + ": min eps " + num(lowest) + " >= 1");
        out.require(decreases == 0, name + ": non-decreasing (" + std::to_string(decreases) +
                                        " decreasing steps, largest drop " + num(worst_drop) + ")");
        out.require(worst_second >= tol::elasticity_convexity, name + ": min second difference " + num(worst_second));
        out.require(worst_excess <= tol::elasticity_bound_slack,
                    name + ": max eps - eps_bar " + num(worst_excess) + " (bound first holds at rho " +
                        num(first_ok) + ")");

        double worst_gap = 0.0;
        for (int k = 0; k < 10; ++k)
        {
            const double r = grid[static_cast<std::size_t>(5 + 10 * k)];
            const double numeric = log_derivative([&](double x) { return psi({x, 1.0}, dist); }, r, 1e-4);
            worst_gap = std::max(worst_gap, std::abs(numeric - epsilon({r, 1.0}, dist)));
        }
        out.require(worst_gap <= tol::elasticity_agreement,
                    name + ": analytic vs numeric max gap " + num(worst_gap) + " <= " + num(tol::elasticity_agreement));
    }
    return out;
}

// 4. difficulty identity and zero profit
Outcome difficulty_identity()
{
    Outcome out;
    std::mt19937_64 rng(777);
    auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    double worst_identity = 0.0, worst_profit = 0.0;
    for (int i = 0; i < 50; ++i)
    {
        const auto p = MarketParams::make(u(0.3, 0.95), u(0.5, 5), u(0.2, 3), u(0.2, 3), u(0.5, 3), u(0.5, 2),
                                          i % 2 ? u(0, 500) : 0.0, u(0, 10));
        const auto dist = i % 3 == 0 ? WaitCostDistribution::truncated_exponential(u(0.5, 4))
                                     : WaitCostDistribution::uniform(u(0.5, 2));
        const double S = u(10, 10000), rho = u(0.05, 0.95);
        // difficulty assembled from primitives
        const double R = S * psi({rho, p.mu}, dist) + p.P * p.br;
        const double N = (1 - p.sigma) * R / p.f_e;
        const double n = p.sigma * R / (p.c_m * N);
        const double H = p.U * std::pow(n, p.sigma) / S;
        const double d10 = std::log(p.mu * H * N);
        const double d11 = difficulty(S, rho, p, dist);
        worst_identity = std::max(worst_identity, std::abs(d10 - d11) / std::max(1.0, std::abs(d11)));
        const auto e = equilibrium_miners(S, rho, p, dist);
        worst_profit = std::max(worst_profit, std::abs(pool_profit(e.n_star, S, e.N * e.H, e.Rev, p)) / R);
    }
    out.require(worst_identity <= tol::difficulty_identity,
                "max relative identity gap " + num(worst_identity) + " <= " + num(tol::difficulty_identity));
    out.require(worst_profit <= tol::zero_profit,
                "max relative profit residual " + num(worst_profit) + " <= " + num(tol::zero_profit));
    return out;
}

// 5. floating rule below the gain limit
Outcome floating_rule()
{
    Outcome out;
    Stopwatch clock;
    const double S0 = 2000.0, lambda0 = 0.8 * S0;
    const double limit = 1.0 / epsilon_bar(0.8);
    int runs = 0, converged = 0, in_range = 0;
    double worst_gap = 0.0, lo = 1e300, hi = -1e300;
    for (int g = 1; g <= 10; ++g)
    {
        const double gamma = limit * g / 11.0;
        for (double l : {-0.05, -0.02, 0.02, 0.05})
        {
            ++runs;
            const auto r = shock_elasticity(S0, lambda0, l, UpdateRule::floating(gamma), baseline, uniform);
            if (!r.converged)
                continue;
            ++converged;
            in_range += r.measured > 0.5 && r.measured < 1.0;
            lo = std::min(lo, r.measured);
            hi = std::max(hi, r.measured);
            worst_gap = std::max(worst_gap, std::abs(r.series - r.measured));
        }
    }
    const double elapsed = clock.seconds();
    out.require(converged == runs, "converged " + std::to_string(converged) + "/" + std::to_string(runs));
    out.require(in_range == runs, "measured in (0.5, 1): range [" + num(lo) + ", " + num(hi) + "]");
    out.require(worst_gap <= tol::series_agreement,
                "max series gap " + num(worst_gap) + " <= " + num(tol::series_agreement));
    out.require(elapsed < tol::prop1_runtime_s, "runtime " + num(elapsed) + " s < " + num(tol::prop1_runtime_s) + " s");
    return out;
}

struct DemandSweep
{
    bool all_converged = true;
    double rho_spread = 0.0;  // max/min - 1
    double psi_spread = 0.0;
    double S_slope = 0.0;
    double Rev_slope = 0.0;
};

double ls_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DemandSweep pegged_demand_sweep(double block_reward)
{
    Scenario s = baseline_scenario();
    s.params = MarketParams::make(0.88, 1, 1, 1, 1, 1, block_reward, 0);
    s.rule = UpdateRule{RuleKind::pegged, 1.0 / epsilon_bar(0.8), std::nullopt};
    s.rho_target = 0.8;
    s.rule.d_star = resolve_pegged_target(s, 0.8);
    s.sweep.axis = "lambda";
    s.sweep.grid.clear();
    for (int i = 0; i <= 40; ++i)
        s.sweep.grid.push_back(s.lambda0 * std::pow(100.0, i / 40.0));

    const auto& names = cli::sweep_metric_names();
    auto idx = [&](const char* m) { return std::find(names.begin(), names.end(), m) - names.begin(); };
    DemandSweep out;
    std::vector<double> logl, logS, logRev, rho, psi_v;
    for (const auto& p : cli::run_sweep(s, jobs()))
    {
        if (p.status != "converged")
        {
            out.all_converged = false;
            continue;
        }
        logl.push_back(std::log(p.axis_value));
        logS.push_back(std::log(p.metrics[idx("S")]));
        logRev.push_back(std::log(p.metrics[idx("Rev")]));
        rho.push_back(p.metrics[idx("rho_after")]);
        psi_v.push_back(p.metrics[idx("psi")]);
    }
    if (rho.size() < 2)
    {
        out.all_converged = false;
        return out;
    }
    auto spread = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end()) - 1.0;
    };
    out.rho_spread = spread(rho);
    out.psi_spread = spread(psi_v);
    out.S_slope = ls_slope(logl, logS);
    out.Rev_slope = ls_slope(logl, logRev);
    return out;
}

// 6. pegged rule, no block reward
Outcome pegged_balanced_growth()
{
    Outcome out;
    const auto r = pegged_demand_sweep(0.0);
    out.require(r.all_converged, "all 41 demand levels converged");
    out.require(r.rho_spread <= tol::pegged_invariance,
                "rho* spread " + num(r.rho_spread) + " <= " + num(tol::pegged_invariance));
    out.require(r.psi_spread <= tol::pegged_invariance,
                "psi spread " + num(r.psi_spread) + " <= " + num(tol::pegged_invariance));
    out.require(std::abs(r.S_slope - 1.0) <= tol::growth_elasticity, "S elasticity " + num(r.S_slope));
    out.require(std::abs(r.Rev_slope - 1.0) <= tol::growth_elasticity, "Rev elasticity " + num(r.Rev_slope));
    return out;
}

// 7. pegged rule with block reward worth half the baseline fee revenue
Outcome block_reward_distortion()
{
    Outcome out;
    const double rev0 = 2000.0 * psi({0.8, 1.0}, uniform);
    const auto r = pegged_demand_sweep(0.5 * rev0);
    const double floor = tol::distortion_factor * tol::pegged_invariance;
    out.require(r.all_converged, "all 41 demand levels converged");
    out.require(r.rho_spread > floor, "rho* spread " + num(r.rho_spread) + " > " + num(floor));
    return out;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(FEELAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// 8. emitted bound curve
Outcome bound_curve()
{
    Outcome out;
    const fs::path dir = fs::temp_directory_path() / "feelab_acceptance_bound";
    fs::remove_all(dir);
    const int code = run_cli("elasticity-bound --out " + dir.string());
    out.require(code == 0, "elasticity-bound exit " + std::to_string(code));
    std::ifstream in(dir / "elasticity_bound.csv");
    std::string line;
    std::getline(in, line);
    std::vector<double> rho, bound;
    while (std::getline(in, line))
    {
        std::stringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        rho.push_back(std::stod(a));
        bound.push_back(std::stod(b));
    }
    out.require(rho.size() == 99 && std::abs(rho.front() - 0.01) < 1e-12 && std::abs(rho.back() - 0.99) < 1e-12,
                "99 rows on [0.01, 0.99]");
    bool ge1 = true, increasing = true, convex = true;
    double worst_second = 1e300;
    for (std::size_t i = 0; i < bound.size(); ++i)
    {
        ge1 = ge1 && bound[i] >= 1.0;
        // flat at 1 only where the excess is below the printed precision
        if (i + 1 < bound.size())
            increasing = increasing && (bound[i + 1] > bound[i] || (bound[i + 1] == bound[i] && bound[i] - 1.0 < 1e-11));
        if (i + 2 < bound.size())
        {
            const double second = bound[i + 2] - 2 * bound[i + 1] + bound[i];
            worst_second = std::min(worst_second, second);
            convex = convex && second >= tol::figure_convexity;
        }
    }
    out.require(ge1, ">= 1");
    out.require(increasing, "increasing");
    out.require(convex, "min second difference " + num(worst_second));

    const double a = oracle::alpha_bisect(0.5);
    const double w = oracle::wait_normalized(0.5);
    const double expected = 1.0 + 0.5 * std::exp(-a) * a * a * a * w * w;
    const auto at = std::find_if(rho.begin(), rho.end(), [](double r) { return std::abs(r - 0.5) < 1e-12; });
    const double got = at == rho.end() ? std::nan("") : bound[static_cast<std::size_t>(at - rho.begin())];
    out.require(std::abs(got - expected) <= tol::figure_oracle,
                "value at 0.5 " + num(got) + " vs oracle " + num(expected));
    fs::remove_all(dir);
    return out;
}

// 9. Monte Carlo check of the wait formula
Outcome monte_carlo()
{
    Outcome out;
    Stopwatch clock;
    auto validate = [&](int S) {
        Scenario s = baseline_scenario();
        s.mc.S = S;
        s.mc.rho = 0.8;
        s.mc.blocks = 1e6;
        s.mc.seeds = 10;
        s.seed = 20240601;
        return cli::run_mc_validation(s, jobs());
    };
    const auto big = validate(64);
    const auto small = validate(8);
    const double elapsed = clock.seconds();
    out.require(big.table.rows.size() == 10 && big.table.sufficient, "10 deciles with enough samples");
    out.require(big.table.max_rel_error <= tol::mc_rel_error,
                "S=64 max decile error " + num(big.table.max_rel_error) + " <= " + num(tol::mc_rel_error));
    out.require(big.table.monotone, "S=64 decile means non-increasing");
    out.require(big.table.max_rel_error <= small.table.max_rel_error,
                "S=64 error not above S=8 error " + num(small.table.max_rel_error));
    out.require(elapsed < tol::mc_runtime_s, "runtime " + num(elapsed) + " s < " + num(tol::mc_runtime_s) + " s");
    return out;
}

// 10. byte-identical reruns of every subcommand
Outcome determinism()
{
    Outcome out;
    const fs::path dir = fs::temp_directory_path() / "feelab_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto floating = dir / "floating.cfg";
    const auto pegged = dir / "pegged.cfg";
    const auto mc = dir / "mc.cfg";
    std::ofstream(floating) << "rule.kind = floating\nrule.gamma = 0.05\nshock.dlog_lambda = 0.03\n"
                               "sweep.axis = gamma\nsweep.grid = 0.02, 0.06, 0.1, 0.3\n";
    std::ofstream(pegged) << "rule.kind = pegged\nrule.gamma = 0.1\nrule.rho_target = 0.8\n"
                             "sweep.axis = lambda\nsweep.start = 1600\nsweep.stop = 16000\nsweep.count = 6\n"
                             "sweep.spacing = log\n";
    std::ofstream(mc) << "mc.S = 32\nmc.rho = 0.8\nmc.blocks = 20000\nmc.seeds = 3\nmc.threshold = 0.5\n";
    const std::vector<std::string> commands{
        "steady-state --scenario " + floating.string(),
        "shock --scenario " + pegged.string(),
        "sweep --jobs 4 --scenario " + floating.string(),
        "sweep --format json --scenario " + pegged.string(),
        "elasticity-bound --jobs 2",
        "mc-validate --jobs 3 --seed 99 --scenario " + mc.string(),
    };
    int identical = 0;
    for (std::size_t i = 0; i < commands.size(); ++i)
    {
        std::map<std::string, std::string> runs[2];
        for (int k = 0; k < 2; ++k)
        {
            const auto out_dir = dir / ("run" + std::to_string(i) + "_" + std::to_string(k));
            run_cli(commands[i] + " --out " + out_dir.string());
            for (const auto& e : fs::directory_iterator(out_dir))
                runs[k][e.path().filename().string()] = slurp(e.path());
        }
        const bool same = runs[0].size() >= 2 && runs[0] == runs[1];
        identical += same;
        if (!same)
            out.require(false, "'" + commands[i] + "' differs between runs");
    }
    out.require(identical == static_cast<int>(commands.size()),
                std::to_string(identical) + "/" + std::to_string(commands.size()) + " commands byte-identical");
    fs::remove_all(dir);
    return out;
}
}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::function<Outcome()>> criteria{
        root_residual, wait_shape,     elasticity_suite, difficulty_identity, floating_rule,
        pegged_balanced_growth, block_reward_distortion, bound_curve, monte_carlo, determinism};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i)
    {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc)
            selected.push_back(std::atoi(argv[++i]));
        else
        {
            std::cerr << "usage: acceptance [--criterion N]\n";
            return 2;
        }
    }
    if (selected.empty())
        for (int i = 1; i <= static_cast<int>(criteria.size()); ++i)
            selected.push_back(i);

    bool all = true;
    for (int n : selected)
    {
        if (n < 1 || n > static_cast<int>(criteria.size()))
        {
            std::cerr << "unknown criterion " << n << '\n';
            return 2;
        }
        Outcome o;
        try
        {
            o = criteria[static_cast<std::size_t>(n - 1)]();
        }
        catch (const std::exception& e)
        {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << "criterion " << n << ' ' << (o.pass ? "PASS" : "FAIL") << ": " << o.detail << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
