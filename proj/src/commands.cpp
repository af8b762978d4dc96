// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/commands.hpp>

#include <feelab/csv.hpp>
#include <feelab/demand.hpp>
#include <feelab/errors.hpp>
#include <feelab/parallel.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <variant>

namespace feelab::cli
{
namespace
{
using Json = nlohmann::ordered_json;
using Cell = std::variant<double, std::int64_t, std::string, bool>;

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

// Doubles are rounded through their 12-digit text so that JSON and CSV agree.
Json to_json(const Cell& cell)
{
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
            {
                if (!std::isfinite(v))
                    return nullptr;
                return std::stod(format_real(v));
            }
            else
                return v;
        },
        cell);
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

// Writes `stem`.csv or `stem`.json and returns the file name.
std::string write_table(const Options& options, const std::string& stem, const Table& table)
{
    const std::string name = stem + (options.format == "json" ? ".json" : ".csv");
    auto out = open_output(options.out / name);
    if (options.format == "json")
    {
        Json records = Json::array();
        for (const auto& row : table.rows)
        {
            Json rec = Json::object();
            for (std::size_t i = 0; i < table.header.size(); ++i)
                rec[table.header[i]] = to_json(row[i]);
            records.push_back(std::move(rec));
        }
        out << records.dump(2) << '\n';
        return name;
    }
    CsvWriter csv(out, table.header);
    for (const auto& row : table.rows)
    {
        std::vector<std::string> fields;
        for (const auto& cell : row)
            fields.push_back(std::visit(
                [](const auto& v) -> std::string {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        return format_real(v);
                    else if constexpr (std::is_same_v<T, bool>)
                        return v ? "true" : "false";
                    else if constexpr (std::is_same_v<T, std::string>)
                        return v;
                    else
                        return std::to_string(v);
                },
                cell));
        csv.row_fields(fields);
    }
    return name;
}

Table trajectory_table(const Trajectory& traj)
{
    Table t{{"t", "S", "lambda", "rho", "psi", "Rev", "N", "d", "welfare"}, {}};
    for (const auto& s : traj.states)
        t.rows.push_back({std::int64_t{s.t}, s.S, s.lambda, s.rho, s.psi, s.Rev, s.N, s.d, s.welfare});
    return t;
}

std::string status_of(bool converged, const std::optional<Divergence>& reason)
{
    if (converged)
        return "converged";
    return reason ? std::string(to_string(*reason)) : "error";
}

std::int64_t periods(const Trajectory& traj)
{
    return traj.states.empty() ? 0 : static_cast<std::int64_t>(traj.states.size()) - 1;
}

void write_manifest(const Scenario& scenario, const Options& options, const std::string& command,
                    const std::vector<std::string>& outputs, int exit_code, Json result)
{
    Json m = Json::object();
    m["tool"] = "feelab";
    m["version"] = version;
    m["command"] = command;
    m["scenario_file"] = options.scenario.empty() ? std::string{"<baseline>"} : options.scenario.generic_string();
    m["format"] = options.format;
    m["jobs"] = options.jobs;
    m["seed"] = scenario.seed;
    m["rng"] = std::string(mc::rng_name);
    Json inputs = Json::object();
    for (const auto& [k, v] : scenario_entries(scenario))
        inputs[k] = v;
    m["inputs"] = std::move(inputs);
    m["outputs"] = outputs;
    m["exit_code"] = exit_code;
    m["result"] = std::move(result);
    auto out = open_output(options.out / "manifest.json");
    out << m.dump(2) << '\n';
}

Scenario with_seed(Scenario s, const Options& options)
{
    if (options.seed)
        s.seed = *options.seed;
    return s;
}

void prepare_out(const Options& options)
{
    std::error_code ec;
    std::filesystem::create_directories(options.out, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + options.out.string() + "'");
}

std::vector<double> shock_metrics(const ShockResult& r, std::int64_t periods_before)
{
    std::vector<double> m{static_cast<double>(periods_before), static_cast<double>(periods(r.after)),
                          r.rho_before};
    if (!r.converged)
    {
        m.insert(m.end(), 9, nan);
        return m;
    }
    const auto& s = *r.after.steady_state;
    m.insert(m.end(), {r.rho_after, r.measured, r.series, s.S, s.psi, s.Rev, s.N, s.d, s.welfare});
    return m;
}

SweepPoint independent_point(const Scenario& base, int index, double value)
{
    SweepPoint p;
    p.index = index;
    p.axis_value = value;
    try
    {
        Scenario s = base;
        const std::string& axis = base.sweep.axis;
        if (axis == "gamma")
            s.rule.gamma = value;
        else if (axis == "rho")
        {
            if (!(value > 0.0 && value < 1.0))
                throw DomainError("congestion must lie in (0, 1)");
            s.lambda0 = value * s.params.mu * s.S0;
        }
        else if (axis == "sigma")
        {
            const auto& q = s.params;
            s.params = MarketParams::make(value, q.U, q.c_m, q.f_e, q.mu, q.P, q.br, q.nu);
            if (s.rule.kind == RuleKind::pegged && s.rho_target)
                s.rule.d_star = pegged_difficulty_for(*s.rho_target, s.S0, s.params, s.dist);
        }
        const auto r = shock_elasticity(s.S0, s.lambda0, s.dlog_lambda, s.rule, s.params, s.dist, s.sim);
        p.status = status_of(r.converged, r.divergence_reason);
        p.metrics = shock_metrics(r, periods(r.before));
    }
    catch (const Error& e)
    {
        p.status = "error";
        p.message = e.what();
    }
    if (p.metrics.empty())
        p.metrics.assign(sweep_metric_names().size(), nan);
    return p;
}

std::vector<SweepPoint> lambda_chain(const Scenario& s)
{
    std::vector<SweepPoint> points;
    SimulationOptions pre = s.sim;
    pre.prev_d.reset();
    const Trajectory base = simulate(s.S0, s.lambda0, s.rule, s.params, s.dist, pre);
    std::optional<MarketState> current = base.steady_state;
    std::int64_t periods_before = periods(base);
    std::string upstream = current ? "" : "baseline " + status_of(false, base.divergence_reason);

    for (std::size_t i = 0; i < s.sweep.grid.size(); ++i)
    {
        SweepPoint p;
        p.index = static_cast<int>(i);
        p.axis_value = s.sweep.grid[i];
        p.metrics.assign(sweep_metric_names().size(), nan);
        if (!current)
        {
            p.status = "skipped";
            p.message = upstream;
            points.push_back(std::move(p));
            continue;
        }
        try
        {
            if (!(p.axis_value > 0.0))
                throw DomainError("demand must be positive");
            const double dlog = std::log(p.axis_value / current->lambda);
            if (dlog == 0.0)
            {
                const auto& c = *current;
                p.status = "converged";
                p.metrics = {static_cast<double>(periods_before), 0.0, c.rho, c.rho, nan, nan,
                             c.S, c.psi, c.Rev, c.N, c.d, c.welfare};
                periods_before = 0;
            }
            else
            {
                const auto r = shock_from(*current, dlog, s.rule, s.params, s.dist, s.sim);
                p.status = status_of(r.converged, r.divergence_reason);
                p.metrics = shock_metrics(r, periods_before);
                periods_before = periods(r.after);
                if (r.converged)
                    current = r.after.steady_state;
                else
                {
                    current.reset();
                    upstream = "point " + std::to_string(i) + " " + p.status;
                }
            }
        }
        catch (const Error& e)
        {
            p.status = "error";
            p.message = e.what();
            current.reset();
            upstream = "point " + std::to_string(i) + " error";
        }
        points.push_back(std::move(p));
    }
    return points;
}
}  // namespace

const std::vector<std::string>& sweep_metric_names()
{
    static const std::vector<std::string> names{"periods_before", "periods_after", "rho_before", "rho_after",
                                                "measured", "series", "S", "psi", "Rev", "N", "d", "welfare"};
    return names;
}

std::vector<SweepPoint> run_sweep(const Scenario& scenario, int jobs)
{
    if (scenario.sweep.axis.empty() || scenario.sweep.grid.empty())
        throw ConfigError("sweep needs sweep.axis and a grid");
    if (scenario.sweep.axis == "lambda")
        return lambda_chain(scenario);
    std::vector<SweepPoint> points(scenario.sweep.grid.size());
    parallel_for(points.size(), jobs, [&](std::size_t i) {
        points[i] = independent_point(scenario, static_cast<int>(i), scenario.sweep.grid[i]);
    });
    return points;
}

McValidation run_mc_validation(const Scenario& scenario, int jobs)
{
    const auto& m = scenario.mc;
    McValidation v;
    if (m.lambda)
    {
        v.config = mc::SimConfig::at_congestion(0.0, scenario.params.mu, m.S, scenario.dist, m.blocks,
                                                scenario.seed, m.warmup_fraction);
        v.config.lambda = *m.lambda;
    }
    else
    {
        v.config = mc::SimConfig::at_congestion(m.rho.value_or(scenario.rho0()), scenario.params.mu, m.S,
                                                scenario.dist, m.blocks, scenario.seed, m.warmup_fraction);
    }
    v.config.validate();
    v.pooled = mc::merge(mc::run_replications(v.config, m.seeds, jobs));
    v.table = mc::compare_to_theory(v.pooled, v.config, m.min_samples);
    v.passed = v.table.max_rel_error < m.threshold;
    return v;
}

int cmd_steady_state(const Scenario& input, const Options& options, std::ostream& log)
{
    const Scenario s = with_seed(input, options);
    prepare_out(options);
    const Trajectory traj = simulate(s.S0, s.lambda0, s.rule, s.params, s.dist, s.sim);
    const MarketState& last = traj.states.back();
    const std::string status = status_of(traj.converged, traj.divergence_reason);
    Table report{{"rule", "gamma", "status", "periods", "S0", "lambda", "S", "rho", "psi", "Rev", "N", "d",
                  "welfare"},
                 {}};
    report.rows.push_back({std::string(to_string(s.rule.kind)), s.rule.gamma, status, periods(traj), s.S0,
                           last.lambda, last.S, last.rho, last.psi, last.Rev, last.N, last.d, last.welfare});
    std::vector<std::string> outputs{write_table(options, "steady_state", report),
                                     write_table(options, "trajectory", trajectory_table(traj))};
    const int code = traj.converged ? exit_ok : exit_divergence;
    write_manifest(s, options, "steady-state", outputs, code,
                   {{"status", status}, {"periods", periods(traj)}, {"rho", to_json(last.rho)},
                    {"S", to_json(last.S)}});
    log << "steady-state: " << status << " after " << periods(traj) << " periods, S = " << format_real(last.S)
        << ", rho = " << format_real(last.rho) << '\n';
    return code;
}

int cmd_shock(const Scenario& input, const Options& options, std::ostream& log)
{
    const Scenario s = with_seed(input, options);
    prepare_out(options);
    const ShockResult r = shock_elasticity(s.S0, s.lambda0, s.dlog_lambda, s.rule, s.params, s.dist, s.sim);
    const std::string status = status_of(r.converged, r.divergence_reason);
    Table report{{"rule", "gamma", "dlog_lambda", "status", "periods_before", "periods_after", "rho_before",
                  "rho_after", "measured", "series", "series_exact"},
                 {}};
    report.rows.push_back({std::string(to_string(s.rule.kind)), s.rule.gamma, s.dlog_lambda, status,
                           periods(r.before), periods(r.after), r.converged ? r.rho_before : nan,
                           r.converged ? r.rho_after : nan, r.converged ? r.measured : nan,
                           r.converged ? r.series : nan, r.series_exact});
    const Trajectory& traj = r.after.states.empty() ? r.before : r.after;
    std::vector<std::string> outputs{write_table(options, "shock", report),
                                     write_table(options, "trajectory", trajectory_table(traj))};
    const int code = r.converged ? exit_ok : exit_divergence;
    write_manifest(s, options, "shock", outputs, code,
                   {{"status", status},
                    {"measured", to_json(r.converged ? r.measured : nan)},
                    {"series", to_json(r.converged ? r.series : nan)}});
    if (r.converged)
        log << "shock: measured " << format_real(r.measured) << ", series " << format_real(r.series) << '\n';
    else
        log << "shock: " << status << '\n';
    return code;
}

int cmd_sweep(const Scenario& input, const Options& options, std::ostream& log)
{
    const Scenario s = with_seed(input, options);
    prepare_out(options);
    const auto points = run_sweep(s, options.jobs);
    Table table{{"axis", "point", "axis_value", "status", "metric", "metric_value"}, {}};
    int converged = 0;
    for (const auto& p : points)
    {
        converged += p.status == "converged";
        const auto& names = sweep_metric_names();
        for (std::size_t k = 0; k < names.size(); ++k)
            table.rows.push_back(
                {s.sweep.axis, std::int64_t{p.index}, p.axis_value, p.status, names[k], p.metrics[k]});
    }
    Json failures = Json::array();
    for (const auto& p : points)
        if (!p.message.empty())
            failures.push_back({{"point", p.index}, {"status", p.status}, {"message", p.message}});
    std::vector<std::string> outputs{write_table(options, "sweep", table)};
    write_manifest(s, options, "sweep", outputs, exit_ok,
                   {{"points", points.size()}, {"converged", converged}, {"failures", failures}});
    log << "sweep over " << s.sweep.axis << ": " << converged << " of " << points.size() << " points converged\n";
    return exit_ok;
}

int cmd_elasticity_bound(const Scenario& input, const Options& options, std::ostream& log)
{
    const Scenario s = with_seed(input, options);
    prepare_out(options);
    Table table{{"rho", "epsilon_bar", "epsilon"}, {}};
    std::vector<std::vector<Cell>> rows(s.bound_grid.size());
    parallel_for(rows.size(), options.jobs, [&](std::size_t i) {
        const double rho = s.bound_grid[i];
        rows[i] = {rho, epsilon_bar(rho), epsilon({rho, s.params.mu}, s.dist)};
    });
    table.rows = std::move(rows);
    std::vector<std::string> outputs{write_table(options, "elasticity_bound", table)};
    write_manifest(s, options, "elasticity-bound", outputs, exit_ok, {{"points", s.bound_grid.size()}});
    log << "elasticity-bound: " << s.bound_grid.size() << " points\n";
    return exit_ok;
}

int cmd_mc_validate(const Scenario& input, const Options& options, std::ostream& log)
{
    const Scenario s = with_seed(input, options);
    prepare_out(options);
    const McValidation v = run_mc_validation(s, options.jobs);
    Table table{{"decile", "c_mid", "empirical_mean", "theory", "rel_error", "n_samples"}, {}};
    for (const auto& r : v.table.rows)
        table.rows.push_back(
            {std::int64_t{r.decile}, r.c_mid, r.empirical_mean, r.theory, r.rel_error, r.n_samples});
    std::vector<std::string> outputs{write_table(options, "mc_validate", table)};
    const int code = v.passed ? exit_ok : exit_validation;
    write_manifest(s, options, "mc-validate", outputs, code,
                   {{"rho", to_json(v.config.rho())},
                    {"S", v.config.S},
                    {"replications", s.mc.seeds},
                    {"measured", v.pooled.measured},
                    {"max_rel_error", to_json(v.table.max_rel_error)},
                    {"mean_rel_error", to_json(v.table.mean_rel_error)},
                    {"threshold", to_json(s.mc.threshold)},
                    {"sufficient", v.table.sufficient},
                    {"monotone", v.table.monotone},
                    {"passed", v.passed}});
    log << "mc-validate: max relative error " << format_real(v.table.max_rel_error) << " over "
        << v.table.rows.size() << " deciles (" << (v.passed ? "pass" : "fail") << ")\n";
    return code;
}

int run(int argc, char** argv, std::ostream& log, std::ostream& err)
{
    CLI::App app{"Fee-market equilibrium and difficulty-adjustment experiments", "feelab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    Options options;
    std::string scenario_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    auto* scenario_opt = app.add_option("--scenario", scenario_path, "Scenario file (key = value)");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides run.seed)");
    app.add_option("--jobs", options.jobs, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
    app.add_option("--format", options.format, "Table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    using Handler = int (*)(const Scenario&, const Options&, std::ostream&);
    const std::vector<std::tuple<const char*, const char*, Handler>> commands{
        {"steady-state", "Simulate to a steady state", cmd_steady_state},
        {"shock", "Demand shock and elasticity of congestion", cmd_shock},
        {"sweep", "Shock or steady state over a parameter grid", cmd_sweep},
        {"elasticity-bound", "Distribution-free elasticity bound on a congestion grid", cmd_elasticity_bound},
        {"mc-validate", "Monte Carlo check of the wait-time formula", cmd_mc_validate},
    };
    for (const auto& [name, help, handler] : commands)
        app.add_subcommand(name, help)->fallthrough();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::Success& e)
    {
        return app.exit(e, log, err);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e, log, err);
        return exit_config;
    }

    try
    {
        Scenario scenario = baseline_scenario();
        if (scenario_opt->count() > 0)
        {
            options.scenario = scenario_path;
            scenario = load_scenario(options.scenario);
        }
        options.out = out_dir;
        if (seed_opt->count() > 0)
            options.seed = seed;
        for (const auto& [name, help, handler] : commands)
            if (app.got_subcommand(name))
                return handler(scenario, options, log);
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const CongestionOverflow& e)
    {
        err << "divergence: " << e.what() << '\n';
        return exit_divergence;
    }
    catch (const Error& e)
    {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
    return exit_config;
}
}  // namespace feelab::cli
