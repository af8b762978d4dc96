// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/scenario.hpp>

#include <feelab/csv.hpp>
#include <feelab/errors.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace feelab
{
namespace
{
std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class Entries
{
public:
    void add(std::string key, std::string value, int line)
    {
        if (!values_.emplace(key, value).second)
            throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::optional<std::string> text(const std::string& key)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return std::nullopt;
        used_.insert(key);
        return it->second;
    }

    std::optional<double> real(const std::string& key)
    {
        auto v = text(key);
        if (!v)
            return std::nullopt;
        return parse_real(key, *v);
    }

    std::optional<long long> integer(const std::string& key)
    {
        auto v = text(key);
        if (!v)
            return std::nullopt;
        long long out = 0;
        auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc{} || ptr != v->data() + v->size())
            throw ConfigError("key '" + key + "': expected an integer, got '" + *v + "'");
        return out;
    }

    std::optional<std::vector<double>> list(const std::string& key)
    {
        auto v = text(key);
        if (!v)
            return std::nullopt;
        std::vector<double> out;
        std::string_view rest = *v;
        while (true)
        {
            const auto comma = rest.find(',');
            const auto item = trim(rest.substr(0, comma));
            out.push_back(parse_real(key, std::string(item)));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        return out;
    }

    void reject_unused() const
    {
        for (const auto& [key, value] : values_)
            if (!used_.count(key))
                throw ConfigError("unknown key '" + key + "'");
    }

    static double parse_real(const std::string& key, const std::string& v)
    {
        double out = 0.0;
        const char* first = v.data();
        if (!v.empty() && v[0] == '+')
            ++first;
        auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
        if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
            throw ConfigError("key '" + key + "': expected a finite number, got '" + v + "'");
        return out;
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

std::vector<double> make_grid(double start, double stop, long long count, const std::string& spacing,
                              const std::string& what)
{
    if (count < 1)
        throw ConfigError(what + ": count must be at least 1");
    if (spacing != "linear" && spacing != "log")
        throw ConfigError(what + ": spacing must be 'linear' or 'log'");
    if (spacing == "log" && !(start > 0.0 && stop > 0.0))
        throw ConfigError(what + ": log spacing needs positive bounds");
    std::vector<double> grid;
    for (long long i = 0; i < count; ++i)
    {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        grid.push_back(spacing == "log" ? start * std::pow(stop / start, t) : start + (stop - start) * t);
    }
    return grid;
}

std::optional<std::vector<double>> read_grid(Entries& e, const std::string& prefix)
{
    const bool listed = e.has(prefix + ".grid");
    const bool ranged = e.has(prefix + ".start") || e.has(prefix + ".stop") || e.has(prefix + ".count") ||
                        e.has(prefix + ".spacing");
    if (listed && ranged)
        throw ConfigError(prefix + ": give either a grid list or start/stop/count, not both");
    if (listed)
        return e.list(prefix + ".grid");
    if (!ranged)
        return std::nullopt;
    auto start = e.real(prefix + ".start");
    auto stop = e.real(prefix + ".stop");
    auto count = e.integer(prefix + ".count");
    if (!start || !stop || !count)
        throw ConfigError(prefix + ": start, stop and count are all required");
    const std::string spacing = e.text(prefix + ".spacing").value_or("linear");
    return make_grid(*start, *stop, *count, spacing, prefix);
}

int checked_int(long long v, const std::string& key)
{
    if (v < 1 || v > 1'000'000'000)
        throw ConfigError("key '" + key + "' out of range");
    return static_cast<int>(v);
}

void validate(const Scenario& s)
{
    if (!(s.S0 > 0.0))
        throw ConfigError("init.S0 must be positive");
    const double rho0 = s.rho0();
    if (!(rho0 > 0.0 && rho0 < 1.0))
        throw ConfigError("initial congestion must lie in (0, 1)");
    if (s.rule.kind != RuleKind::fixed && !(s.rule.gamma > 0.0))
        throw ConfigError("rule.gamma must be positive for a dynamic rule");
    if (!(s.sim.ss_tol > 0.0))
        throw ConfigError("sim.ss_tol must be positive");
    if (s.dlog_lambda == 0.0)
        throw ConfigError("shock.dlog_lambda must be non-zero");
    if (!s.sweep.axis.empty())
    {
        static const std::set<std::string> axes{"gamma", "lambda", "rho", "sigma"};
        if (!axes.count(s.sweep.axis))
            throw ConfigError("sweep.axis must be gamma, lambda, rho or sigma");
        if (s.sweep.grid.empty())
            throw ConfigError("sweep needs a grid");
    }
    for (double r : s.bound_grid)
        if (!(r > 0.0 && r < 1.0))
            throw ConfigError("bound grid values must lie in (0, 1)");
    if (s.mc.rho && s.mc.lambda)
        throw ConfigError("give mc.rho or mc.lambda, not both");
    if (s.mc.S < 1)
        throw ConfigError("mc.S must be positive");
    if (!(s.mc.blocks >= 1.0))
        throw ConfigError("mc.blocks must be at least 1");
    if (!(s.mc.warmup_fraction >= 0.0 && s.mc.warmup_fraction < 1.0))
        throw ConfigError("mc.warmup_fraction must lie in [0, 1)");
    if (!(s.mc.threshold > 0.0))
        throw ConfigError("mc.threshold must be positive");
}
}  // namespace

WaitCostDistribution DistributionSpec::build(const std::filesystem::path& base_dir) const
{
    try
    {
        if (kind == "uniform")
            return WaitCostDistribution::uniform(c_bar);
        if (kind == "truncated-exponential")
            return WaitCostDistribution::truncated_exponential(rate, c_bar);
        if (kind == "tabulated")
        {
            if (file.empty())
                throw ConfigError("dist.file is required for a tabulated distribution");
            std::filesystem::path p(file);
            if (p.is_relative() && !base_dir.empty())
                p = base_dir / p;
            return WaitCostDistribution::load_tabulated(p);
        }
    }
    catch (const DomainError& e)
    {
        throw ConfigError(std::string("dist: ") + e.what());
    }
    throw ConfigError("dist.kind must be uniform, truncated-exponential or tabulated");
}

Scenario baseline_scenario()
{
    Scenario s;
    s.bound_grid = make_grid(0.01, 0.99, 99, "linear", "bound");
    return s;
}

double resolve_pegged_target(const Scenario& scenario, double rho_target)
{
    if (!(rho_target > 0.0 && rho_target < 1.0))
        throw ConfigError("rule.rho_target must lie in (0, 1)");
    return pegged_difficulty_for(rho_target, scenario.S0, scenario.params, scenario.dist);
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir)
{
    Entries e;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw))
    {
        ++line_no;
        std::string_view line = raw;
        if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF")
            line.remove_prefix(3);
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        e.add(std::string(key), std::string(value), line_no);
    }

    Scenario s = baseline_scenario();

    MarketParams& p = s.params;
    if (e.has("params.f_e") && e.has("params.f_m"))
        throw ConfigError("params.f_e and params.f_m name the same cost; give one");
    p.sigma = e.real("params.sigma").value_or(p.sigma);
    p.U = e.real("params.U").value_or(p.U);
    p.c_m = e.real("params.c_m").value_or(p.c_m);
    p.f_e = e.real("params.f_e").value_or(e.real("params.f_m").value_or(p.f_e));
    p.mu = e.real("params.mu").value_or(p.mu);
    p.P = e.real("params.P").value_or(p.P);
    p.br = e.real("params.br").value_or(p.br);
    p.nu = e.real("params.nu").value_or(p.nu);
    try
    {
        p = MarketParams::make(p.sigma, p.U, p.c_m, p.f_e, p.mu, p.P, p.br, p.nu);
    }
    catch (const DomainError& err)
    {
        throw ConfigError(std::string("params: ") + err.what());
    }

    s.dist_spec.kind = e.text("dist.kind").value_or(s.dist_spec.kind);
    s.dist_spec.c_bar = e.real("dist.c_bar").value_or(s.dist_spec.c_bar);
    s.dist_spec.rate = e.real("dist.rate").value_or(s.dist_spec.rate);
    s.dist_spec.file = e.text("dist.file").value_or("");
    s.dist = s.dist_spec.build(base_dir);

    s.S0 = e.real("init.S0").value_or(s.S0);
    if (e.has("init.rho0") && e.has("init.lambda0"))
        throw ConfigError("give init.rho0 or init.lambda0, not both");
    if (auto l = e.real("init.lambda0"))
        s.lambda0 = *l;
    else
        s.lambda0 = e.real("init.rho0").value_or(0.8) * p.mu * s.S0;

    if (auto h = e.integer("sim.horizon"))
        s.sim.horizon = checked_int(*h, "sim.horizon");
    s.sim.ss_tol = e.real("sim.ss_tol").value_or(s.sim.ss_tol);
    if (auto w = e.integer("sim.growth_window"))
        s.sim.growth_window = checked_int(*w, "sim.growth_window");
    s.dlog_lambda = e.real("shock.dlog_lambda").value_or(s.dlog_lambda);

    if (auto seed = e.integer("run.seed"))
    {
        if (*seed < 0)
            throw ConfigError("run.seed must be non-negative");
        s.seed = static_cast<std::uint64_t>(*seed);
    }

    s.sweep.axis = e.text("sweep.axis").value_or("");
    if (auto g = read_grid(e, "sweep"))
        s.sweep.grid = *g;
    if (auto g = read_grid(e, "bound"))
        s.bound_grid = *g;

    if (auto S = e.integer("mc.S"))
        s.mc.S = checked_int(*S, "mc.S");
    s.mc.rho = e.real("mc.rho");
    s.mc.lambda = e.real("mc.lambda");
    s.mc.blocks = e.real("mc.blocks").value_or(s.mc.blocks);
    s.mc.warmup_fraction = e.real("mc.warmup_fraction").value_or(s.mc.warmup_fraction);
    if (auto n = e.integer("mc.seeds"))
        s.mc.seeds = checked_int(*n, "mc.seeds");
    s.mc.threshold = e.real("mc.threshold").value_or(s.mc.threshold);
    if (auto n = e.integer("mc.min_samples"))
        s.mc.min_samples = checked_int(*n, "mc.min_samples");

    const std::string kind = e.text("rule.kind").value_or("fixed");
    const double gamma = e.real("rule.gamma").value_or(0.0);
    auto d_star = e.real("rule.d_star");
    s.rho_target = e.real("rule.rho_target");
    if (kind == "fixed")
        s.rule = UpdateRule::fixed();
    else if (kind == "floating")
        s.rule = UpdateRule::floating(gamma);
    else if (kind == "pegged")
        s.rule = UpdateRule{RuleKind::pegged, gamma, std::nullopt};
    else
        throw ConfigError("rule.kind must be fixed, floating or pegged");
    if ((d_star || s.rho_target) && kind != "pegged")
        throw ConfigError("rule.d_star and rule.rho_target apply to the pegged rule only");
    if (d_star && s.rho_target)
        throw ConfigError("give rule.d_star or rule.rho_target, not both");

    e.reject_unused();
    validate(s);

    if (kind == "pegged")
    {
        if (!d_star && !s.rho_target)
            throw ConfigError("pegged rule needs rule.d_star or rule.rho_target");
        s.rule.d_star = d_star ? *d_star : resolve_pegged_target(s, *s.rho_target);
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open scenario file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.parent_path());
}

std::vector<std::pair<std::string, std::string>> scenario_entries(const Scenario& s)
{
    auto join = [](const std::vector<double>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out += (i ? "," : "") + format_real(v[i]);
        return out;
    };
    std::vector<std::pair<std::string, std::string>> out{
        {"params.sigma", format_real(s.params.sigma)},
        {"params.U", format_real(s.params.U)},
        {"params.c_m", format_real(s.params.c_m)},
        {"params.f_e", format_real(s.params.f_e)},
        {"params.mu", format_real(s.params.mu)},
        {"params.P", format_real(s.params.P)},
        {"params.br", format_real(s.params.br)},
        {"params.nu", format_real(s.params.nu)},
        {"dist", s.dist.describe()},
        {"rule.kind", std::string(to_string(s.rule.kind))},
        {"rule.gamma", format_real(s.rule.gamma)},
        {"rule.d_star", s.rule.d_star ? format_real(*s.rule.d_star) : ""},
        {"rule.rho_target", s.rho_target ? format_real(*s.rho_target) : ""},
        {"init.S0", format_real(s.S0)},
        {"init.lambda0", format_real(s.lambda0)},
        {"sim.horizon", std::to_string(s.sim.horizon)},
        {"sim.ss_tol", format_real(s.sim.ss_tol)},
        {"sim.growth_window", std::to_string(s.sim.growth_window)},
        {"shock.dlog_lambda", format_real(s.dlog_lambda)},
        {"sweep.axis", s.sweep.axis},
        {"sweep.grid", join(s.sweep.grid)},
        {"bound.grid", join(s.bound_grid)},
        {"mc.S", std::to_string(s.mc.S)},
        {"mc.rho", s.mc.rho ? format_real(*s.mc.rho) : ""},
        {"mc.lambda", s.mc.lambda ? format_real(*s.mc.lambda) : ""},
        {"mc.blocks", format_real(s.mc.blocks)},
        {"mc.warmup_fraction", format_real(s.mc.warmup_fraction)},
        {"mc.seeds", std::to_string(s.mc.seeds)},
        {"mc.threshold", format_real(s.mc.threshold)},
        {"mc.min_samples", std::to_string(s.mc.min_samples)},
        {"run.seed", std::to_string(s.seed)},
    };
    return out;
}
}  // namespace feelab
