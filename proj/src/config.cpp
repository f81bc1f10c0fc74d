#include "marangoni/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

namespace marangoni {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Shortest text that reads back to the same double.
std::string num(double x)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double to_double(const std::string& v)
{
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x))
        throw std::invalid_argument("not a finite number");
    return x;
}

long to_long(const std::string& v)
{
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size())
        throw std::invalid_argument("not an integer");
    return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Presets

Preset Preset::parse(const std::string& text)
{
    const std::string t = trim(text);
    if (t.rfind("file:", 0) == 0) {
        if (t.size() == 5)
            throw std::invalid_argument("file: needs a path");
        return {"file", {}, t.substr(5)};
    }
    const auto open = t.find('(');
    if (open == std::string::npos) {
        if (t.empty())
            throw std::invalid_argument("empty preset");
        return {t, {}, {}};
    }
    if (t.back() != ')')
        throw std::invalid_argument("preset '" + t + "' is missing ')'");
    Preset p{trim(t.substr(0, open)), {}, {}};
    std::stringstream ss(t.substr(open + 1, t.size() - open - 2));
    std::string item;
    while (std::getline(ss, item, ','))
        p.args.push_back(to_double(trim(item)));
    return p;
}

std::string Preset::to_string() const
{
    if (name == "file")
        return "file:" + path;
    if (args.empty())
        return name;
    std::string s = name + "(";
    for (std::size_t k = 0; k < args.size(); ++k)
        s += (k ? "," : "") + num(args[k]);
    return s + ")";
}

namespace {

void expect_args(const Preset& p, std::size_t lo, std::size_t hi, const char* what)
{
    if (p.args.size() < lo || p.args.size() > hi)
        throw std::invalid_argument(std::string(what) + " preset '" + p.name + "' takes " + std::to_string(lo) +
                                    (hi != lo ? "-" + std::to_string(hi) : std::string()) + " argument(s)");
}

void check_preset(const std::string& key, const Preset& p)
{
    if (key == "ic_phi") {
        if (p.name == "stripe" || p.name == "bubble")
            expect_args(p, 0, 0, "ic_phi");
        else if (p.name == "random") {
            expect_args(p, 1, 2, "ic_phi");
            if (!(p.args[0] >= 0.0 && p.args[0] <= 1.0))
                throw std::invalid_argument("random amplitude must lie in [0, 1] so that |phi0| <= 1");
        } else if (p.name == "constant") {
            expect_args(p, 1, 1, "ic_phi");
            if (!(std::abs(p.args[0]) <= 1.0))
                throw std::invalid_argument("constant ic_phi must satisfy |c| <= 1");
        } else if (p.name != "file")
            throw std::invalid_argument("unknown ic_phi preset '" + p.name +
                                        "' (stripe, bubble, random, constant, file:)");
    } else if (key == "phi_b") {
        if (p.name == "tanh_x" || p.name == "tanh_y")
            expect_args(p, 0, 0, "phi_b");
        else if (p.name == "constant")
            expect_args(p, 1, 1, "phi_b");
        else
            throw std::invalid_argument("unknown phi_b preset '" + p.name + "' (tanh_x, tanh_y, constant(c))");
    } else if (key == "ic_theta") {
        if (p.name == "zero")
            expect_args(p, 0, 0, "ic_theta");
        else if (p.name == "gaussian" || p.name == "gaussian_theta2") {
            expect_args(p, 2, 2, "ic_theta");
            if (!(p.args[1] > 0.0))
                throw std::invalid_argument("gaussian sigma must be positive");
        } else if (p.name != "file")
            throw std::invalid_argument("unknown ic_theta preset '" + p.name +
                                        "' (zero, gaussian(amp,sigma), gaussian_theta2(frac,sigma), file:)");
    } else if (key == "ic_u") {
        if (p.name == "zero")
            expect_args(p, 0, 0, "ic_u");
        else if (p.name == "vortex")
            expect_args(p, 1, 1, "ic_u");
        else if (p.name != "file")
            throw std::invalid_argument("unknown ic_u preset '" + p.name + "' (zero, vortex(amp), file:<prefix>)");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsing

long RunConfig::total_steps() const
{
    return static_cast<long>(std::ceil(t_end / step.dt - 1e-9));
}

RunConfig parse_config(const std::string& text)
{
    RunConfig c;
    std::map<std::string, int> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineno);
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (seen.count(key))
            throw ConfigError(where + ": key '" + key + "' repeats line " + std::to_string(seen[key]));
        seen[key] = lineno;
        if (val.empty())
            throw ConfigError(where + ": key '" + key + "' has no value");

        auto D = [&](double& dst) { dst = to_double(val); };
        auto I = [&](int& dst) { dst = static_cast<int>(to_long(val)); };
        auto L = [&](long& dst) { dst = to_long(val); };
        auto P = [&](Preset& dst) {
            dst = Preset::parse(val);
            check_preset(key, dst);
        };
        auto C = [&](CoefficientFn& dst) { dst = CoefficientFn::parse(val); };
        auto O = [&](std::optional<double>& dst) { dst = to_double(val); };

        const std::map<std::string, std::function<void()>> setters = {
            {"nx", [&] { I(c.nx); }},
            {"ny", [&] { I(c.ny); }},
            {"lx", [&] { D(c.lx); }},
            {"ly", [&] { D(c.ly); }},
            {"lambda0", [&] { D(c.params.lambda0); }},
            {"a", [&] { D(c.params.a); }},
            {"b", [&] { D(c.params.b); }},
            {"gamma", [&] { D(c.params.gamma); }},
            {"eps", [&] { D(c.params.eps); }},
            {"ra", [&] { D(c.params.ra); }},
            {"ga", [&] { D(c.params.ga); }},
            {"g", [&] { D(c.params.g); }},
            {"mu", [&] { C(c.params.mu); }},
            {"kappa", [&] { C(c.params.kappa); }},
            {"mode",
             [&] {
                 if (val == "thermal")
                     c.params.isothermal = false;
                 else if (val == "isothermal")
                     c.params.isothermal = true;
                 else
                     throw std::invalid_argument("mode must be thermal or isothermal");
             }},
            {"dt", [&] { D(c.step.dt); }},
            {"cfl_safety", [&] { D(c.step.cfl_safety); }},
            {"proj_tol", [&] { D(c.step.proj_tol); }},
            {"helmholtz_tol", [&] { D(c.step.helmholtz_tol); }},
            {"tol_mp", [&] { D(c.step.tol_mp); }},
            {"advection",
             [&] {
                 if (val == "upwind")
                     c.step.advection = AdvectionScheme::upwind;
                 else if (val == "centered")
                     c.step.advection = AdvectionScheme::centered;
                 else
                     throw std::invalid_argument("advection must be upwind or centered");
             }},
            {"t_end", [&] { D(c.t_end); }},
            {"snapshot_every", [&] { L(c.snapshot_every); }},
            {"diagnostics_every", [&] { L(c.diagnostics_every); }},
            {"output_dir", [&] { c.output_dir = val; }},
            {"ic_phi", [&] { P(c.ic_phi); }},
            {"phi_b", [&] { P(c.phi_b); }},
            {"ic_theta", [&] { P(c.ic_theta); }},
            {"ic_u", [&] { P(c.ic_u); }},
            {"omega", [&] { D(c.omega); }},
            {"eta", [&] { D(c.eta); }},
            {"seed",
             [&] {
                 const long s = to_long(val);
                 if (s < 0)
                     throw std::invalid_argument("seed must be non-negative");
                 c.seed = static_cast<std::uint64_t>(s);
             }},
            {"c1", [&] { O(c.c1); }},
            {"c2", [&] { O(c.c2); }},
            {"c3", [&] { O(c.c3); }},
            {"cP", [&] { O(c.cP); }},
            {"constant_samples", [&] { I(c.constant_samples); }},
            {"decay_window", [&] { I(c.decay_window); }},
            {"restart_dir", [&] { c.restart_dir = val; }},
            {"restart_step", [&] { L(c.restart_step); }},
        };
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError(where + ": unknown key '" + key + "'");
        try {
            it->second();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(where + ": key '" + key + "': " + e.what());
        }
    }

    auto fail = [&](const std::string& key, const std::string& msg) {
        const auto it = seen.find(key);
        const std::string where = it != seen.end() ? "line " + std::to_string(it->second) + ": " : "";
        throw ConfigError(where + "key '" + key + "': " + msg);
    };
    try {
        (void)c.grid();
    } catch (const std::exception& e) {
        fail(seen.count("nx") ? "nx" : "ny", e.what());
    }
    if (!(c.lx > 0.0))
        fail("lx", "must be positive");
    if (!(c.ly > 0.0))
        fail("ly", "must be positive");
    try {
        c.params.validate();
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        std::string key = "b";
        for (const char* k : {"lambda0", "gamma", "eps", "a"})
            if (msg.rfind(k, 0) == 0) {
                key = k;
                break;
            }
        if (msg.rfind("ra", 0) == 0)
            key = "ra";
        fail(key, msg);
    }
    if (!(c.t_end > 0.0))
        fail("t_end", "must be positive");
    if (!(c.step.dt > 0.0))
        fail("dt", "must be positive");
    if (!(c.step.cfl_safety > 0.0) || c.step.cfl_safety > 1.0)
        fail("cfl_safety", "must lie in (0, 1]");
    if (!(c.step.proj_tol > 0.0))
        fail("proj_tol", "must be positive");
    if (!(c.step.helmholtz_tol > 0.0))
        fail("helmholtz_tol", "must be positive");
    if (!(c.step.tol_mp > 0.0))
        fail("tol_mp", "must be positive");
    if (c.snapshot_every < 1)
        fail("snapshot_every", "must be at least 1");
    if (c.diagnostics_every < 1)
        fail("diagnostics_every", "must be at least 1");
    if (!(c.omega > 0.0))
        fail("omega", "must be positive");
    if (!(c.eta > 0.0))
        fail("eta", "must be positive");
    if (c.constant_samples < 100)
        fail("constant_samples", "must be at least 100");
    if (c.decay_window < 0)
        fail("decay_window", "must be non-negative");
    for (auto [key, v] : {std::pair{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"cP", c.cP}})
        if (v && !(*v > 0.0))
            fail(key, "must be positive");
    if (!c.restart_dir.empty() && c.restart_step < 0)
        fail("restart_dir", "needs restart_step >= 0");
    if (c.restart_dir.empty() && c.restart_step >= 0)
        fail("restart_step", "needs restart_dir");
    if (c.params.isothermal && c.ic_theta.name != "zero")
        fail("ic_theta", "isothermal mode requires ic_theta = zero");
    try {
        validate_phase_boundary(make_phase_boundary(c));
    } catch (const std::exception& e) {
        fail("phi_b", e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const RunConfig& c)
{
    std::ostringstream os;
    auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
    kv("nx", std::to_string(c.nx));
    kv("ny", std::to_string(c.ny));
    kv("lx", num(c.lx));
    kv("ly", num(c.ly));
    kv("mode", c.params.isothermal ? "isothermal" : "thermal");
    kv("lambda0", num(c.params.lambda0));
    kv("a", num(c.params.a));
    kv("b", num(c.params.b));
    kv("gamma", num(c.params.gamma));
    kv("eps", num(c.params.eps));
    kv("ra", num(c.params.ra));
    kv("ga", num(c.params.ga));
    kv("g", num(c.params.g));
    kv("mu", c.params.mu.to_string());
    kv("kappa", c.params.kappa.to_string());
    kv("dt", num(c.step.dt));
    kv("cfl_safety", num(c.step.cfl_safety));
    kv("proj_tol", num(c.step.proj_tol));
    kv("helmholtz_tol", num(c.step.helmholtz_tol));
    kv("tol_mp", num(c.step.tol_mp));
    kv("advection", c.step.advection == AdvectionScheme::upwind ? "upwind" : "centered");
    kv("t_end", num(c.t_end));
    kv("snapshot_every", std::to_string(c.snapshot_every));
    kv("diagnostics_every", std::to_string(c.diagnostics_every));
    kv("output_dir", c.output_dir);
    kv("ic_phi", c.ic_phi.to_string());
    kv("phi_b", c.phi_b.to_string());
    kv("ic_theta", c.ic_theta.to_string());
    kv("ic_u", c.ic_u.to_string());
    kv("omega", num(c.omega));
    kv("eta", num(c.eta));
    kv("seed", std::to_string(c.seed));
    for (auto [key, v] : {std::pair{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"cP", c.cP}})
        if (v)
            kv(key, num(*v));
    kv("constant_samples", std::to_string(c.constant_samples));
    kv("decay_window", std::to_string(c.decay_window));
    if (!c.restart_dir.empty()) {
        kv("restart_dir", c.restart_dir);
        kv("restart_step", std::to_string(c.restart_step));
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Initial data

BoundaryData make_phase_boundary(const RunConfig& c)
{
    const Grid g = c.grid();
    const double w = std::sqrt(2.0) * c.params.eps;
    if (c.phi_b.name == "tanh_x")
        return BoundaryData::from_function(g, [&](double x, double) { return std::tanh((x - 0.5 * c.lx) / w); });
    if (c.phi_b.name == "tanh_y")
        return BoundaryData::from_function(g, [&](double, double y) { return std::tanh((y - 0.5 * c.ly) / w); });
    return BoundaryData::constant(g, c.phi_b.args.at(0));
}

SobolevConstants resolve_constants(const RunConfig& c)
{
    SobolevConstants k;
    if (!(c.c1 && c.c2 && c.c3 && c.cP))
        k = estimate_constants(c.grid(), c.constant_samples, c.seed);
    if (c.c1) k.c1 = *c.c1;
    if (c.c2) k.c2 = *c.c2;
    if (c.c3) k.c3 = *c.c3;
    if (c.cP) k.cP = *c.cP;
    k.estimated = !(c.c1 && c.c2 && c.c3 && c.cP);
    return k;
}

namespace {

std::vector<double> read_cell_file(const std::string& path, const Grid& g, const char* what)
{
    const Snapshot s = read_snapshot_file(path);
    if (s.nx != g.nx() || s.ny != g.ny() || s.cols != g.nx() || s.rows != g.ny())
        throw ConfigError(std::string(what) + ": '" + path + "' does not match the " + std::to_string(g.nx()) + "x" +
                          std::to_string(g.ny()) + " grid");
    return s.values;
}

}  // namespace

SimState make_initial_state(const RunConfig& c, double theta2)
{
    const Grid g = c.grid();
    const double w = std::sqrt(2.0) * c.params.eps;
    const double cx = 0.5 * c.lx, cy = 0.5 * c.ly;

    std::vector<double> phi(g.cells());
    if (c.ic_phi.name == "file") {
        phi = read_cell_file(c.ic_phi.path, g, "ic_phi");
    } else if (c.ic_phi.name == "random") {
        const double amp = c.ic_phi.args[0];
        const auto s = c.ic_phi.args.size() > 1 ? static_cast<std::uint64_t>(c.ic_phi.args[1]) : c.seed;
        std::mt19937_64 rng(s);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (double& v : phi)
            v = amp * unit(rng);
    } else if (c.ic_phi.name == "constant") {
        std::fill(phi.begin(), phi.end(), c.ic_phi.args[0]);
    } else {
        const double radius = 0.25 * std::min(c.lx, c.ly);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const double x = g.x(i), y = g.y(j);
                phi[g.index(i, j)] = c.ic_phi.name == "stripe"
                                         ? std::tanh((x - cx) / w)
                                         : std::tanh((std::hypot(x - cx, y - cy) - radius) / w);
            }
    }
    for (double v : phi)
        if (!(std::abs(v) <= 1.0))
            throw ConfigError("ic_phi: initial phase must satisfy |phi0| <= 1");

    std::vector<double> theta(g.cells(), 0.0);
    if (c.ic_theta.name == "file") {
        theta = read_cell_file(c.ic_theta.path, g, "ic_theta");
    } else if (c.ic_theta.name == "gaussian" || c.ic_theta.name == "gaussian_theta2") {
        const double amp = c.ic_theta.name == "gaussian" ? c.ic_theta.args[0] : c.ic_theta.args[0] * theta2;
        const double sigma = c.ic_theta.args[1];
        double peak = 0.0;
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const double r2 = std::pow(g.x(i) - cx, 2) + std::pow(g.y(j) - cy, 2);
                theta[g.index(i, j)] = std::exp(-r2 / (2.0 * sigma * sigma));
                peak = std::max(peak, theta[g.index(i, j)]);
            }
        for (double& v : theta)
            v *= amp / peak;
    }

    SimState s = SimState::initial(g, make_phase_boundary(c), std::move(phi), std::move(theta));
    if (c.ic_u.name == "vortex") {
        // Discrete curl of a stream function at corners: divergence-free and zero on the walls.
        const double amp = c.ic_u.args[0];
        auto psi = [&](int i, int j) {
            const double x = i * g.dx() / c.lx, y = j * g.dy() / c.ly;
            return amp * std::pow(std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y), 2);
        };
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i)
                s.u.U(i, j) = (psi(i, j + 1) - psi(i, j)) / g.dy();
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
                s.u.V(i, j) = -(psi(i + 1, j) - psi(i, j)) / g.dx();
    } else if (c.ic_u.name == "file") {
        const Snapshot su = read_snapshot_file(c.ic_u.path + "_u.csv");
        const Snapshot sv = read_snapshot_file(c.ic_u.path + "_v.csv");
        if (su.cols != g.nx() + 1 || su.rows != g.ny() || sv.cols != g.nx() || sv.rows != g.ny() + 1)
            throw ConfigError("ic_u: staggered snapshots do not match the grid");
        s.u.u = su.values;
        s.u.v = sv.values;
        s.u.apply_no_slip();
    }
    return s;
}

}  // namespace marangoni
