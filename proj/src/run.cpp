#include "marangoni/cli.hpp"

#include "marangoni/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace marangoni {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string snap_path(const std::string& dir, long step, const std::string& field)
{
    return (fs::path(dir) / ("snap_" + std::to_string(step) + "_" + field + ".csv")).string();
}

void write_state(const std::string& dir, const SimState& s)
{
    const Grid& g = s.grid();
    try {
        write_snapshot_file(snap_path(dir, s.step, "phi"), "phi", g, s.t, s.phi.values, g.nx(), g.ny());
        write_snapshot_file(snap_path(dir, s.step, "theta"), "theta", g, s.t, s.theta.values, g.nx(), g.ny());
        write_snapshot_file(snap_path(dir, s.step, "p"), "p", g, s.t, s.p.values, g.nx(), g.ny());
        write_snapshot_file(snap_path(dir, s.step, "u"), "u", g, s.t, s.u.u, g.nx() + 1, g.ny());
        write_snapshot_file(snap_path(dir, s.step, "v"), "v", g, s.t, s.u.v, g.nx(), g.ny() + 1);
    } catch (const std::exception& e) {
        throw IoError(e.what());
    }
}

Snapshot load(const std::string& dir, long step, const std::string& field, int cols, int rows)
{
    const std::string path = snap_path(dir, step, field);
    if (!fs::exists(path))
        throw IoError("missing snapshot '" + path + "'");
    const Snapshot s = read_snapshot_file(path);
    if (s.cols != cols || s.rows != rows)
        throw FormatError("snapshot '" + snap_path(dir, step, field) + "' has the wrong shape");
    return s;
}

/// State at `step` from snapshots; theta0 comes from step 0.
SimState read_state(const std::string& dir, long step, const RunConfig& c)
{
    const Grid g = c.grid();
    const Snapshot phi = load(dir, step, "phi", g.nx(), g.ny());
    const Snapshot theta = load(dir, step, "theta", g.nx(), g.ny());
    SimState s = SimState::initial(g, make_phase_boundary(c), phi.values, theta.values);
    s.theta0.values = load(dir, 0, "theta", g.nx(), g.ny()).values;
    s.p.values = load(dir, step, "p", g.nx(), g.ny()).values;
    s.u.u = load(dir, step, "u", g.nx() + 1, g.ny()).values;
    s.u.v = load(dir, step, "v", g.nx(), g.ny() + 1).values;
    s.t = phi.t;
    s.step = step;
    return s;
}

int decay_window_for(const RunConfig& c, std::size_t rows)
{
    if (c.decay_window > 0)
        return c.decay_window;
    return std::max<int>(1, static_cast<int>(rows / 10));
}

struct Summary {
    Thresholds thr;
    double theta0_linf = 0.0;
    double min_phi_margin = 1.0;
    double min_theta_margin = 0.0;
    MaxPrincipleReport final_margins;
    long law_checked = 0;
    long law_passed = 0;
    std::string decay = "n/a";
    long steps = 0;
    double t = 0.0;
    std::string status = "success";
    std::string message;
};

void write_summary(const std::string& dir, const RunConfig& c, const Summary& s)
{
    std::ofstream os(fs::path(dir) / "summary.txt");
    if (!os)
        throw IoError("cannot write summary.txt in '" + dir + "'");
    const Thresholds& t = s.thr;
    os << "status = " << s.status << '\n';
    if (!s.message.empty())
        os << "message = " << s.message << '\n';
    os << "steps = " << s.steps << '\n';
    os << "t_final = " << num(s.t) << '\n';
    os << "theta1 = " << num(t.theta1) << '\n';
    os << "theta2 = " << num(t.theta2) << '\n';
    os << "zeta = " << num(t.zeta) << '\n';
    os << "omega = " << num(t.omega) << '\n';
    os << "eta = " << num(c.eta) << '\n';
    os << "mu_lo = " << num(t.mu_lo) << '\n';
    os << "mu_hi = " << num(t.mu_hi) << '\n';
    os << "kap_lo = " << num(t.kap_lo) << '\n';
    os << "kap_hi = " << num(t.kap_hi) << '\n';
    os << "c1 = " << num(t.constants.c1) << '\n';
    os << "c2 = " << num(t.constants.c2) << '\n';
    os << "c3 = " << num(t.constants.c3) << '\n';
    os << "cP = " << num(t.constants.cP) << '\n';
    os << "constants_source = " << (t.constants.estimated ? "estimated (empirical lower bounds x 1.5)" : "config")
       << '\n';
    os << "theta0_linf = " << num(s.theta0_linf) << '\n';
    os << "theta0_below_theta1 = " << (s.theta0_linf <= t.theta1 ? "true" : "false") << '\n';
    os << "theta0_below_theta2 = " << (s.theta0_linf <= t.theta2 ? "true" : "false") << '\n';
    os << "phi_margin_final = " << num(s.final_margins.phi_margin) << '\n';
    os << "theta_margin_final = " << num(s.final_margins.theta_margin) << '\n';
    os << "phi_margin_min = " << num(s.min_phi_margin) << '\n';
    os << "theta_margin_min = " << num(s.min_theta_margin) << '\n';
    os << "max_principle_ok = " << (s.min_phi_margin >= -1e-8 && s.min_theta_margin >= -1e-8 ? "true" : "false")
       << '\n';
    os << "energy_law_checked = " << s.law_checked << '\n';
    os << "energy_law_passed = " << s.law_passed << '\n';
    os << "energy_law_pass_rate = "
       << num(s.law_checked ? static_cast<double>(s.law_passed) / static_cast<double>(s.law_checked) : 1.0) << '\n';
    os << "decay_verdict = " << s.decay << '\n';
}

void track(Summary& s, const DiagnosticsRecord& r, bool first)
{
    s.min_phi_margin = std::min(s.min_phi_margin, 1.0 - std::max(std::abs(r.phi_min), std::abs(r.phi_max)));
    s.min_theta_margin = std::min(s.min_theta_margin, s.theta0_linf - r.theta_linf);
    if (!first) {
        ++s.law_checked;
        if (r.energy_law_residual <= r.energy_law_tol)
            ++s.law_passed;
    }
}

}  // namespace

int run(const RunConfig& c, std::ostream& log)
{
    const std::string dir = c.output_dir;
    Summary sum;
    sum.min_theta_margin = 0.0;
    const Grid g = c.grid();
    const PhysicalParams& params = c.params;

    // Setup: anything thrown here is a configuration problem.
    std::optional<SimState> init;
    std::vector<DiagnosticsRecord> rows;
    try {
        sum.thr = compute_thresholds(params, resolve_constants(c), c.omega);
        if (c.restart_dir.empty()) {
            init = make_initial_state(c, sum.thr.theta2);
        } else {
            init = read_state(c.restart_dir, c.restart_step, c);
            std::ifstream is(fs::path(c.restart_dir) / "diagnostics.csv");
            if (!is)
                throw IoError("restart: cannot read diagnostics.csv in '" + c.restart_dir + "'");
            for (const DiagnosticsRecord& r : read_diagnostics_csv(is))
                if (r.step <= c.restart_step)
                    rows.push_back(r);
            if (rows.empty() || rows.back().step != c.restart_step)
                throw FormatError("restart: diagnostics.csv has no row for step " + std::to_string(c.restart_step));
        }
        sum.theta0_linf = init->theta0.max_abs();
        c.step.validate(g, params, params.isothermal ? 0.0 : sum.theta0_linf);
    } catch (const IoError& e) {
        log << "io error: " << e.what() << '\n';
        return exit_io;
    } catch (const FormatError& e) {
        log << "restart error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        log << "config error: " << e.what() << '\n';
        return exit_config;
    }
    SimState state = std::move(*init);

    std::ofstream csv;
    try {
        fs::create_directories(dir);
        std::ofstream(fs::path(dir) / "config.txt") << serialize(c);
        csv.open(fs::path(dir) / "diagnostics.csv", std::ios::trunc);
        if (!csv)
            throw IoError("cannot write diagnostics.csv in '" + dir + "'");
        write_diagnostics_header(csv);
        if (rows.empty()) {
            DiagnosticsRecord r0 = measure(state, nullptr, c.step.dt, sum.thr, params, c.eta);
            r0.energy_law_tol = energy_law_tolerance(r0.total_energy, c.step.dt, g.min_spacing());
            rows.push_back(r0);
            write_state(dir, state);
        } else if (fs::absolute(c.restart_dir) != fs::absolute(dir)) {
            for (long s : {0L, c.restart_step})
                for (const char* f : {"phi", "theta", "p", "u", "v"})
                    fs::copy_file(snap_path(c.restart_dir, s, f), snap_path(dir, s, f),
                                  fs::copy_options::overwrite_existing);
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
            write_diagnostics_row(csv, rows[k]);
            track(sum, rows[k], k == 0);
        }
        csv.flush();
    } catch (const std::exception& e) {
        log << "io error: " << e.what() << '\n';
        return exit_io;
    }

    const long n_steps = c.total_steps();
    DiagnosticsRecord prev = rows.back();
    int code = exit_success;
    try {
        while (state.step < n_steps) {
            const ScalarField prev_theta = state.theta;
            StepReport rep;
            state = advance(state, c.step, params, &rep);
            if (rep.soft_violation)
                log << "warning: " << rep.message << '\n';

            DiagnosticsRecord r = measure(state, &prev_theta, c.step.dt, sum.thr, params, c.eta);
            r.energy_law_residual = energy_law_residual(prev, r, c.step.dt, sum.thr, params);
            r.energy_law_tol = energy_law_tolerance(prev.total_energy, c.step.dt, g.min_spacing());
            prev = r;

            const bool last = state.step == n_steps;
            if (state.step % c.diagnostics_every == 0 || last) {
                rows.push_back(r);
                track(sum, r, false);
                write_diagnostics_row(csv, r);
                csv.flush();
                if (!csv)
                    throw IoError("write to diagnostics.csv failed");
            }
            if (state.step % c.snapshot_every == 0 || last)
                write_state(dir, state);
        }
    } catch (const InvariantViolation& e) {
        sum.status = "invariant-abort";
        sum.message = e.what();
        code = exit_invariant;
    } catch (const CflViolation& e) {
        sum.status = "invariant-abort";
        sum.message = e.what();
        code = exit_invariant;
    } catch (const IoError& e) {
        sum.status = "io-failure";
        sum.message = e.what();
        code = exit_io;
    } catch (const std::exception& e) {
        sum.status = "solver-failure";
        sum.message = e.what();
        code = exit_solver;
    }
    if (code != exit_success)
        log << sum.status << ": " << sum.message << '\n';

    sum.steps = state.step;
    sum.t = state.t;
    sum.final_margins = max_principle_report(state);
    if (rows.size() >= 2)
        sum.decay = to_string(decay_monitor(rows, decay_window_for(c, rows.size())));
    try {
        write_summary(dir, c, sum);
    } catch (const IoError& e) {
        log << "io error: " << e.what() << '\n';
        return code == exit_success ? exit_io : code;
    }
    return code;
}

// ---------------------------------------------------------------------------
// Audit

std::map<std::string, std::string> read_key_values(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw FormatError(path + " line " + std::to_string(lineno) + ": expected 'key = value'");
        out[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return out;
}

bool AuditReport::ok() const
{
    return std::none_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.status == CheckStatus::fail; });
}

namespace {

bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

double get(const std::map<std::string, std::string>& kv, const std::string& key)
{
    const auto it = kv.find(key);
    if (it == kv.end())
        throw FormatError("summary.txt: missing key '" + key + "'");
    return std::stod(it->second);
}

}  // namespace

AuditReport audit(const std::string& run_dir)
{
    const RunConfig c = load_config((fs::path(run_dir) / "config.txt").string());
    const auto kv = read_key_values((fs::path(run_dir) / "summary.txt").string());
    std::ifstream is(fs::path(run_dir) / "diagnostics.csv");
    if (!is)
        throw std::runtime_error("cannot open diagnostics.csv in '" + run_dir + "'");
    const std::vector<DiagnosticsRecord> rows = read_diagnostics_csv(is);
    if (rows.empty())
        throw FormatError("diagnostics.csv has no data rows");

    AuditReport rep;
    std::vector<long> flagged;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        rep.checks.push_back({name, pass ? CheckStatus::pass : CheckStatus::fail, detail});
    };

    Thresholds thr;
    thr.zeta = get(kv, "zeta");
    thr.omega = get(kv, "omega");
    const double w = c.params.a * c.params.lambda0;

    // Row-internal consistency of the energy columns.
    {
        long bad = 0;
        for (const auto& r : rows) {
            const double e = r.u_l2_sq + 2.0 * w * r.mixing_energy + thr.zeta * r.grad_theta_l2_sq +
                             thr.omega * r.theta_l2_sq;
            const double iso = 0.5 * r.u_l2_sq + w * r.mixing_energy;
            if (!close(r.total_energy, e) || !close(r.isothermal_energy, iso)) {
                ++bad;
                flagged.push_back(r.step);
            }
        }
        add("energy_consistency", bad == 0, std::to_string(bad) + " inconsistent row(s)");
    }

    // Recompute from snapshots.
    {
        long compared = 0, bad = 0;
        for (const auto& r : rows) {
            if (!fs::exists(snap_path(run_dir, r.step, "phi")))
                continue;
            const SimState s = read_state(run_dir, r.step, c);
            const DiagnosticsRecord m = measure(s, nullptr, c.step.dt, thr, c.params, c.eta);
            ++compared;
            const bool same = close(m.u_l2_sq, r.u_l2_sq) && close(m.grad_u_l2_sq, r.grad_u_l2_sq) &&
                              close(m.kinetic_viscous, r.kinetic_viscous) &&
                              close(m.mixing_energy, r.mixing_energy) && close(m.total_energy, r.total_energy) &&
                              close(m.isothermal_energy, r.isothermal_energy) &&
                              close(m.ac_residual_l2, r.ac_residual_l2) && close(m.theta_l2_sq, r.theta_l2_sq) &&
                              close(m.grad_theta_l2_sq, r.grad_theta_l2_sq) &&
                              close(m.lap_theta_l2_sq, r.lap_theta_l2_sq) &&
                              close(m.grad_theta_hat_l2_sq, r.grad_theta_hat_l2_sq) &&
                              close(m.theta_linf, r.theta_linf) && close(m.phi_min, r.phi_min) &&
                              close(m.phi_max, r.phi_max) && close(m.div_u_linf, r.div_u_linf);
            if (!same) {
                ++bad;
                flagged.push_back(r.step);
            }
        }
        add("snapshot_recompute", bad == 0 && compared > 0,
            std::to_string(compared) + " snapshot(s) compared, " + std::to_string(bad) + " mismatch(es)");
    }

    // Maximum principles.
    {
        const double theta0 = rows.front().theta_linf;
        long bad = 0;
        for (const auto& r : rows)
            if (r.phi_max > 1.0 + 1e-8 || r.phi_min < -1.0 - 1e-8 || r.theta_linf > theta0 + 1e-8) {
                ++bad;
                flagged.push_back(r.step);
            }
        add("max_principle", bad == 0, std::to_string(bad) + " row(s) outside the bounds");
    }

    // Step and time continuity.
    {
        long bad = 0;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const long ds = rows[k].step - rows[k - 1].step;
            const bool regular = ds == c.diagnostics_every || (k + 1 == rows.size() && ds > 0 && ds <= c.diagnostics_every);
            if (!regular || !close(rows[k].t - rows[k - 1].t, ds * c.step.dt)) {
                ++bad;
                flagged.push_back(rows[k].step);
            }
        }
        add("continuity", bad == 0 && rows.front().step == 0, std::to_string(bad) + " discontinuit(ies)");
    }

    // Energy law.
    {
        long checked = 0, passed = 0;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            ++checked;
            passed += rows[k].energy_law_residual <= rows[k].energy_law_tol;
        }
        const double rate = checked ? static_cast<double>(passed) / static_cast<double>(checked) : 1.0;
        const bool claimed = close(rate, get(kv, "energy_law_pass_rate"), 1e-12);
        const bool compliant = kv.count("theta0_below_theta2") && kv.at("theta0_below_theta2") == "true";
        std::string detail = "pass rate " + num(rate) + " over " + std::to_string(checked) + " step(s)";
        if (!claimed)
            add("energy_law", false, detail + "; summary reports " + kv.at("energy_law_pass_rate"));
        else if (!compliant)
            rep.checks.push_back({"energy_law", CheckStatus::skip, detail + "; theta0 above Theta2, law not claimed"});
        else
            add("energy_law", rate >= 0.99, detail);
    }

    // Decay verdict.
    {
        const std::string claimed = kv.count("decay_verdict") ? kv.at("decay_verdict") : "";
        if (rows.size() < 2) {
            add("decay_verdict", claimed == "n/a", "too few rows; summary says " + claimed);
        } else {
            const std::string v = to_string(decay_monitor(rows, decay_window_for(c, rows.size())));
            add("decay_verdict", v == claimed, "recomputed " + v + ", summary says " + claimed);
        }
    }

    std::sort(flagged.begin(), flagged.end());
    flagged.erase(std::unique(flagged.begin(), flagged.end()), flagged.end());
    rep.flagged_steps = std::move(flagged);
    return rep;
}

void print_audit(std::ostream& os, const AuditReport& report)
{
    for (const auto& ch : report.checks) {
        const char* tag = ch.status == CheckStatus::pass ? "PASS" : ch.status == CheckStatus::fail ? "FAIL" : "SKIP";
        os << tag << ' ' << ch.name << ": " << ch.detail << '\n';
    }
    os << "flagged_steps =";
    for (long s : report.flagged_steps)
        os << ' ' << s;
    os << '\n' << (report.ok() ? "audit passed" : "audit FAILED") << '\n';
}

void print_thresholds(std::ostream& os, const RunConfig& c)
{
    const Thresholds t = compute_thresholds(c.params, resolve_constants(c), c.omega);
    os << "theta1 = " << num(t.theta1) << '\n';
    os << "theta2 = " << num(t.theta2) << '\n';
    os << "zeta = " << num(t.zeta) << '\n';
    os << "omega = " << num(t.omega) << '\n';
    os << "mu_lo = " << num(t.mu_lo) << '\n';
    os << "mu_hi = " << num(t.mu_hi) << '\n';
    os << "kap_lo = " << num(t.kap_lo) << '\n';
    os << "kap_hi = " << num(t.kap_hi) << '\n';
    os << "c1 = " << num(t.constants.c1) << '\n';
    os << "c2 = " << num(t.constants.c2) << '\n';
    os << "c3 = " << num(t.constants.c3) << '\n';
    os << "cP = " << num(t.constants.cP) << '\n';
    os << "constants_source = " << (t.constants.estimated ? "estimated" : "config") << '\n';
}

}  // namespace marangoni
