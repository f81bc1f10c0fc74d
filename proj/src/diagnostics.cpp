#include "marangoni/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace marangoni {

// ---------------------------------------------------------------------------
// Thresholds

double zeta_value(double mu_lo, double kap_lo, double c3, double theta2)
{
    return mu_lo * kap_lo / (4.0 * c3 * c3 * theta2 * theta2);
}

Thresholds compute_thresholds(const PhysicalParams& params, const SobolevConstants& consts, double omega)
{
    for (double c : {consts.c1, consts.c2, consts.c3, consts.cP})
        if (!(c > 0.0) || !std::isfinite(c))
            throw std::invalid_argument("Sobolev constants must be positive");
    if (!(omega > 0.0))
        throw std::invalid_argument("omega must be positive");

    const double pre = 1.0 / (2.0 * consts.c1 * consts.c2 * std::abs(params.b));
    auto rhs = [&](double l) {
        return pre * std::sqrt(params.a * params.gamma * params.mu.min_on(l) / (2.0 * params.lambda0));
    };

    // l - rhs(l) is increasing; its root is the sup of min{l, rhs(l)}.
    double lo = 0.0, hi = rhs(0.0);
    int it = 0;
    for (; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (mid - rhs(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    if (it == 200)
        throw SolverError("Theta1 bisection did not converge");

    Thresholds t;
    t.constants = consts;
    t.omega = omega;
    t.theta1 = lo;
    t.mu_lo = params.mu.min_on(t.theta1);
    t.mu_hi = params.mu.max_on(t.theta1);
    t.kap_lo = params.kappa.min_on(t.theta1);
    t.kap_hi = params.kappa.max_on(t.theta1);

    const double bound = t.kap_lo / (4.0 * consts.c3);
    auto admissible = [&](double l) { return l * params.kappa.max_abs_derivative_on(l) <= bound; };
    if (admissible(t.theta1)) {
        t.theta2 = t.theta1;
    } else {
        lo = 0.0;
        hi = t.theta1;
        for (it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            if (admissible(mid))
                lo = mid;
            else
                hi = mid;
        }
        if (it == 200)
            throw SolverError("Theta2 bisection did not converge");
        t.theta2 = lo;
    }
    t.zeta = zeta_value(t.mu_lo, t.kap_lo, consts.c3, t.theta2);
    return t;
}

// ---------------------------------------------------------------------------
// Constants

namespace {

constexpr int mode_count = 4;

struct Ratios {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, cP = 0.0;
};

Ratios sample_ratios(const ScalarField& f)
{
    const Grid& g = f.grid;
    const double l2 = norm_sq(f);
    const double grad2 = grad_norm_sq(f);
    const double lap2 = norm_sq(laplacian(f));
    const double linf = f.max_abs();

    const VectorField gr = gradient(f);
    double l4 = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double gx = 0.5 * (gr.U(i, j) + gr.U(i + 1, j));
            const double gy = 0.5 * (gr.V(i, j) + gr.V(i, j + 1));
            const double s = gx * gx + gy * gy;
            l4 += s * s;
        }
    const double grad_l4_sq = std::sqrt(l4 * g.cell_area());
    const double h2 = std::sqrt(l2 + grad2 + lap2);

    Ratios r;
    r.cP = std::sqrt(l2 / grad2);
    r.c1 = grad_l4_sq / (h2 * linf);
    r.c2 = h2 / (std::sqrt(lap2) + std::sqrt(l2));
    r.c3 = grad_l4_sq / (std::sqrt(lap2) * linf);
    return r;
}

}  // namespace

SobolevConstants estimate_constants_raw(const Grid& grid, int samples, std::uint64_t seed)
{
    if (samples < 100)
        throw std::invalid_argument("estimate_constants needs at least 100 samples");
    const int nx = grid.nx(), ny = grid.ny();
    std::vector<double> sx(static_cast<std::size_t>(mode_count) * nx), sy(static_cast<std::size_t>(mode_count) * ny);
    for (int k = 0; k < mode_count; ++k) {
        for (int i = 0; i < nx; ++i)
            sx[k * nx + i] = std::sin((k + 1) * std::numbers::pi * grid.x(i) / grid.lx());
        for (int j = 0; j < ny; ++j)
            sy[k * ny + j] = std::sin((k + 1) * std::numbers::pi * grid.y(j) / grid.ly());
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Ratios best;
    ScalarField f(grid, BoundaryCondition::homogeneous_dirichlet(grid));
    double coef[mode_count][mode_count];
    for (int s = 0; s < samples; ++s) {
        for (int k = 0; k < mode_count; ++k)
            for (int l = 0; l < mode_count; ++l)
                coef[k][l] = unit(rng) / ((k + 1) * (l + 1));
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double v = 0.0;
                for (int k = 0; k < mode_count; ++k)
                    for (int l = 0; l < mode_count; ++l)
                        v += coef[k][l] * sx[k * nx + i] * sy[l * ny + j];
                f(i, j) = v;
            }
        if (f.max_abs() == 0.0)
            continue;
        const Ratios r = sample_ratios(f);
        best.c1 = std::max(best.c1, r.c1);
        best.c2 = std::max(best.c2, r.c2);
        best.c3 = std::max(best.c3, r.c3);
        best.cP = std::max(best.cP, r.cP);
    }
    return {best.c1, best.c2, best.c3, best.cP, true};
}

SobolevConstants estimate_constants(const Grid& grid, int samples, std::uint64_t seed)
{
    constexpr double safety = 1.5;
    SobolevConstants c = estimate_constants_raw(grid, samples, seed);
    c.c1 *= safety;
    c.c2 *= safety;
    c.c3 *= safety;
    c.cP *= safety;
    return c;
}

// ---------------------------------------------------------------------------
// Functionals

double mixing_energy(const ScalarField& phi, const PhysicalParams& params)
{
    double w = 0.0;
    for (double v : phi.values)
        w += double_well(v, params.eps).w;
    return 0.5 * grad_norm_sq(phi) + w * phi.grid.cell_area();
}

namespace {

double u_ext(const VectorField& w, int i, int j)
{
    if (j < 0)
        return 2.0 * w.u_bottom[i] - w.U(i, 0);
    if (j >= w.grid.ny())
        return 2.0 * w.u_top[i] - w.U(i, w.grid.ny() - 1);
    return w.U(i, j);
}

double v_ext(const VectorField& w, int i, int j)
{
    if (i < 0)
        return 2.0 * w.v_left[j] - w.V(0, j);
    if (i >= w.grid.nx())
        return 2.0 * w.v_right[j] - w.V(w.grid.nx() - 1, j);
    return w.V(i, j);
}

double thermal_weight(const PhysicalParams& params) { return params.a * params.lambda0; }

}  // namespace

double velocity_gradient_norm_sq(const VectorField& u)
{
    const Grid& g = u.grid;
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    double cells = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double ux = (u.U(i + 1, j) - u.U(i, j)) * idx;
            const double vy = (u.V(i, j + 1) - u.V(i, j)) * idy;
            cells += ux * ux + vy * vy;
        }
    double corners = 0.0;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const double uy = (u_ext(u, i, j) - u_ext(u, i, j - 1)) * idy;
            const double vx = (v_ext(u, i, j) - v_ext(u, i - 1, j)) * idx;
            corners += corner_weight(g, i, j) * (uy * uy + vx * vx);
        }
    return (cells + corners) * g.cell_area();
}

double viscous_dissipation(const VectorField& u, const ScalarField& theta, const PhysicalParams& params)
{
    const ScalarField d = symmetric_gradient_norm_sq(u);
    double s = 0.0;
    for (std::size_t k = 0; k < d.values.size(); ++k)
        s += params.mu.value(theta.values[k]) * d.values[k];
    return 2.0 * s * u.grid.cell_area();
}

ScalarField allen_cahn_residual(const ScalarField& phi, const PhysicalParams& params)
{
    ScalarField r = laplacian(phi);
    for (std::size_t k = 0; k < r.values.size(); ++k)
        r.values[k] -= double_well(phi.values[k], params.eps).wprime;
    return r;
}

double total_energy(const SimState& state, const Thresholds& thr, const PhysicalParams& params)
{
    return norm_sq(state.u) + 2.0 * thermal_weight(params) * mixing_energy(state.phi, params) +
           thr.zeta * grad_norm_sq(state.theta) + thr.omega * norm_sq(state.theta);
}

double isothermal_energy(const SimState& state, const PhysicalParams& params)
{
    return 0.5 * norm_sq(state.u) + thermal_weight(params) * mixing_energy(state.phi, params);
}

namespace {

ScalarField theta_hat(const SimState& s)
{
    ScalarField h = s.theta;
    for (std::size_t k = 0; k < h.values.size(); ++k)
        h.values[k] -= s.theta0.values[k];
    return h;
}

double theta_t_norm_sq(const SimState& s, const ScalarField* prev, double dt)
{
    if (!prev)
        return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < s.theta.values.size(); ++k) {
        const double d = (s.theta.values[k] - prev->values[k]) / dt;
        acc += d * d;
    }
    return acc * s.grid().cell_area();
}

}  // namespace

HigherOrder higher_order_functionals(const SimState& state, const ScalarField* prev_theta, double dt,
                                     const PhysicalParams& params, double eta)
{
    const DiagnosticsRecord r = measure(state, prev_theta, dt, Thresholds{}, params, eta);
    return {r.H, r.Y};
}

DiagnosticsRecord measure(const SimState& state, const ScalarField* prev_theta, double dt, const Thresholds& thr,
                          const PhysicalParams& params, double eta)
{
    DiagnosticsRecord r;
    r.step = state.step;
    r.t = state.t;
    r.u_l2_sq = norm_sq(state.u);
    r.grad_u_l2_sq = velocity_gradient_norm_sq(state.u);
    r.kinetic_viscous = viscous_dissipation(state.u, state.theta, params);

    const double grad_phi = grad_norm_sq(state.phi);
    double wsum = 0.0;
    for (double v : state.phi.values)
        wsum += double_well(v, params.eps).w;
    const double wint = wsum * state.grid().cell_area();
    r.mixing_energy = 0.5 * grad_phi + wint;

    const double ac = norm_sq(allen_cahn_residual(state.phi, params));
    r.ac_residual_l2 = std::sqrt(ac);

    r.theta_l2_sq = norm_sq(state.theta);
    r.grad_theta_l2_sq = grad_norm_sq(state.theta);
    r.lap_theta_l2_sq = norm_sq(laplacian(state.theta));
    r.grad_theta_hat_l2_sq = grad_norm_sq(theta_hat(state));
    r.theta_linf = state.theta.max_abs();
    r.phi_min = state.phi.min();
    r.phi_max = state.phi.max();

    const double tt = theta_t_norm_sq(state, prev_theta, dt);
    r.theta_t_l2 = std::sqrt(tt);
    r.theta_t_valid = prev_theta != nullptr;
    r.div_u_linf = divergence(state.u).max_abs();

    const double w = thermal_weight(params);
    r.isothermal_energy = 0.5 * r.u_l2_sq + w * r.mixing_energy;
    r.total_energy = r.u_l2_sq + 2.0 * w * r.mixing_energy + thr.zeta * r.grad_theta_l2_sq + thr.omega * r.theta_l2_sq;
    r.H = r.u_l2_sq + r.grad_u_l2_sq + r.kinetic_viscous + w * grad_phi + 2.0 * w * wint + ac +
          r.grad_theta_hat_l2_sq + tt;
    r.Y = r.kinetic_viscous + ac + eta * tt;
    return r;
}

double energy_law_residual(const DiagnosticsRecord& prev, const DiagnosticsRecord& next, double dt,
                           const Thresholds& thr, const PhysicalParams& params)
{
    return (next.total_energy - prev.total_energy) / dt + 0.5 * thr.mu_lo * next.grad_u_l2_sq +
           thermal_weight(params) * params.gamma * next.ac_residual_l2 * next.ac_residual_l2 +
           0.5 * thr.zeta * thr.kap_lo * next.lap_theta_l2_sq;
}

double energy_law_tolerance(double energy_prev, double dt, double dx)
{
    return std::max(10.0 * dt, 10.0 * dx * dx) * (1.0 + energy_prev);
}

double isothermal_energy_law_residual(const DiagnosticsRecord& prev, const DiagnosticsRecord& next, double dt,
                                      const PhysicalParams& params)
{
    return (next.isothermal_energy - prev.isothermal_energy) / dt + 0.5 * params.mu.min_on(0.0) * next.grad_u_l2_sq +
           thermal_weight(params) * params.gamma * next.ac_residual_l2 * next.ac_residual_l2;
}

MaxPrincipleReport max_principle_report(const SimState& state)
{
    MaxPrincipleReport m;
    m.phi_margin = 1.0 - state.phi.max_abs();
    m.theta_margin = state.theta0.max_abs() - state.theta.max_abs();
    m.ok = m.phi_margin >= -1e-8 && m.theta_margin >= -1e-8;
    return m;
}

// ---------------------------------------------------------------------------
// Decay

std::string to_string(DecayVerdict v) { return v == DecayVerdict::decaying ? "decaying" : "not-yet"; }

double decay_quantity(const DiagnosticsRecord& r)
{
    return r.grad_u_l2_sq + r.ac_residual_l2 * r.ac_residual_l2 + r.theta_l2_sq + r.grad_theta_l2_sq +
           r.lap_theta_l2_sq;
}

DecayVerdict decay_monitor(const std::vector<DiagnosticsRecord>& series, int window)
{
    if (window < 1 || series.size() < 2 * static_cast<std::size_t>(window))
        throw std::invalid_argument("decay_monitor needs at least 2*window records");
    double lead = 0.0, trail = 0.0;
    for (int k = 0; k < window; ++k) {
        lead += decay_quantity(series[k]);
        trail += decay_quantity(series[series.size() - 1 - k]);
    }
    return trail <= 0.01 * lead ? DecayVerdict::decaying : DecayVerdict::not_yet;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::string> diagnostics_columns()
{
    return {"step",
            "t",
            "u_l2_sq",
            "grad_u_l2_sq",
            "kinetic_viscous",
            "mixing_energy",
            "isothermal_energy",
            "total_energy",
            "H",
            "Y",
            "ac_residual_l2",
            "theta_l2_sq",
            "grad_theta_l2_sq",
            "lap_theta_l2_sq",
            "grad_theta_hat_l2_sq",
            "theta_linf",
            "phi_min",
            "phi_max",
            "theta_t_l2",
            "theta_t_valid",
            "div_u_linf",
            "energy_law_residual",
            "energy_law_tol"};
}

void write_diagnostics_header(std::ostream& os)
{
    const auto cols = diagnostics_columns();
    for (std::size_t k = 0; k < cols.size(); ++k)
        os << (k ? "," : "") << cols[k];
    os << '\n';
}

void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& r)
{
    char buf[32];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << ',' << buf;
    };
    os << r.step;
    for (double x : {r.t, r.u_l2_sq, r.grad_u_l2_sq, r.kinetic_viscous, r.mixing_energy, r.isothermal_energy,
                     r.total_energy, r.H, r.Y, r.ac_residual_l2, r.theta_l2_sq, r.grad_theta_l2_sq, r.lap_theta_l2_sq,
                     r.grad_theta_hat_l2_sq, r.theta_linf, r.phi_min, r.phi_max, r.theta_t_l2})
        put(x);
    os << ',' << (r.theta_t_valid ? 1 : 0);
    for (double x : {r.div_u_linf, r.energy_law_residual, r.energy_law_tol})
        put(x);
    os << '\n';
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is)
{
    const auto cols = diagnostics_columns();
    std::string line;
    if (!std::getline(is, line))
        throw FormatError("diagnostics: empty file");
    {
        std::istringstream hs(line);
        std::string name;
        std::size_t k = 0;
        while (std::getline(hs, name, ','))
            if (k >= cols.size() || name != cols[k++])
                throw FormatError("diagnostics line 1: unexpected column '" + name + "'");
        if (k != cols.size())
            throw FormatError("diagnostics line 1: missing columns");
    }
    std::vector<DiagnosticsRecord> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<double> v;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            std::size_t used = 0;
            double x = 0.0;
            try {
                x = std::stod(cell, &used);
            } catch (const std::logic_error&) {
                used = 0;
            }
            if (used == 0 || used != cell.size())
                throw FormatError("diagnostics line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            v.push_back(x);
        }
        if (v.size() != cols.size())
            throw FormatError("diagnostics line " + std::to_string(lineno) + ": expected " +
                              std::to_string(cols.size()) + " values, got " + std::to_string(v.size()));
        DiagnosticsRecord r;
        std::size_t k = 0;
        r.step = static_cast<long>(v[k++]);
        for (double* p : {&r.t, &r.u_l2_sq, &r.grad_u_l2_sq, &r.kinetic_viscous, &r.mixing_energy,
                          &r.isothermal_energy, &r.total_energy, &r.H, &r.Y, &r.ac_residual_l2, &r.theta_l2_sq,
                          &r.grad_theta_l2_sq, &r.lap_theta_l2_sq, &r.grad_theta_hat_l2_sq, &r.theta_linf, &r.phi_min,
                          &r.phi_max, &r.theta_t_l2})
            *p = v[k++];
        r.theta_t_valid = v[k++] != 0.0;
        for (double* p : {&r.div_u_linf, &r.energy_law_residual, &r.energy_law_tol})
            *p = v[k++];
        out.push_back(r);
    }
    return out;
}

}  // namespace marangoni
