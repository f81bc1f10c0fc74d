#include "marangoni/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace marangoni {

namespace {

// y = L x for the 5-point Laplacian with homogeneous ghost closure.
void apply_laplacian(const Grid& g, BoundaryKind kind, std::span<const double> x, std::span<double> y)
{
    const int nx = g.nx(), ny = g.ny();
    const double idx2 = 1.0 / (g.dx() * g.dx()), idy2 = 1.0 / (g.dy() * g.dy());
    const double wall = kind == BoundaryKind::dirichlet ? -1.0 : 1.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double c = x[k];
            const double w = i > 0 ? x[k - 1] : wall * c;
            const double e = i < nx - 1 ? x[k + 1] : wall * c;
            const double s = j > 0 ? x[k - nx] : wall * c;
            const double n = j < ny - 1 ? x[k + nx] : wall * c;
            y[k] = (e - 2.0 * c + w) * idx2 + (n - 2.0 * c + s) * idy2;
        }
}

// Diagonal of -L.
double neg_laplacian_diagonal(const Grid& g, BoundaryKind kind, int i, int j)
{
    const double idx2 = 1.0 / (g.dx() * g.dx()), idy2 = 1.0 / (g.dy() * g.dy());
    const double wall = kind == BoundaryKind::dirichlet ? 1.0 : -1.0;
    double d = 2.0 * idx2 + 2.0 * idy2;
    if (i == 0) d += wall * idx2;
    if (i == g.nx() - 1) d += wall * idx2;
    if (j == 0) d += wall * idy2;
    if (j == g.ny() - 1) d += wall * idy2;
    return d;
}

int iteration_cap(const Grid& g) { return 10 * (g.nx() + g.ny()); }

// Cell-to-corner average of a padded field: corner (i, j) sits at x = i dx, y = j dy.
double corner_average(const Padded& p, int i, int j)
{
    return 0.25 * (p(i - 1, j - 1) + p(i, j - 1) + p(i - 1, j) + p(i, j));
}

double u_wall(const VectorField& w, int i, int j)
{
    const int ny = w.grid.ny();
    if (j < 0)
        return 2.0 * w.u_bottom[i] - w.U(i, 0);
    if (j >= ny)
        return 2.0 * w.u_top[i] - w.U(i, ny - 1);
    return w.U(i, j);
}

double v_wall(const VectorField& w, int i, int j)
{
    const int nx = w.grid.nx();
    if (i < 0)
        return 2.0 * w.v_left[j] - w.V(0, j);
    if (i >= nx)
        return 2.0 * w.v_right[j] - w.V(nx - 1, j);
    return w.V(i, j);
}

}  // namespace

// ---------------------------------------------------------------------------

SimState SimState::initial(const Grid& grid, const BoundaryData& phi_b, std::vector<double> phi,
                           std::vector<double> theta)
{
    validate_phase_boundary(phi_b);
    ScalarField th(grid, BoundaryCondition::homogeneous_dirichlet(grid), std::move(theta));
    SimState s{0.0,
               0,
               VectorField(grid),
               ScalarField(grid, BoundaryCondition::neumann(grid)),
               ScalarField(grid, BoundaryCondition::dirichlet(phi_b), std::move(phi)),
               th,
               th};
    return s;
}

void StepConfig::validate(const Grid& grid, const PhysicalParams& params, double theta_bound) const
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigError("dt must be positive");
    if (!(cfl_safety > 0.0) || cfl_safety > 1.0)
        throw ConfigError("cfl_safety must lie in (0, 1]");
    if (!(proj_tol > 0.0) || !(helmholtz_tol > 0.0))
        throw ConfigError("solver tolerances must be positive");

    const double h2 = grid.min_spacing() * grid.min_spacing();
    const double slack = 1.0 + 1e-12;
    char buf[256];
    const double kap_hi = params.kappa.max_on(theta_bound);
    const double mu_hi = params.mu.max_on(theta_bound);
    const double diff_bound = cfl_safety * h2 / (4.0 * kap_hi);
    if (dt > diff_bound * slack) {
        std::snprintf(buf, sizeof buf, "dt = %g violates the thermal diffusion bound dt <= cfl_safety h^2/(4 kappa_max) = %g",
                      dt, diff_bound);
        throw ConfigError(buf);
    }
    const double visc_bound = cfl_safety * h2 / (4.0 * mu_hi);  // rho = 1
    if (dt > visc_bound * slack) {
        std::snprintf(buf, sizeof buf, "dt = %g violates the viscous bound dt <= cfl_safety h^2 rho/(4 mu_max) = %g", dt,
                      visc_bound);
        throw ConfigError(buf);
    }
    const double reaction_bound = cfl_safety * params.eps * params.eps / (2.0 * params.gamma);
    if (dt > reaction_bound * slack) {
        std::snprintf(buf, sizeof buf, "dt = %g violates the phase reaction bound dt <= cfl_safety eps^2/(2 gamma) = %g",
                      dt, reaction_bound);
        throw ConfigError(buf);
    }
}

// ---------------------------------------------------------------------------
// Forces

VectorField capillary_force(const ScalarField& phi, const ScalarField& theta, const PhysicalParams& params)
{
    const Grid& g = phi.grid;
    const int nx = g.nx(), ny = g.ny();
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    const Padded P(phi), Th(theta);

    auto gx = [&](int i, int j) { return (P(i, j) - P(i - 1, j)) * idx; };  // u-face, j may be a ghost row
    auto gy = [&](int i, int j) { return (P(i, j) - P(i, j - 1)) * idy; };  // v-face, i may be a ghost column

    std::vector<double> t11(g.cells()), t22(g.cells());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double lam = surface_tension(theta(i, j), params);
            const double px = 0.5 * (gx(i, j) + gx(i + 1, j));
            const double py = 0.5 * (gy(i, j) + gy(i, j + 1));
            t11[g.index(i, j)] = lam * px * px;
            t22[g.index(i, j)] = lam * py * py;
        }
    std::vector<double> t12(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double lam = surface_tension(corner_average(Th, i, j), params);
            const double px = 0.5 * (gx(i, j - 1) + gx(i, j));
            const double py = 0.5 * (gy(i - 1, j) + gy(i, j));
            t12[static_cast<std::size_t>(j) * (nx + 1) + i] = lam * px * py;
        }
    auto T11 = [&](int i, int j) { return t11[g.index(i, j)]; };
    auto T22 = [&](int i, int j) { return t22[g.index(i, j)]; };
    auto T12 = [&](int i, int j) { return t12[static_cast<std::size_t>(j) * (nx + 1) + i]; };

    VectorField f(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i)
            f.U(i, j) = -((T11(i, j) - T11(i - 1, j)) * idx + (T12(i, j + 1) - T12(i, j)) * idy);
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            f.V(i, j) = -((T12(i + 1, j) - T12(i, j)) * idx + (T22(i, j) - T22(i, j - 1)) * idy);
    return f;
}

VectorField viscous_force(const VectorField& u, const ScalarField& theta, const PhysicalParams& params)
{
    const Grid& g = u.grid;
    const int nx = g.nx(), ny = g.ny();
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    const Padded Th(theta);

    std::vector<double> t11(g.cells()), t22(g.cells());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double mu = params.mu.value(theta(i, j));
            t11[g.index(i, j)] = 2.0 * mu * (u.U(i + 1, j) - u.U(i, j)) * idx;
            t22[g.index(i, j)] = 2.0 * mu * (u.V(i, j + 1) - u.V(i, j)) * idy;
        }
    std::vector<double> t12(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double mu = params.mu.value(corner_average(Th, i, j));
            t12[static_cast<std::size_t>(j) * (nx + 1) + i] =
                mu * ((u_wall(u, i, j) - u_wall(u, i, j - 1)) * idy + (v_wall(u, i, j) - v_wall(u, i - 1, j)) * idx);
        }
    auto T11 = [&](int i, int j) { return t11[g.index(i, j)]; };
    auto T22 = [&](int i, int j) { return t22[g.index(i, j)]; };
    auto T12 = [&](int i, int j) { return t12[static_cast<std::size_t>(j) * (nx + 1) + i]; };

    VectorField f(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i)
            f.U(i, j) = (T11(i, j) - T11(i - 1, j)) * idx + (T12(i, j + 1) - T12(i, j)) * idy;
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            f.V(i, j) = (T12(i + 1, j) - T12(i, j)) * idx + (T22(i, j) - T22(i, j - 1)) * idy;
    return f;
}

VectorField momentum_advection(const VectorField& u, AdvectionScheme scheme)
{
    const Grid& g = u.grid;
    const int nx = g.nx(), ny = g.ny();
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    const bool upwind = scheme == AdvectionScheme::upwind;

    auto derivative = [&](double vel, double minus, double centre, double plus, double inv_h) {
        if (!upwind)
            return 0.5 * (plus - minus) * inv_h;
        return vel > 0.0 ? (centre - minus) * inv_h : (plus - centre) * inv_h;
    };

    VectorField f(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const double a = u.U(i, j);
            const double b = 0.25 * (u.V(i - 1, j) + u.V(i, j) + u.V(i - 1, j + 1) + u.V(i, j + 1));
            f.U(i, j) = a * derivative(a, u.U(i - 1, j), a, u.U(i + 1, j), idx) +
                        b * derivative(b, u_wall(u, i, j - 1), a, u_wall(u, i, j + 1), idy);
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double b = u.V(i, j);
            const double a = 0.25 * (u.U(i, j - 1) + u.U(i + 1, j - 1) + u.U(i, j) + u.U(i + 1, j));
            f.V(i, j) = a * derivative(a, v_wall(u, i - 1, j), b, v_wall(u, i + 1, j), idx) +
                        b * derivative(b, u.V(i, j - 1), b, u.V(i, j + 1), idy);
        }
    return f;
}

VectorField buoyancy_force(const ScalarField& theta, const PhysicalParams& params)
{
    const Grid& g = theta.grid;
    VectorField f(g);
    if (params.isothermal)
        return f;
    const double scale = params.ra * params.g;
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            f.V(i, j) = scale * 0.5 * (theta(i, j - 1) + theta(i, j));
    return f;
}

// ---------------------------------------------------------------------------
// Substeps

ScalarField step_phase(const SimState& state, const StepConfig& cfg, const PhysicalParams& params)
{
    const ScalarField& phi = state.phi;
    const Grid& g = phi.grid;
    const double dt = cfg.dt, dg = cfg.dt * params.gamma;

    const ScalarField adv = advect(phi, state.u, cfg.advection);
    // Boundary part of the Dirichlet Laplacian: L phi = L_0 phi + lift.
    const ScalarField lift = laplacian(ScalarField(g, phi.bc));

    std::vector<double> rhs(g.cells());
    for (std::size_t k = 0; k < rhs.size(); ++k)
        rhs[k] = phi.values[k] - dt * adv.values[k] - dg * double_well(phi.values[k], params.eps).wprime +
                 dg * lift.values[k];

    std::vector<double> work(g.cells());
    LinearOperator A = [&](std::span<const double> x, std::span<double> y) {
        apply_laplacian(g, BoundaryKind::dirichlet, x, work);
        for (std::size_t k = 0; k < y.size(); ++k)
            y[k] = x[k] - dg * work[k];
    };
    std::vector<double> x = phi.values;
    SolverOptions opt;
    opt.rel_tol = cfg.helmholtz_tol;
    opt.max_iterations = iteration_cap(g);
    const SolveStats st = conjugate_gradient(A, rhs, x, opt);
    if (!st.converged)
        throw SolverError("phase solve did not converge (residual " + std::to_string(st.residual) + ")");
    return phi.with_values(std::move(x));
}

ScalarField step_temperature(const SimState& state, const StepConfig& cfg, const PhysicalParams& params)
{
    const ScalarField& theta = state.theta;
    const Grid& g = theta.grid;
    if (params.isothermal)
        return ScalarField(g, theta.bc);

    const CoefficientFn& kappa = params.kappa;
    const double dt = cfg.dt;

    std::vector<double> vt(g.cells()), inv_kap(g.cells());
    for (std::size_t k = 0; k < vt.size(); ++k) {
        vt[k] = kirchhoff(theta.values[k], kappa);
        inv_kap[k] = 1.0 / kappa.value(theta.values[k]);
    }
    const ScalarField vartheta = theta.with_values(vt);
    const ScalarField adv = advect(vartheta, state.u, cfg.advection);

    // kappa^{-1} (vt_new - vt)/dt + kappa^{-1} adv = L vt_new, symmetric positive definite.
    std::vector<double> rhs(g.cells()), inv_diag(g.cells());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            rhs[k] = inv_kap[k] * (vt[k] - dt * adv.values[k]);
            inv_diag[k] = 1.0 / (inv_kap[k] + dt * neg_laplacian_diagonal(g, BoundaryKind::dirichlet, i, j));
        }
    std::vector<double> work(g.cells());
    LinearOperator A = [&](std::span<const double> x, std::span<double> y) {
        apply_laplacian(g, BoundaryKind::dirichlet, x, work);
        for (std::size_t k = 0; k < y.size(); ++k)
            y[k] = inv_kap[k] * x[k] - dt * work[k];
    };
    std::vector<double> x = vt;
    SolverOptions opt;
    opt.rel_tol = cfg.helmholtz_tol;
    opt.max_iterations = iteration_cap(g);
    const SolveStats st = conjugate_gradient(A, rhs, x, opt, inv_diag);
    if (!st.converged)
        throw SolverError("temperature solve did not converge (residual " + std::to_string(st.residual) + ")");

    for (double& v : x)
        v = inverse_kirchhoff(v, kappa);
    return theta.with_values(std::move(x));
}

Projection project(const VectorField& u_star, const StepConfig& cfg)
{
    const Grid& g = u_star.grid;
    const double dt = cfg.dt;
    // -L q = -div(u_star)/dt, so CG sees a positive semidefinite operator.
    ScalarField rhs = divergence(u_star);
    for (double& v : rhs.values)
        v /= -dt;

    const double scale = std::min(1.0, 1.0 / g.min_spacing());
    SolverOptions opt;
    opt.rel_tol = 0.0;
    opt.abs_tol = cfg.proj_tol * u_star.max_abs() * scale / dt;
    opt.max_iterations = iteration_cap(g);
    opt.mean_zero = true;

    LinearOperator A = [&](std::span<const double> x, std::span<double> y) {
        apply_laplacian(g, BoundaryKind::neumann, x, y);
        for (double& v : y)
            v = -v;
    };
    std::vector<double> q(g.cells(), 0.0);
    Projection out{u_star, ScalarField(g, BoundaryCondition::neumann(g)), {}};
    out.stats = conjugate_gradient(A, rhs.values, q, opt);
    if (!out.stats.converged)
        throw SolverError("pressure projection did not converge (residual " + std::to_string(out.stats.residual) + ")");
    out.q.values = std::move(q);

    const VectorField gq = gradient(out.q);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i)
            out.u.U(i, j) -= dt * gq.U(i, j);
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            out.u.V(i, j) -= dt * gq.V(i, j);
    return out;
}

MomentumUpdate step_momentum(const SimState& state, const ScalarField& phi_new, const ScalarField& theta_new,
                             const StepConfig& cfg, const PhysicalParams& params)
{
    const Grid& g = state.grid();
    const double dt = cfg.dt;
    const VectorField adv = momentum_advection(state.u, cfg.advection);
    const VectorField visc = viscous_force(state.u, state.theta, params);
    const VectorField cap = capillary_force(phi_new, theta_new, params);
    const VectorField buoy = buoyancy_force(theta_new, params);
    const VectorField gp = gradient(state.p);

    VectorField u_star = state.u;
    u_star.apply_no_slip();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i)
            u_star.U(i, j) += dt * (-adv.U(i, j) + visc.U(i, j) + cap.U(i, j) + buoy.U(i, j) - gp.U(i, j));
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            u_star.V(i, j) += dt * (-adv.V(i, j) + visc.V(i, j) + cap.V(i, j) + buoy.V(i, j) - gp.V(i, j));

    Projection pr = project(u_star, cfg);
    ScalarField p = state.p;
    for (std::size_t k = 0; k < p.values.size(); ++k)
        p.values[k] += pr.q.values[k];
    const double mean = p.mean();
    for (double& v : p.values)
        v -= mean;

    const double cfl = cfl_number(pr.u, dt);
    if (cfl > 1.0 || !pr.u.finite()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "CFL violation: dt (|u|/dx + |v|/dy) = %g exceeds 1 at t = %g", cfl,
                      state.t + dt);
        throw CflViolation(buf);
    }
    return {std::move(pr.u), std::move(p)};
}

double cfl_number(const VectorField& u, double dt)
{
    const Grid& g = u.grid;
    double c = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double a = std::max(std::abs(u.U(i, j)), std::abs(u.U(i + 1, j))) / g.dx();
            const double b = std::max(std::abs(u.V(i, j)), std::abs(u.V(i, j + 1))) / g.dy();
            c = std::max(c, a + b);
        }
    return dt * c;
}

SimState advance(const SimState& state, const StepConfig& cfg, const PhysicalParams& params, StepReport* report)
{
    SimState next = state;
    next.phi = step_phase(state, cfg, params);
    next.theta = step_temperature(state, cfg, params);
    MomentumUpdate mom = step_momentum(state, next.phi, next.theta, cfg, params);
    next.u = std::move(mom.u);
    next.p = std::move(mom.p);
    next.t = state.t + cfg.dt;
    next.step = state.step + 1;

    StepReport r;
    r.phi_excess = next.phi.max_abs() - 1.0;
    r.theta_excess = next.theta.max_abs() - next.theta0.max_abs();
    r.div_linf = divergence(next.u).max_abs();
    r.cfl = cfl_number(next.u, cfg.dt);
    const double worst = std::max(r.phi_excess, r.theta_excess);
    if (worst > 100.0 * cfg.tol_mp || !next.phi.finite() || !next.theta.finite()) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "maximum principle violated at step %ld: max|phi| - 1 = %.3e, ||theta|| - ||theta0|| = %.3e",
                      next.step, r.phi_excess, r.theta_excess);
        throw InvariantViolation(buf);
    }
    if (worst > cfg.tol_mp) {
        r.soft_violation = true;
        char buf[200];
        std::snprintf(buf, sizeof buf, "step %ld: maximum-principle excess %.3e above tolerance", next.step, worst);
        r.message = buf;
    }
    if (report)
        *report = r;
    return next;
}

}  // namespace marangoni
