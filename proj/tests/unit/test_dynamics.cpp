#include "doctest.h"
#include "marangoni/cli.hpp"
#include "marangoni/diagnostics.hpp"
#include "marangoni/dynamics.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace marangoni;

namespace {

std::vector<double> uniform(std::size_t n, double lo, double hi, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v)
        x = d(rng);
    return v;
}

SimState still(const Grid& g, double phi, double theta)
{
    return SimState::initial(g, BoundaryData::constant(g, phi), std::vector<double>(g.cells(), phi),
                             std::vector<double>(g.cells(), theta));
}

VectorField vortex(const Grid& g, double amp)
{
    RunConfig c;
    c.nx = g.nx();
    c.ny = g.ny();
    c.lx = g.lx();
    c.ly = g.ly();
    c.ic_u = Preset::parse("vortex(" + std::to_string(amp) + ")");
    return make_initial_state(c, 0.0).u;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST_CASE("capillary force vanishes for constant phi")
{
    const Grid g(12, 12);
    const SimState s = still(g, 0.3, 0.0);
    const ScalarField th(g, BoundaryCondition::homogeneous_dirichlet(g), uniform(g.cells(), -1, 1, 2));
    CHECK(capillary_force(s.phi, th, PhysicalParams{}).max_abs() < 1e-12);
}

TEST_CASE("capillary force of a one-dimensional profile")
{
    PhysicalParams p;
    p.isothermal = true;
    p.lambda0 = 0.3;
    p.a = 1.0;
    p.eps = 0.08;
    const double w = std::sqrt(2.0) * p.eps;
    auto prof = [w](double x, double) { return std::tanh((x - 0.5) / w); };
    auto err = [&](int n) {
        const Grid g(n, n);
        const ScalarField phi =
            ScalarField::from_function(g, BoundaryCondition::dirichlet(BoundaryData::from_function(g, prof)), prof);
        const ScalarField th(g, BoundaryCondition::homogeneous_dirichlet(g));
        const VectorField f = capillary_force(phi, th, p);
        double ex = 0.0, ey = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 1; i < n; ++i) {
                // -lambda d/dx (phi')^2 = -2 lambda phi' phi''
                const double x = i * g.dx();
                const double t = std::tanh((x - 0.5) / w);
                const double d1 = (1 - t * t) / w;
                const double d2 = -2 * t * d1 / w;
                ex = std::max(ex, std::abs(f.U(i, j) + 2 * p.lambda0 * p.a * d1 * d2));
            }
        for (double v : f.v)
            ey = std::max(ey, std::abs(v));
        CHECK(ey < 1e-10);
        return ex;
    };
    const double e1 = err(32), e2 = err(64);
    CHECK(std::log2(e1 / e2) > 1.7);
}

TEST_CASE("capillary force is dual to the stress pairing")
{
    const Grid g(10, 8, 1.0, 0.9);
    PhysicalParams p;
    p.lambda0 = 0.7;
    p.b = 0.9;
    const BoundaryData bd = BoundaryData::from_function(g, [](double x, double y) { return 0.8 * std::sin(3 * x - y); });
    const ScalarField phi(g, BoundaryCondition::dirichlet(bd), uniform(g.cells(), -1, 1, 5));
    const ScalarField th(g, BoundaryCondition::homogeneous_dirichlet(g), uniform(g.cells(), -0.5, 0.5, 6));
    VectorField w(g);
    w.u = uniform(w.u.size(), -1, 1, 7);
    w.v = uniform(w.v.size(), -1, 1, 8);
    w.apply_no_slip();

    const Padded P(phi), T(th);
    const double dx = g.dx(), dy = g.dy();
    auto gx = [&](int i, int j) { return (P(i, j) - P(i - 1, j)) / dx; };
    auto gy = [&](int i, int j) { return (P(i, j) - P(i, j - 1)) / dy; };
    auto uw = [&](int i, int j) { return (j < 0 || j >= g.ny() || i <= 0 || i >= g.nx()) ? 0.0 : w.U(i, j); };
    auto vw = [&](int i, int j) { return (i < 0 || i >= g.nx() || j <= 0 || j >= g.ny()) ? 0.0 : w.V(i, j); };
    double pair = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double lam = surface_tension(th(i, j), p);
            const double px = 0.5 * (gx(i, j) + gx(i + 1, j)), py = 0.5 * (gy(i, j) + gy(i, j + 1));
            pair += lam * px * px * (uw(i + 1, j) - uw(i, j)) / dx + lam * py * py * (vw(i, j + 1) - vw(i, j)) / dy;
        }
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const double tc = 0.25 * (T(i - 1, j - 1) + T(i, j - 1) + T(i - 1, j) + T(i, j));
            const double lam = surface_tension(tc, p);
            const double px = 0.5 * (gx(i, j - 1) + gx(i, j)), py = 0.5 * (gy(i - 1, j) + gy(i, j));
            pair += lam * px * py * ((uw(i, j) - uw(i, j - 1)) / dy + (vw(i, j) - vw(i - 1, j)) / dx);
        }
    pair *= g.cell_area();
    const double lhs = dot(capillary_force(phi, th, p), w);
    CHECK(std::abs(lhs - pair) <= 1e-10 * std::abs(pair));
}

TEST_CASE("phase step fixed points")
{
    const Grid g(8, 8);
    StepConfig sc;
    PhysicalParams p;
    CHECK(max_diff(step_phase(still(g, 1.0, 0.0), sc, p).values, std::vector<double>(g.cells(), 1.0)) < 1e-12);
    CHECK(step_phase(still(g, 0.0, 0.0), sc, p).max_abs() < 1e-12);
}

TEST_CASE("phase step matches a dense solve")
{
    const Grid g(8, 8);
    PhysicalParams p;
    p.eps = 0.2;
    p.gamma = 1.3;
    StepConfig sc;
    sc.dt = 4e-3;
    sc.helmholtz_tol = 1e-14;
    const BoundaryData bd = BoundaryData::from_function(g, [](double x, double) { return std::tanh(4 * (x - 0.5)); });
    const std::vector<double> phi0 = uniform(g.cells(), -1, 1, 3);
    const SimState s = SimState::initial(g, bd, phi0, std::vector<double>(g.cells(), 0.0));

    std::vector<double> L, b;
    oracle::assemble_dirichlet_laplacian(g, bd, L, b);
    const std::size_t n = g.cells();
    std::vector<double> A(n * n), rhs(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < n; ++k)
            A[r * n + k] = (r == k ? 1.0 : 0.0) - sc.dt * p.gamma * L[r * n + k];
        rhs[r] = phi0[r] + sc.dt * p.gamma * b[r] - sc.dt * p.gamma * double_well(phi0[r], p.eps).wprime;
    }
    const std::vector<double> want = oracle::dense_solve(A, rhs);
    CHECK(max_diff(step_phase(s, sc, p).values, want) <= 1e-9);
}

TEST_CASE("temperature step")
{
    const Grid g(12, 12);
    StepConfig sc;
    PhysicalParams p;
    p.kappa = CoefficientFn::quadratic(1.0, 1.0);
    SimState s = still(g, 1.0, 0.0);
    s.u = vortex(g, 0.2);
    CHECK(step_temperature(s, sc, p).max_abs() == 0.0);

    // positive bump: sign and maximum preserved
    SUBCASE("monotone")
    {
        std::vector<double> th(g.cells());
        for (int j = 0; j < 12; ++j)
            for (int i = 0; i < 12; ++i)
                th[g.index(i, j)] = std::exp(-30 * (std::pow(g.x(i) - 0.5, 2) + std::pow(g.y(j) - 0.4, 2)));
        SimState t = SimState::initial(g, BoundaryData::constant(g, 1.0), std::vector<double>(g.cells(), 1.0), th);
        sc.dt = 1e-3;
        double prev = t.theta.max_abs();
        for (int k = 0; k < 20; ++k) {
            t.theta = step_temperature(t, sc, p);
            CHECK(t.theta.min() >= 0.0);
            CHECK(t.theta.max_abs() <= prev);
            prev = t.theta.max_abs();
        }
    }
}

TEST_CASE("constant diffusivity reduces to a plain implicit heat step")
{
    const Grid g(10, 10);
    PhysicalParams p;
    p.kappa = CoefficientFn::constant(0.4);
    SimState s = SimState::initial(g, BoundaryData::constant(g, 1.0), std::vector<double>(g.cells(), 1.0),
                                   uniform(g.cells(), -1, 1, 4));
    s.u = vortex(g, 0.5);
    StepConfig sc;
    sc.dt = 2e-3;
    sc.helmholtz_tol = 1e-14;
    std::vector<double> L, b;
    oracle::assemble_dirichlet_laplacian(g, BoundaryData::constant(g, 0.0), L, b);
    const std::size_t n = g.cells();
    std::vector<double> A(n * n), rhs(n);
    const ScalarField adv = advect_upwind(s.theta, s.u);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < n; ++k)
            A[r * n + k] = (r == k ? 1.0 : 0.0) - sc.dt * 0.4 * L[r * n + k];
        rhs[r] = s.theta.values[r] - sc.dt * adv.values[r];
    }
    CHECK(max_diff(step_temperature(s, sc, p).values, oracle::dense_solve(A, rhs)) <= 1e-10);
}

TEST_CASE("momentum step: rest state and constant buoyancy")
{
    const Grid g(16, 16);
    StepConfig sc;
    PhysicalParams p;
    const SimState z = still(g, 0.0, 0.0);
    const MomentumUpdate m0 = step_momentum(z, z.phi, z.theta, sc, p);
    CHECK(m0.u.max_abs() == 0.0);
    CHECK(m0.p.max_abs() == 0.0);

    // Constant buoyancy is a discrete gradient; the projection removes it.
    const SimState s = still(g, 1.0, 0.0);
    const ScalarField hot(g, BoundaryCondition::homogeneous_dirichlet(g), std::vector<double>(g.cells(), 0.6));
    const MomentumUpdate m = step_momentum(s, s.phi, hot, sc, p);
    CHECK(m.u.max_abs() <= 1e-10);
    CHECK(m.p.max_abs() > 0.0);
    CHECK(std::abs(m.p.mean()) < 1e-12);
    CHECK(m.p(3, 12) - m.p(3, 2) == doctest::Approx(p.ra * p.g * 0.6 * 10 * g.dy()).epsilon(1e-6));
}

TEST_CASE("viscous decay without forcing")
{
    const Grid g(32, 32);
    PhysicalParams p;
    p.isothermal = true;
    p.ra = 0.0;
    SimState s = still(g, 1.0, 0.0);
    s.u = vortex(g, 0.1);
    StepConfig sc;
    double ke = 0.5 * norm_sq(s.u);
    for (int k = 0; k < 100; ++k) {
        s = advance(s, sc, p);
        const double now = 0.5 * norm_sq(s.u);
        CHECK(now <= ke);
        ke = now;
    }
}

TEST_CASE("projection")
{
    const Grid g(16, 16);
    StepConfig sc;
    sc.dt = 0.01;
    VectorField w(g);
    w.u = uniform(w.u.size(), -1, 1, 11);
    w.v = uniform(w.v.size(), -1, 1, 12);
    w.apply_no_slip();
    const Projection pr = project(w, sc);
    CHECK(divergence(pr.u).max_abs() <= 1e-9);
    CHECK(std::abs(pr.q.mean()) < 1e-12);
    CHECK(pr.u.is_no_slip());

    // idempotent
    const Projection again = project(pr.u, sc);
    CHECK(max_diff(again.u.u, pr.u.u) <= 1e-9);
    CHECK(max_diff(again.u.v, pr.u.v) <= 1e-9);
    CHECK(again.q.max_abs() <= 1e-7);

    // pure gradients are removed
    ScalarField f(g, BoundaryCondition::neumann(g), uniform(g.cells(), -1, 1, 13));
    const double m = f.mean();
    for (double& v : f.values)
        v -= m;
    VectorField gf = gradient(f);
    gf.apply_no_slip();
    CHECK(project(gf, sc).u.max_abs() <= 1e-9);
}

TEST_CASE("equilibrium is a fixed point")
{
    const Grid g(16, 16);
    StepConfig sc;
    PhysicalParams p;
    SimState s = still(g, 1.0, 0.0);
    for (int k = 0; k < 5; ++k) {
        const SimState n = advance(s, sc, p);
        CHECK(max_diff(n.phi.values, s.phi.values) <= 1e-12);
        CHECK(n.u.max_abs() <= 1e-12);
        CHECK(n.theta.max_abs() == 0.0);
        CHECK(n.step == s.step + 1);
        CHECK(n.t == doctest::Approx(s.t + sc.dt));
        s = n;
    }
}

TEST_CASE("isothermal runs keep theta at zero")
{
    RunConfig c;
    c.nx = c.ny = 16;
    c.params.isothermal = true;
    c.ic_phi = Preset::parse("random(0.9,3)");
    c.phi_b = Preset::parse("tanh_x");
    SimState s = make_initial_state(c, 0.0);
    for (int k = 0; k < 50; ++k) {
        s = advance(s, c.step, c.params);
        CHECK(s.theta.max_abs() <= 1e-13);
    }
}

TEST_CASE("time steps are checked against the stability bounds")
{
    const Grid g(32, 32);
    PhysicalParams p;
    StepConfig sc;
    sc.dt = 1.0;
    CHECK_THROWS_AS(sc.validate(g, p, 0.0), ConfigError);
    sc.dt = 0.9 * p.eps * p.eps / (2 * p.gamma) * 1.01;
    p.mu = CoefficientFn::constant(1e-6);
    p.kappa = CoefficientFn::constant(1e-6);
    CHECK_THROWS_WITH_AS(sc.validate(g, p, 0.0), doctest::Contains("reaction"), ConfigError);
    sc.dt = 1e-3;
    p.kappa = CoefficientFn::quadratic(0.1, 1.0);
    CHECK_NOTHROW(sc.validate(g, p, 0.0));
    CHECK_THROWS_WITH_AS(sc.validate(g, p, 2.0), doctest::Contains("thermal"), ConfigError);
    p.kappa = CoefficientFn::constant(0.1);
    p.mu = CoefficientFn::constant(1.0);
    CHECK_THROWS_WITH_AS(sc.validate(g, p, 0.0), doctest::Contains("viscous"), ConfigError);
}

TEST_CASE("two hundred steps converge at first order in time")
{
    RunConfig c;
    c.nx = c.ny = 32;
    c.params.kappa = CoefficientFn::quadratic(0.1, 0.1);
    c.ic_phi = Preset::parse("bubble");
    c.ic_theta = Preset::parse("gaussian(0.3,0.15)");
    c.ic_u = Preset::parse("vortex(0.05)");
    const SimState s0 = make_initial_state(c, 0.0);
    auto run = [&](double dt, int steps) {
        StepConfig sc;
        sc.dt = dt;
        sc.proj_tol = 1e-12;
        sc.helmholtz_tol = 1e-13;
        SimState s = s0;
        for (int k = 0; k < steps; ++k)
            s = advance(s, sc, c.params);
        CHECK(max_principle_report(s).ok);
        return s;
    };
    auto ratio = [](const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& d) {
        return max_diff(a, b) / max_diff(b, d);
    };
    // theta and u over 200 steps; the bubble is absorbed by then, so phi is compared early
    const SimState a = run(1e-3, 200), b = run(5e-4, 400), d = run(2.5e-4, 800);
    for (const double r : {ratio(a.theta.values, b.theta.values, d.theta.values), ratio(a.u.u, b.u.u, d.u.u),
                           ratio(a.u.v, b.u.v, d.u.v)}) {
        CHECK(r >= 1.5);
        CHECK(r <= 2.5);
    }
    const SimState e = run(1e-3, 20), f = run(5e-4, 40), h = run(2.5e-4, 80);
    const double rp = ratio(e.phi.values, f.phi.values, h.phi.values);
    CHECK(rp >= 1.5);
    CHECK(rp <= 2.5);
}
