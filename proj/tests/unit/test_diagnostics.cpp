#include "doctest.h"
#include "marangoni/cli.hpp"
#include "marangoni/diagnostics.hpp"
#include "marangoni/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace marangoni;

namespace {

SimState still(const Grid& g, double phi, double theta)
{
    return SimState::initial(g, BoundaryData::constant(g, phi), std::vector<double>(g.cells(), phi),
                             std::vector<double>(g.cells(), theta));
}

SimState generic_state(int n, unsigned seed)
{
    RunConfig c;
    c.nx = c.ny = n;
    c.ic_phi = Preset::parse("random(0.8," + std::to_string(seed) + ")");
    c.phi_b = Preset::parse("tanh_y");
    c.ic_theta = Preset::parse("gaussian(0.3,0.2)");
    c.ic_u = Preset::parse("vortex(0.1)");
    SimState s = make_initial_state(c, 0.0);
    s = advance(s, c.step, c.params);
    return s;
}

Thresholds unit_thresholds()
{
    Thresholds t;
    t.zeta = 0.3;
    t.omega = 2.0;
    t.mu_lo = 0.1;
    t.kap_lo = 0.1;
    return t;
}

DiagnosticsRecord row(double q)
{
    DiagnosticsRecord r;
    r.grad_u_l2_sq = q;
    return r;
}

}  // namespace

TEST_CASE("mixing energy of constant states")
{
    const Grid g(8, 8, 2.0, 1.5);
    PhysicalParams p;
    CHECK(mixing_energy(still(g, 1.0, 0).phi, p) == 0.0);
    p.eps = 1.0;
    CHECK(mixing_energy(still(g, 0.0, 0).phi, p) == doctest::Approx(0.25 * 3.0).epsilon(1e-14));
}

TEST_CASE("mixing energy of a tanh interface against 1D quadrature")
{
    PhysicalParams p;
    p.eps = 0.05;
    const double w = std::sqrt(2.0) * p.eps;
    auto prof = [w](double x) { return std::tanh((x - 0.5) / w); };
    // Composite Simpson on a fine 1D grid; the interface spans the unit length in y.
    const int m = 20000;
    double ref = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double x = static_cast<double>(k) / m;
        const double t = prof(x);
        const double d = (1 - t * t) / w;
        const double f = 0.5 * d * d + double_well(t, p.eps).w;
        ref += f * (k == 0 || k == m ? 1.0 : (k % 2 ? 4.0 : 2.0));
    }
    ref /= 3.0 * m;
    CHECK(ref == doctest::Approx(2.0 * std::sqrt(2.0) / (3.0 * p.eps)).epsilon(1e-3));

    const Grid g(64, 16);
    auto f = [&](double x, double) { return prof(x); };
    const ScalarField phi =
        ScalarField::from_function(g, BoundaryCondition::dirichlet(BoundaryData::from_function(g, f)), f);
    CHECK(mixing_energy(phi, p) == doctest::Approx(ref).epsilon(0.02));
}

TEST_CASE("total energy")
{
    const Grid g(8, 8);
    PhysicalParams p;
    const Thresholds t = unit_thresholds();
    CHECK(total_energy(still(g, 1.0, 0.0), t, p) == 0.0);
    p.eps = 1.0;
    p.lambda0 = 0.2;
    p.a = 1.5;
    CHECK(total_energy(still(g, 0.0, 0.0), t, p) == doctest::Approx(2 * 1.5 * 0.2 * 0.25).epsilon(1e-14));
}

TEST_CASE("total energy equals the sum of its recorded parts")
{
    PhysicalParams p;
    const Thresholds t = unit_thresholds();
    for (unsigned seed = 1; seed <= 3; ++seed) {
        const SimState s = generic_state(16, seed);
        const DiagnosticsRecord r = measure(s, nullptr, 1e-3, t, p, 1.0);
        const double parts = r.u_l2_sq + 2.0 * p.a * p.lambda0 * r.mixing_energy + t.zeta * r.grad_theta_l2_sq +
                             t.omega * r.theta_l2_sq;
        CHECK(r.total_energy == doctest::Approx(parts).epsilon(1e-12));
        CHECK(r.u_l2_sq == doctest::Approx(norm_sq(s.u)).epsilon(1e-14));
        CHECK(r.grad_theta_l2_sq == doctest::Approx(grad_norm_sq(s.theta)).epsilon(1e-14));
        CHECK(r.isothermal_energy == doctest::Approx(0.5 * r.u_l2_sq + p.lambda0 * p.a * r.mixing_energy));
        CHECK_FALSE(r.theta_t_valid);
        CHECK(r.theta_t_l2 == 0.0);
    }
}

TEST_CASE("energy law residual and tolerance")
{
    const Grid g(8, 8);
    PhysicalParams p;
    const Thresholds t = unit_thresholds();
    const SimState s = still(g, -1.0, 0.0);
    const DiagnosticsRecord a = measure(s, nullptr, 1e-3, t, p, 1.0);
    const DiagnosticsRecord b = measure(s, &s.theta, 1e-3, t, p, 1.0);
    CHECK(energy_law_residual(a, b, 1e-3, t, p) == 0.0);
    CHECK(isothermal_energy_law_residual(a, b, 1e-3, p) == 0.0);
    CHECK(energy_law_tolerance(2.0, 1e-3, 0.1) == doctest::Approx(0.1 * 3.0));
    CHECK(energy_law_tolerance(0.0, 1e-2, 0.01) == doctest::Approx(0.1));
}

TEST_CASE("higher order functionals")
{
    const Grid g(12, 12);
    PhysicalParams p;
    const SimState eq = still(g, 1.0, 0.0);
    const HigherOrder h = higher_order_functionals(eq, &eq.theta, 1e-3, p, 1.0);
    CHECK(h.H == 0.0);
    CHECK(h.Y == 0.0);

    // u = 0 and theta frozen at theta0: only phase terms remain.
    SimState s = generic_state(12, 4);
    s.u = VectorField(g);
    s.theta = s.theta0;
    const HigherOrder k = higher_order_functionals(s, &s.theta, 1e-3, p, 1.0);
    const double ac = norm_sq(allen_cahn_residual(s.phi, p));
    const double want = 2.0 * p.a * p.lambda0 * mixing_energy(s.phi, p) + ac;
    CHECK(k.H == doctest::Approx(want).epsilon(1e-12));
    CHECK(k.Y == doctest::Approx(ac).epsilon(1e-12));
}

TEST_CASE("thresholds in closed form")
{
    PhysicalParams p;
    p.lambda0 = 1.0;
    p.a = 2.0;
    p.b = 1.0;
    p.gamma = 1.0;
    p.mu = CoefficientFn::constant(1.0);
    p.kappa = CoefficientFn::constant(1.0);
    const Thresholds t = compute_thresholds(p, {1, 1, 1, 1, false}, 1.0);
    CHECK(t.theta1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t.theta2 == t.theta1);
    CHECK(zeta_value(1.0, 1.0, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.zeta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.mu_lo == 1.0);
    CHECK(t.kap_hi == 1.0);

    CHECK_THROWS_AS(compute_thresholds(p, {0, 1, 1, 1, false}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(compute_thresholds(p, {1, 1, 1, 1, false}, 0.0), std::invalid_argument);
}

TEST_CASE("thresholds are monotone in the constants and in b")
{
    PhysicalParams p;
    p.mu = CoefficientFn::exponential(0.1, -0.5);
    p.kappa = CoefficientFn::quadratic(0.1, 0.3);
    const SobolevConstants base{0.8, 1.4, 0.9, 0.26, false};
    const Thresholds t0 = compute_thresholds(p, base, 1.0);
    CHECK(t0.theta2 <= t0.theta1);
    CHECK(t0.theta2 > 0.0);
    CHECK(t0.mu_lo <= t0.mu_hi);
    CHECK(t0.kap_lo <= t0.kap_hi);
    CHECK(t0.zeta == doctest::Approx(zeta_value(t0.mu_lo, t0.kap_lo, base.c3, t0.theta2)).epsilon(1e-14));

    SobolevConstants c = base;
    c.c1 *= 1.2;
    CHECK(compute_thresholds(p, c, 1.0).theta1 < t0.theta1);
    c = base;
    c.c2 *= 1.2;
    CHECK(compute_thresholds(p, c, 1.0).theta1 < t0.theta1);
    PhysicalParams q = p;
    q.b = -2.0 * p.b;
    CHECK(compute_thresholds(q, base, 1.0).theta1 < t0.theta1);

    // the defining relations hold at the computed values
    const double rhs = 1.0 / (2 * base.c1 * base.c2 * std::abs(p.b)) *
                       std::sqrt(p.a * p.gamma * p.mu.min_on(t0.theta1) / (2 * p.lambda0));
    CHECK(t0.theta1 == doctest::Approx(rhs).epsilon(1e-10));
    REQUIRE(t0.theta2 < t0.theta1);
    const double lhs2 = t0.theta2 * p.kappa.max_abs_derivative_on(t0.theta2);
    CHECK(lhs2 == doctest::Approx(t0.kap_lo / (4 * base.c3)).epsilon(1e-10));
}

TEST_CASE("estimated constants")
{
    const Grid g(32, 32);
    const SobolevConstants a = estimate_constants(g, 200, 1);
    const SobolevConstants b = estimate_constants(g, 200, 1);
    CHECK(a.c1 == b.c1);
    CHECK(a.c2 == b.c2);
    CHECK(a.c3 == b.c3);
    CHECK(a.cP == b.cP);
    CHECK(a.estimated);

    const double exact = 1.0 / (std::numbers::pi * std::sqrt(2.0));
    CHECK(estimate_constants_raw(g, 200, 1).cP <= exact);
    CHECK(a.cP >= exact);
    CHECK(a.cP <= 0.5);

    const SobolevConstants big = estimate_constants(g, 2000, 1);
    CHECK(big.c1 >= a.c1);
    CHECK(big.c2 >= a.c2);
    CHECK(big.c3 >= a.c3);
    CHECK(big.cP >= a.cP);
    CHECK_THROWS_AS(estimate_constants(g, 99, 1), std::invalid_argument);
}

TEST_CASE("maximum principle report")
{
    const Grid g(6, 6);
    SimState s = still(g, 0.5, 0.0);
    s.theta0.values[7] = 0.2;
    MaxPrincipleReport r = max_principle_report(s);
    CHECK(r.phi_margin == 0.5);
    CHECK(r.theta_margin == doctest::Approx(0.2));
    CHECK(r.ok);
    s.phi.values[3] = 1.0;
    r = max_principle_report(s);
    CHECK(r.phi_margin == 0.0);
    CHECK(r.ok);
    s.phi.values[3] = -1.0 - 1e-6;
    CHECK_FALSE(max_principle_report(s).ok);
}

TEST_CASE("decay monitor")
{
    std::vector<DiagnosticsRecord> zero(20);
    CHECK(decay_monitor(zero, 5) == DecayVerdict::decaying);
    std::vector<DiagnosticsRecord> up;
    for (int k = 0; k < 20; ++k)
        up.push_back(row(k + 1.0));
    CHECK(decay_monitor(up, 5) == DecayVerdict::not_yet);
    std::vector<DiagnosticsRecord> down;
    for (int k = 0; k < 20; ++k)
        down.push_back(row(std::exp(-k)));
    CHECK(decay_monitor(down, 5) == DecayVerdict::decaying);
    CHECK_THROWS_AS(decay_monitor(up, 11), std::invalid_argument);
    CHECK(to_string(DecayVerdict::not_yet) == "not-yet");

    DiagnosticsRecord r;
    r.grad_u_l2_sq = 1;
    r.ac_residual_l2 = 2;
    r.theta_l2_sq = 3;
    r.grad_theta_l2_sq = 4;
    r.lap_theta_l2_sq = 5;
    CHECK(decay_quantity(r) == 1 + 4 + 3 + 4 + 5);
}

TEST_CASE("diagnostics csv round trip")
{
    PhysicalParams p;
    const SimState s = generic_state(8, 2);
    DiagnosticsRecord r = measure(s, &s.theta0, 1e-3, unit_thresholds(), p, 1.0);
    r.theta_t_valid = true;
    r.energy_law_residual = -0.25;
    std::stringstream ss;
    write_diagnostics_header(ss);
    write_diagnostics_row(ss, r);
    const std::string header = ss.str().substr(0, ss.str().find('\n'));
    CHECK(header.rfind("step,t,u_l2_sq", 0) == 0);
    CHECK(std::count(header.begin(), header.end(), ',') + 1 ==
          static_cast<long>(diagnostics_columns().size()));
    const std::vector<DiagnosticsRecord> back = read_diagnostics_csv(ss);
    REQUIRE(back.size() == 1);
    CHECK(back[0].total_energy == r.total_energy);
    CHECK(back[0].lap_theta_l2_sq == r.lap_theta_l2_sq);
    CHECK(back[0].theta_t_valid);
    CHECK(back[0].step == r.step);

    std::istringstream bad("step,t\n1,2\n");
    CHECK_THROWS_AS(read_diagnostics_csv(bad), FormatError);
}
