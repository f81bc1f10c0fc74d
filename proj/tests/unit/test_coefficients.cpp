#include "doctest.h"
#include "marangoni/coefficients.hpp"
#include "marangoni/linalg.hpp"

#include <cmath>
#include <random>

using namespace marangoni;

TEST_CASE("double well values")
{
    CHECK(double_well(1.0, 1.0).w == 0.0);
    CHECK(double_well(1.0, 1.0).wprime == 0.0);
    CHECK(double_well(-1.0, 1.0).w == 0.0);
    CHECK(double_well(-1.0, 1.0).wprime == 0.0);
    CHECK(double_well(0.0, 1.0).w == 0.25);
    CHECK(double_well(0.0, 1.0).wprime == 0.0);
    const DoubleWell d = double_well(0.5, 0.1);
    CHECK(d.w == doctest::Approx(14.0625).epsilon(1e-14));
    CHECK(d.wprime == doctest::Approx(-37.5).epsilon(1e-14));
}

TEST_CASE("W' and W'' are derivatives of W and W'")
{
    const double h = 1e-5;
    for (double eps : {1.0, 0.3}) {
        for (int k = 0; k <= 40; ++k) {
            const double p = -1.5 + 0.075 * k;
            const double fd = (double_well(p + h, eps).w - double_well(p - h, eps).w) / (2 * h);
            CHECK(std::abs(fd - double_well(p, eps).wprime) <= 1e-6);
            const double fd2 = (double_well(p + h, eps).wprime - double_well(p - h, eps).wprime) / (2 * h);
            CHECK(std::abs(fd2 - double_well_second(p, eps)) <= 1e-5);
        }
    }
}

TEST_CASE("surface tension follows the affine rule")
{
    PhysicalParams p;
    p.lambda0 = 1.0;
    p.a = 2.0;
    p.b = 1.0;
    CHECK(surface_tension(0.0, p) == 2.0);
    CHECK(surface_tension(p.a / p.b, p) == 0.0);
    p.lambda0 = 0.01;
    p.a = 1.0;
    p.b = 0.5;
    CHECK(surface_tension(0.3, p) == doctest::Approx(0.0085).epsilon(1e-14));
    p.isothermal = true;
    CHECK(surface_tension(0.3, p) == doctest::Approx(0.01));
}

TEST_CASE("coefficient families evaluate, differentiate and parse")
{
    const CoefficientFn e = CoefficientFn::exponential(1.5, -0.2);
    CHECK(e.value(2.0) == doctest::Approx(1.5 * std::exp(-0.4)));
    CHECK(e.derivative(2.0) == doctest::Approx(-0.3 * std::exp(-0.4)));
    const CoefficientFn q = CoefficientFn::quadratic(1.0, 0.5);
    CHECK(q.value(2.0) == 3.0);
    CHECK(q.derivative(2.0) == 2.0);
    CHECK(q.second_derivative(7.0) == 1.0);
    CHECK(q.min_on(3.0) == 1.0);
    CHECK(q.max_on(3.0) == 5.5);
    CHECK(e.min_on(1.0) == doctest::Approx(1.5 * std::exp(-0.2)));
    CHECK(e.max_on(1.0) == doctest::Approx(1.5 * std::exp(0.2)));
    CHECK(e.max_abs_derivative_on(1.0) == doctest::Approx(0.3 * std::exp(0.2)));

    CHECK(CoefficientFn::parse("constant:1.0") == CoefficientFn::constant(1.0));
    CHECK(CoefficientFn::parse("exp:1.0,0.2") == CoefficientFn::exponential(1.0, 0.2));
    CHECK(CoefficientFn::parse("quad:1.0,0.5") == CoefficientFn::quadratic(1.0, 0.5));
    CHECK(CoefficientFn::parse(e.to_string()) == e);
    CHECK_THROWS_AS(CoefficientFn::parse("constant:-1"), std::invalid_argument);
    CHECK_THROWS_AS(CoefficientFn::parse("quad:1,-1"), std::invalid_argument);
    CHECK_THROWS_AS(CoefficientFn::parse("cubic:1"), std::invalid_argument);
    CHECK_THROWS_AS(CoefficientFn::parse("exp:1"), std::invalid_argument);
}

TEST_CASE("random coefficients stay positive and mollified values stay in bounds")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> c0(0.01, 5.0), c1(-2.0, 2.0), s(-20.0, 20.0), th(0.01, 3.0);
    for (int k = 0; k < 10000; ++k) {
        const CoefficientFn fns[] = {CoefficientFn::constant(c0(rng)),
                                     CoefficientFn::exponential(c0(rng), c1(rng)),
                                     CoefficientFn::quadratic(c0(rng), std::abs(c1(rng)))};
        const CoefficientFn& f = fns[k % 3];
        const double x = s(rng);
        CHECK(f.value(x) > 0.0);
        if (k % 10 == 0) {
            const MollifiedCoefficient m = mollify(f, th(rng));
            const double y = m(x * m.r());
            CHECK(y >= m.lower());
            CHECK(y <= m.upper());
        }
    }
}

TEST_CASE("cutoff plateau and support")
{
    const Cutoff h(0.2);
    CHECK(h(0.0) == 1.0);
    CHECK(h(6 * 0.2) == 0.0);
    CHECK(h(-6 * 0.2) == 0.0);
    CHECK(h(3 * 0.2) == 1.0);
    CHECK(h(5 * 0.2) == 0.0);
    for (int k = 0; k <= 50; ++k) {
        const double s = 3.0 * 0.2 + 0.4 * k / 50.0;
        CHECK(h(s) >= 0.0);
        CHECK(h(s) <= 1.0);
        CHECK(h(s) == doctest::Approx(h(-s)).epsilon(1e-14));
    }
}

TEST_CASE("tabulated bump CDF agrees with direct quadrature")
{
    const Cutoff h(1.0);
    for (int k = 0; k <= 200; ++k) {
        const double x = -1.0 + 2.0 * k / 200.0 + 1e-3 * std::sin(k);
        // h(s) = G(s + 4) - G(s - 4); on (3, 5) only the second term moves.
        const double s = 4.0 + x;
        CHECK(std::abs(h(s) - (1.0 - Cutoff::bump_cdf_exact(x))) <= 1e-9);
    }
}

TEST_CASE("mollified constant coefficient")
{
    const MollifiedCoefficient m = mollify(CoefficientFn::constant(2.0), 0.9);
    CHECK(m.r() == doctest::Approx(0.3));
    CHECK(m.lower() == 1.0);
    CHECK(m.upper() == 4.0);
    for (int k = 0; k <= 20; ++k) {
        const double s = 0.9 * k / 20.0;
        CHECK(m(s) == 2.0);
        CHECK(m(-s) == 2.0);
        CHECK(m(1.5 + s) == 1.0);
    }
    CHECK_THROWS_AS(mollify(CoefficientFn::constant(2.0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mollify(CoefficientFn::constant(2.0), -1.0), std::invalid_argument);
}

TEST_CASE("mollified coefficient equals the base on the data range")
{
    const CoefficientFn base = CoefficientFn::exponential(0.7, 1.1);
    const double th0 = 0.45;
    const MollifiedCoefficient m = mollify(base, th0);
    for (int k = 0; k < 100; ++k) {
        const double s = -th0 + 2 * th0 * k / 99.0;
        CHECK(std::abs(m(s) - base.value(s)) <= 1e-9);
    }
    CHECK(m(10.0) == m.lower());
}

TEST_CASE("kirchhoff closed forms")
{
    CHECK(kirchhoff(0.0, CoefficientFn::quadratic(1, 3)) == 0.0);
    CHECK(kirchhoff(2.0, CoefficientFn::constant(0.5)) == 1.0);
    CHECK(kirchhoff(1.0, CoefficientFn::quadratic(1, 3)) == doctest::Approx(2.0).epsilon(1e-15));
    const CoefficientFn e = CoefficientFn::exponential(2.0, 0.5);
    CHECK(kirchhoff(1.3, e) == doctest::Approx(2.0 / 0.5 * (std::exp(0.65) - 1.0)).epsilon(1e-14));
    const CoefficientFn tiny = CoefficientFn::exponential(2.0, 1e-12);
    CHECK(kirchhoff(1.3, tiny) == doctest::Approx(2.6).epsilon(1e-11));
    CHECK(kirchhoff(1.3, CoefficientFn::exponential(2.0, 0.0)) == doctest::Approx(2.6));
}

TEST_CASE("inverse kirchhoff")
{
    CHECK(inverse_kirchhoff(0.0, CoefficientFn::exponential(1, 1)) == 0.0);
    CHECK(inverse_kirchhoff(1.0, CoefficientFn::constant(0.5)) == 2.0);
    const CoefficientFn q = CoefficientFn::quadratic(1, 3);
    const double t = inverse_kirchhoff(2.0, q);
    CHECK(std::abs(t - 1.0) <= 1e-12);
    CHECK(std::abs(kirchhoff(t, q) - 2.0) <= 1e-12);

    for (const CoefficientFn& k : {CoefficientFn::quadratic(0.2, 2.0), CoefficientFn::exponential(1.0, 0.3),
                                   CoefficientFn::exponential(0.5, -0.4)}) {
        double prev = kirchhoff(-10.0, k);
        for (int i = 1; i <= 400; ++i) {
            const double th = -10.0 + 0.05 * i;
            const double v = kirchhoff(th, k);
            CHECK(v > prev);
            prev = v;
            CHECK(std::abs(inverse_kirchhoff(v, k) - th) <= 1e-10);
        }
    }
    // Beyond the range of a decaying exponential law.
    CHECK_THROWS(inverse_kirchhoff(100.0, CoefficientFn::exponential(1.0, -1.0)));
}

TEST_CASE("physical parameters are validated")
{
    PhysicalParams p;
    CHECK_NOTHROW(p.validate());
    p.b = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("b must be nonzero"), std::invalid_argument);
    p = PhysicalParams{};
    p.eps = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = PhysicalParams{};
    p.lambda0 = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
