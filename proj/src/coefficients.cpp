#include "marangoni/coefficients.hpp"

#include "marangoni/linalg.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace marangoni {

// ---------------------------------------------------------------------------
// CoefficientFn

CoefficientFn CoefficientFn::constant(double c)
{
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("constant coefficient must be positive");
    return {Family::constant, c, 0.0};
}

CoefficientFn CoefficientFn::exponential(double c0, double c1)
{
    if (!(c0 > 0.0) || !std::isfinite(c0) || !std::isfinite(c1))
        throw std::invalid_argument("exponential coefficient needs c0 > 0");
    return {Family::exponential, c0, c1};
}

CoefficientFn CoefficientFn::quadratic(double c0, double c1)
{
    if (!(c0 > 0.0) || !std::isfinite(c0))
        throw std::invalid_argument("quadratic coefficient needs c0 > 0");
    if (!(c1 >= 0.0) || !std::isfinite(c1))
        throw std::invalid_argument("quadratic coefficient needs c1 >= 0 to stay positive");
    return {Family::quadratic, c0, c1};
}

CoefficientFn CoefficientFn::parse(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("coefficient '" + text + "' must look like family:params");
    const std::string family = text.substr(0, colon);
    std::vector<double> args;
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            args.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
                ++used;
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw std::invalid_argument("coefficient '" + text + "': bad number '" + item + "'");
        }
    }
    auto need = [&](std::size_t n) {
        if (args.size() != n)
            throw std::invalid_argument("coefficient '" + text + "': " + family + " takes " + std::to_string(n) +
                                        " parameter(s)");
    };
    if (family == "constant") {
        need(1);
        return constant(args[0]);
    }
    if (family == "exp") {
        need(2);
        return exponential(args[0], args[1]);
    }
    if (family == "quad") {
        need(2);
        return quadratic(args[0], args[1]);
    }
    throw std::invalid_argument("unknown coefficient family '" + family + "' (constant, exp, quad)");
}

double CoefficientFn::value(double s) const
{
    switch (family_) {
    case Family::constant: return c0_;
    case Family::exponential: return c0_ * std::exp(c1_ * s);
    case Family::quadratic: return c0_ + c1_ * s * s;
    }
    return c0_;
}

double CoefficientFn::derivative(double s) const
{
    switch (family_) {
    case Family::constant: return 0.0;
    case Family::exponential: return c0_ * c1_ * std::exp(c1_ * s);
    case Family::quadratic: return 2.0 * c1_ * s;
    }
    return 0.0;
}

double CoefficientFn::second_derivative(double s) const
{
    switch (family_) {
    case Family::constant: return 0.0;
    case Family::exponential: return c0_ * c1_ * c1_ * std::exp(c1_ * s);
    case Family::quadratic: return 2.0 * c1_;
    }
    return 0.0;
}

double CoefficientFn::min_on(double l) const
{
    l = std::abs(l);
    switch (family_) {
    case Family::constant: return c0_;
    case Family::exponential: return std::min(value(-l), value(l));
    case Family::quadratic: return c0_;
    }
    return c0_;
}

double CoefficientFn::max_on(double l) const
{
    l = std::abs(l);
    switch (family_) {
    case Family::constant: return c0_;
    case Family::exponential: return std::max(value(-l), value(l));
    case Family::quadratic: return value(l);
    }
    return c0_;
}

double CoefficientFn::max_abs_derivative_on(double l) const
{
    l = std::abs(l);
    switch (family_) {
    case Family::constant: return 0.0;
    case Family::exponential: return std::abs(c0_ * c1_) * std::exp(std::abs(c1_) * l);
    case Family::quadratic: return 2.0 * c1_ * l;
    }
    return 0.0;
}

std::string CoefficientFn::to_string() const
{
    auto num = [](double x) {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, x);
        return std::string(buf, r.ptr);
    };
    switch (family_) {
    case Family::constant: return "constant:" + num(c0_);
    case Family::exponential: return "exp:" + num(c0_) + "," + num(c1_);
    case Family::quadratic: return "quad:" + num(c0_) + "," + num(c1_);
    }
    return {};
}

void PhysicalParams::validate() const
{
    auto positive = [](double x, const char* what) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::invalid_argument(std::string(what) + " must be positive");
    };
    positive(lambda0, "lambda0");
    positive(a, "a");
    positive(gamma, "gamma");
    positive(eps, "eps");
    if (b == 0.0 || !std::isfinite(b))
        throw std::invalid_argument("b must be nonzero");
    for (double x : {ra, ga, g})
        if (!std::isfinite(x))
            throw std::invalid_argument("ra, ga and g must be finite");
}

// ---------------------------------------------------------------------------
// Potential and surface tension

DoubleWell double_well(double phi, double eps)
{
    const double e2 = eps * eps;
    const double q = phi * phi - 1.0;
    return {q * q / (4.0 * e2), (phi * phi * phi - phi) / e2};
}

double double_well_second(double phi, double eps) { return (3.0 * phi * phi - 1.0) / (eps * eps); }

double surface_tension(double theta, const PhysicalParams& params)
{
    if (params.isothermal)
        return params.lambda0 * params.a;
    return params.lambda0 * (params.a - params.b * theta);
}

// ---------------------------------------------------------------------------
// Cutoff

namespace {

double bump(double x)
{
    if (std::abs(x) >= 1.0)
        return 0.0;
    return std::exp(1.0 / (x * x - 1.0));
}

double bump_integral(double a, double b, unsigned max_depth = 12)
{
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(bump, a, b, max_depth, 1e-13);
}

constexpr int table_size = 1024;

struct BumpTable {
    double mass = 0.0;
    double step = 0.0;
    std::array<double, table_size> cdf{};
    std::array<double, table_size> pdf{};

    BumpTable()
    {
        step = 2.0 / (table_size - 1);
        mass = bump_integral(-1.0, 1.0);
        double acc = 0.0;
        cdf[0] = 0.0;
        for (int k = 1; k < table_size; ++k) {
            acc += bump_integral(-1.0 + (k - 1) * step, -1.0 + k * step, 2);
            cdf[k] = acc / mass;
        }
        cdf[table_size - 1] = 1.0;
        for (int k = 0; k < table_size; ++k)
            pdf[k] = bump(-1.0 + k * step) / mass;
    }

    double operator()(double x) const
    {
        if (x <= -1.0)
            return 0.0;
        if (x >= 1.0)
            return 1.0;
        const double pos = (x + 1.0) / step;
        const int k = std::min(static_cast<int>(pos), table_size - 2);
        const double t = pos - k;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * cdf[k] + h10 * step * pdf[k] + h01 * cdf[k + 1] + h11 * step * pdf[k + 1];
    }
};

const BumpTable& bump_table()
{
    static const BumpTable table;
    return table;
}

}  // namespace

Cutoff::Cutoff(double r) : r_(r)
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument("cutoff radius must be positive");
    bump_table();
}

double Cutoff::operator()(double s) const
{
    const BumpTable& cdf = bump_table();
    return cdf((s + 4.0 * r_) / r_) - cdf((s - 4.0 * r_) / r_);
}

double Cutoff::bump_cdf_exact(double x)
{
    if (x <= -1.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    return bump_integral(-1.0, x) / bump_integral(-1.0, 1.0);
}

MollifiedCoefficient::MollifiedCoefficient(CoefficientFn base, double theta0_linf)
    : base_(base), cutoff_(theta0_linf / 3.0)
{
    const double reach = 5.0 * cutoff_.r();
    lower_ = 0.5 * base_.min_on(reach);
    upper_ = 2.0 * base_.max_on(reach);
}

double MollifiedCoefficient::operator()(double s) const
{
    return (base_.value(s) - lower_) * cutoff_(s) + lower_;
}

MollifiedCoefficient mollify(const CoefficientFn& base, double theta0_linf)
{
    if (!(theta0_linf > 0.0) || !std::isfinite(theta0_linf))
        throw std::invalid_argument("mollify needs ||theta0||_inf > 0 (the zero case is isothermal)");
    return MollifiedCoefficient(base, theta0_linf);
}

// ---------------------------------------------------------------------------
// Kirchhoff transform

double kirchhoff(double theta, const CoefficientFn& kappa)
{
    const double c0 = kappa.c0(), c1 = kappa.c1();
    switch (kappa.family()) {
    case CoefficientFn::Family::constant: return c0 * theta;
    case CoefficientFn::Family::exponential: {
        const double z = c1 * theta;
        if (z == 0.0)
            return c0 * theta;
        return c0 * theta * (std::expm1(z) / z);
    }
    case CoefficientFn::Family::quadratic: return c0 * theta + c1 * theta * theta * theta / 3.0;
    }
    return c0 * theta;
}

double inverse_kirchhoff(double vartheta, const CoefficientFn& kappa)
{
    if (vartheta == 0.0)
        return 0.0;
    if (!std::isfinite(vartheta))
        throw std::domain_error("inverse_kirchhoff: non-finite argument");
    if (kappa.family() == CoefficientFn::Family::constant)
        return vartheta / kappa.c0();

    auto f = [&](double th) { return kirchhoff(th, kappa) - vartheta; };

    // Bracket the root; kirchhoff is strictly increasing and vanishes at 0.
    double lo = 0.0, hi = 0.0;
    double step = std::abs(vartheta) / kappa.value(0.0);
    const double dir = vartheta > 0.0 ? 1.0 : -1.0;
    int expand = 0;
    for (;; step *= 2.0) {
        const double probe = dir * step;
        if (dir * f(probe) >= 0.0) {
            lo = std::min(0.0, probe);
            hi = std::max(0.0, probe);
            break;
        }
        if (++expand > 200 || !std::isfinite(probe))
            throw std::domain_error("inverse_kirchhoff: value outside the range of the transform");
    }

    double x = 0.5 * (lo + hi);
    double dx_old = hi - lo, dx = dx_old;
    double fx = f(x), dfx = kappa.value(x);
    for (int it = 0; it < 200; ++it) {
        const bool newton_leaves = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
        const bool newton_slow = std::abs(2.0 * fx) > std::abs(dx_old * dfx);
        dx_old = dx;
        if (newton_leaves || newton_slow) {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx = fx / dfx;
            x -= dx;
        }
        if (std::abs(dx) <= 1e-13 * std::max(1.0, std::abs(x)))
            return x;
        fx = f(x);
        dfx = kappa.value(x);
        if (fx == 0.0)
            return x;
        if (fx < 0.0)
            lo = x;
        else
            hi = x;
    }
    throw SolverError("inverse_kirchhoff: no convergence in 200 iterations");
}

}  // namespace marangoni
