#pragma once

#include <array>
#include <string>
#include <vector>

namespace marangoni {

/// Strictly positive C^2 coefficient law s -> value(s).
///   constant(c)        c
///   exponential(c0,c1) c0 exp(c1 s)
///   quadratic(c0,c1)   c0 + c1 s^2, c1 >= 0
class CoefficientFn {
public:
    enum class Family { constant, exponential, quadratic };

    static CoefficientFn constant(double c);
    static CoefficientFn exponential(double c0, double c1);
    static CoefficientFn quadratic(double c0, double c1);
    /// Parses "constant:1.0", "exp:1.0,0.2", "quad:1.0,0.5".
    static CoefficientFn parse(const std::string& text);

    Family family() const { return family_; }
    double c0() const { return c0_; }
    double c1() const { return c1_; }

    double value(double s) const;
    double derivative(double s) const;
    double second_derivative(double s) const;

    /// Exact extrema over [-l, l].
    double min_on(double l) const;
    double max_on(double l) const;
    /// max |value'(s)| over [-l, l].
    double max_abs_derivative_on(double l) const;

    std::string to_string() const;
    bool operator==(const CoefficientFn&) const = default;

private:
    CoefficientFn(Family f, double c0, double c1) : family_(f), c0_(c0), c1_(c1) {}
    Family family_;
    double c0_;
    double c1_;
};

struct PhysicalParams {
    double lambda0 = 0.01;  // surface-tension scale
    double a = 1.0;         // capillary coefficient
    double b = 0.5;         // Marangoni coefficient
    double gamma = 1.0;     // relaxation rate
    double eps = 0.1;       // interface width
    double ra = 1.0;
    double ga = 1.0;        // only shifts the pressure
    double g = 1.0;
    CoefficientFn mu = CoefficientFn::constant(0.1);
    CoefficientFn kappa = CoefficientFn::constant(0.1);
    /// Constant surface tension lambda0 * a and theta forced to zero.
    bool isothermal = false;

    /// Throws std::invalid_argument naming the violated hypothesis.
    void validate() const;
};

struct DoubleWell {
    double w;
    double wprime;
};

/// W = (phi^2 - 1)^2 / (4 eps^2), W' = (phi^3 - phi) / eps^2.
DoubleWell double_well(double phi, double eps);
/// W'' = (3 phi^2 - 1) / eps^2.
double double_well_second(double phi, double eps);

/// Eotvos rule lambda0 (a - b theta); lambda0 a in isothermal mode.
double surface_tension(double theta, const PhysicalParams& params);

/// Smooth cutoff h = 1_[-4r,4r] * g_r, with g_r the unit-mass bump of radius r.
/// h = 1 on |s| <= 3r and h = 0 on |s| >= 5r. The bump CDF is tabulated once
/// (adaptive quadrature) and interpolated with cubic Hermite splines.
class Cutoff {
public:
    explicit Cutoff(double r);
    double r() const { return r_; }
    double operator()(double s) const;

    /// Normalized bump CDF on [-1, 1] by direct quadrature, bypassing the table.
    static double bump_cdf_exact(double x);

private:
    double r_;
};

/// mu*(s) = (mu(s) - lower) h(s) + lower with lower/upper = 1/2 inf / 2 sup of mu over |s| <= 5r.
class MollifiedCoefficient {
public:
    MollifiedCoefficient(CoefficientFn base, double theta0_linf);

    const CoefficientFn& base() const { return base_; }
    double r() const { return cutoff_.r(); }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    double cutoff(double s) const { return cutoff_(s); }
    double operator()(double s) const;

private:
    CoefficientFn base_;
    Cutoff cutoff_;
    double lower_;
    double upper_;
};

/// Throws std::invalid_argument for theta0_linf <= 0.
MollifiedCoefficient mollify(const CoefficientFn& base, double theta0_linf);

/// vartheta = int_0^theta kappa(s) ds, closed form.
double kirchhoff(double theta, const CoefficientFn& kappa);

/// Inverse of kirchhoff by safeguarded Newton/bisection to 1e-12.
/// Throws SolverError if 200 iterations do not suffice.
double inverse_kirchhoff(double vartheta, const CoefficientFn& kappa);

}  // namespace marangoni
