#pragma once

#include "marangoni/coefficients.hpp"
#include "marangoni/dynamics.hpp"
#include "marangoni/fields.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace marangoni {

/// Interpolation and Poincare constants. Estimated values are empirical lower
/// bounds times a safety factor, not proven constants.
struct SobolevConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
    double cP = 1.0;
    bool estimated = false;
};

struct Thresholds {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double zeta = 0.0;
    double omega = 1.0;
    double mu_lo = 0.0, mu_hi = 0.0;    // over [-theta1, theta1]
    double kap_lo = 0.0, kap_hi = 0.0;  // over [-theta1, theta1]
    SobolevConstants constants;
};

/// Theta1 from the sup-min fixed point, Theta2 by bisection, zeta from both.
/// Throws std::invalid_argument for non-positive constants or omega.
Thresholds compute_thresholds(const PhysicalParams& params, const SobolevConstants& consts, double omega);

/// zeta = mu_lo kap_lo / (4 c3^2 theta2^2).
double zeta_value(double mu_lo, double kap_lo, double c3, double theta2);

/// Maximum observed ratio over `samples` random sine-series fields, times 1.5.
/// Each sample consumes a fixed number of draws, so a longer run extends a shorter one.
SobolevConstants estimate_constants(const Grid& grid, int samples, std::uint64_t seed);

/// Raw maxima before the safety factor, for reporting.
SobolevConstants estimate_constants_raw(const Grid& grid, int samples, std::uint64_t seed);

struct DiagnosticsRecord {
    long step = 0;
    double t = 0.0;
    double u_l2_sq = 0.0;
    double grad_u_l2_sq = 0.0;
    double kinetic_viscous = 0.0;  // 2 int mu(theta) |Du|^2
    double mixing_energy = 0.0;
    double isothermal_energy = 0.0;  // 1/2 |u|^2 + lambda0 a E(phi)
    double total_energy = 0.0;
    double H = 0.0;
    double Y = 0.0;
    double ac_residual_l2 = 0.0;
    double theta_l2_sq = 0.0;
    double grad_theta_l2_sq = 0.0;
    double lap_theta_l2_sq = 0.0;
    double grad_theta_hat_l2_sq = 0.0;
    double theta_linf = 0.0;
    double phi_min = 0.0;
    double phi_max = 0.0;
    double theta_t_l2 = 0.0;
    bool theta_t_valid = false;  // false on the first record (no previous level)
    double div_u_linf = 0.0;
    double energy_law_residual = 0.0;
    double energy_law_tol = 0.0;
};

/// int (1/2 |grad phi|^2 + W(phi)) with face squares averaged to cells.
double mixing_energy(const ScalarField& phi, const PhysicalParams& params);

/// |u|^2 + a lambda0 |grad phi|^2 + 2 a lambda0 int W + zeta |grad theta|^2 + omega |theta|^2.
double total_energy(const SimState& state, const Thresholds& thr, const PhysicalParams& params);

/// 1/2 |u|^2 + lambda0 a E(phi).
double isothermal_energy(const SimState& state, const PhysicalParams& params);

/// |grad u|^2 with the shear derivatives at corners (trapezoid weights).
double velocity_gradient_norm_sq(const VectorField& u);

/// 2 int mu(theta) |D u|^2.
double viscous_dissipation(const VectorField& u, const ScalarField& theta, const PhysicalParams& params);

/// Delta phi - W'(phi) cell by cell.
ScalarField allen_cahn_residual(const ScalarField& phi, const PhysicalParams& params);

struct HigherOrder {
    double H = 0.0;
    double Y = 0.0;
};

/// theta_t = (theta - prev_theta)/dt; pass prev_theta = nullptr for zero.
HigherOrder higher_order_functionals(const SimState& state, const ScalarField* prev_theta, double dt,
                                     const PhysicalParams& params, double eta);

/// All entries except the energy-law pair, which needs the previous record.
DiagnosticsRecord measure(const SimState& state, const ScalarField* prev_theta, double dt, const Thresholds& thr,
                          const PhysicalParams& params, double eta);

/// (E1 - E0)/dt + mu_lo/2 |grad u|^2 + a lambda0 gamma |Delta phi - W'|^2 + zeta kap_lo/2 |Delta theta|^2.
double energy_law_residual(const DiagnosticsRecord& prev, const DiagnosticsRecord& next, double dt,
                           const Thresholds& thr, const PhysicalParams& params);

/// max(10 dt, 10 dx^2) (1 + E_prev).
double energy_law_tolerance(double energy_prev, double dt, double dx);

/// Isothermal form: thermal terms and zeta, omega dropped, kinetic energy halved.
double isothermal_energy_law_residual(const DiagnosticsRecord& prev, const DiagnosticsRecord& next, double dt,
                                      const PhysicalParams& params);

struct MaxPrincipleReport {
    double phi_margin = 0.0;    // 1 - max|phi|
    double theta_margin = 0.0;  // ||theta0|| - ||theta||
    bool ok = false;            // both >= -1e-8
};

MaxPrincipleReport max_principle_report(const SimState& state);

enum class DecayVerdict { decaying, not_yet };

std::string to_string(DecayVerdict v);

/// Quantity watched by the decay monitor.
double decay_quantity(const DiagnosticsRecord& r);

/// Compares trailing and leading window means. Throws std::invalid_argument
/// when the series is shorter than 2 window.
DecayVerdict decay_monitor(const std::vector<DiagnosticsRecord>& series, int window);

// Diagnostics CSV.
std::vector<std::string> diagnostics_columns();
void write_diagnostics_header(std::ostream& os);
void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& r);
/// Throws FormatError naming the line.
std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is);

}  // namespace marangoni
