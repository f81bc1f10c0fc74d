#pragma once

#include "marangoni/coefficients.hpp"
#include "marangoni/fields.hpp"
#include "marangoni/linalg.hpp"

#include <stdexcept>
#include <string>

namespace marangoni {

/// One time level of (u, P, phi, theta). theta0 is kept for the shifted
/// temperature theta - theta0 and the maximum-principle bound.
struct SimState {
    double t = 0.0;
    long step = 0;
    VectorField u;
    ScalarField p;      // homogeneous Neumann, mean zero
    ScalarField phi;    // Dirichlet phi_b
    ScalarField theta;  // homogeneous Dirichlet
    ScalarField theta0;

    /// Zero velocity and pressure; theta0 is a copy of theta.
    static SimState initial(const Grid& grid, const BoundaryData& phi_b, std::vector<double> phi,
                            std::vector<double> theta);
    const Grid& grid() const { return phi.grid; }
};

struct StepConfig {
    double dt = 1e-3;
    double cfl_safety = 0.9;
    double proj_tol = 1e-10;
    double helmholtz_tol = 1e-10;
    AdvectionScheme advection = AdvectionScheme::upwind;
    double tol_mp = 1e-8;

    /// Checks the explicit-diffusion and reaction bounds using coefficient
    /// ranges over |s| <= theta_bound. Throws ConfigError naming the bound.
    void validate(const Grid& grid, const PhysicalParams& params, double theta_bound) const;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a maximum principle is violated beyond the hard threshold.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CflViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// -div(lambda(theta) grad phi (x) grad phi) on interior faces; zero on walls.
VectorField capillary_force(const ScalarField& phi, const ScalarField& theta, const PhysicalParams& params);

/// div(2 mu(theta) D u) with mu interpolated to corners for the shear stress.
VectorField viscous_force(const VectorField& u, const ScalarField& theta, const PhysicalParams& params);

/// (u . grad) u on interior faces.
VectorField momentum_advection(const VectorField& u, AdvectionScheme scheme);

/// Ra g theta e_n on interior v-faces. The constant -Ga g e_n part lives in the pressure.
VectorField buoyancy_force(const ScalarField& theta, const PhysicalParams& params);

/// Implicit Laplacian, explicit convection and reaction.
ScalarField step_phase(const SimState& state, const StepConfig& cfg, const PhysicalParams& params);

/// Advances the Kirchhoff variable with frozen diffusivity and maps back.
ScalarField step_temperature(const SimState& state, const StepConfig& cfg, const PhysicalParams& params);

struct MomentumUpdate {
    VectorField u;
    ScalarField p;
};

MomentumUpdate step_momentum(const SimState& state, const ScalarField& phi_new, const ScalarField& theta_new,
                             const StepConfig& cfg, const PhysicalParams& params);

struct Projection {
    VectorField u;
    ScalarField q;  // pressure increment, mean zero; u = u_star - dt grad q
    SolveStats stats;
};

Projection project(const VectorField& u_star, const StepConfig& cfg);

struct StepReport {
    double phi_excess = 0.0;    // max|phi| - 1
    double theta_excess = 0.0;  // ||theta||_inf - ||theta0||_inf
    double div_linf = 0.0;
    double cfl = 0.0;
    bool soft_violation = false;  // excess beyond tol_mp but within the hard threshold
    std::string message;
};

/// phi -> theta -> (u, p). Throws InvariantViolation beyond 100 tol_mp.
SimState advance(const SimState& state, const StepConfig& cfg, const PhysicalParams& params,
                 StepReport* report = nullptr);

/// dt (max_cells |u|/dx + |v|/dy) with face velocities.
double cfl_number(const VectorField& u, double dt);

}  // namespace marangoni
