#pragma once

#include "marangoni/coefficients.hpp"
#include "marangoni/fields.hpp"

#include <vector>

namespace marangoni {

struct SteadySolveConfig {
    double newton_tol = 1e-10;  // on max |-Delta phi + W'(phi)|
    int max_newton = 50;
    double damping = 1.0;       // first trial step
    double damping_floor = 1.0 / 64.0;

    void validate() const;
};

struct SteadyResult {
    ScalarField phi;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;        // max-norm
    std::vector<double> history;  // max-norm residual per accepted iterate, starting with the guess
};

/// max |-Delta phi + W'(phi)| with phi's own boundary data.
double steady_residual(const ScalarField& phi, const PhysicalParams& params);

/// Damped Newton on -Delta phi + W'(phi) = 0 with phi = phi_b on the boundary.
/// The inner solve uses CG when W'' >= 0 everywhere, MINRES otherwise.
/// Non-convergence is reported through the result, not thrown.
SteadyResult solve_steady_phase(const BoundaryData& phi_b, const ScalarField& initial_guess, const Grid& grid,
                                const PhysicalParams& params, const SteadySolveConfig& cfg = {});

/// |phi - phi_inf| + |Delta phi - Delta phi_inf| in discrete L2. Throws
/// std::invalid_argument on grid mismatch.
double distance_to_steady(const ScalarField& phi, const ScalarField& phi_inf);

}  // namespace marangoni
