#include "marangoni/steady.hpp"

#include "marangoni/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marangoni {

void SteadySolveConfig::validate() const
{
    if (!(newton_tol > 0.0))
        throw std::invalid_argument("newton_tol must be positive");
    if (max_newton < 1)
        throw std::invalid_argument("max_newton must be at least 1");
    if (!(damping > 0.0) || damping > 1.0 || !(damping_floor > 0.0) || damping_floor > damping)
        throw std::invalid_argument("damping must satisfy 0 < damping_floor <= damping <= 1");
}

namespace {

std::vector<double> residual_vector(const ScalarField& phi, const PhysicalParams& params)
{
    std::vector<double> r = laplacian(phi).values;
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] = -r[k] + double_well(phi.values[k], params.eps).wprime;
    return r;
}

}  // namespace

double steady_residual(const ScalarField& phi, const PhysicalParams& params)
{
    return max_abs(residual_vector(phi, params));
}

SteadyResult solve_steady_phase(const BoundaryData& phi_b, const ScalarField& initial_guess, const Grid& grid,
                                const PhysicalParams& params, const SteadySolveConfig& cfg)
{
    cfg.validate();
    validate_phase_boundary(phi_b);
    if (!phi_b.matches(grid) || initial_guess.grid != grid)
        throw std::invalid_argument("solve_steady_phase: grid mismatch");
    if (!initial_guess.finite())
        throw std::invalid_argument("solve_steady_phase: initial guess is not finite");

    const BoundaryCondition bc = BoundaryCondition::dirichlet(phi_b);
    const ScalarField zero_bc(grid, BoundaryCondition::homogeneous_dirichlet(grid));
    SteadyResult res{ScalarField(grid, bc, initial_guess.values), false, 0, 0.0, {}};

    std::vector<double> r = residual_vector(res.phi, params);
    res.residual = max_abs(r);
    double rnorm = res.residual;
    res.history.push_back(res.residual);

    const std::size_t n = grid.cells();
    std::vector<double> w2(n), delta(n), rhs(n);
    ScalarField probe = zero_bc;
    LinearOperator J = [&](std::span<const double> x, std::span<double> y) {
        probe.values.assign(x.begin(), x.end());
        const ScalarField lx = laplacian(probe);
        for (std::size_t k = 0; k < n; ++k)
            y[k] = -lx.values[k] + w2[k] * x[k];
    };

    SolverOptions opt;
    opt.rel_tol = 1e-12;
    opt.max_iterations = static_cast<int>(20 * n);

    while (res.residual > cfg.newton_tol && res.iterations < cfg.max_newton) {
        bool convex = true;
        for (std::size_t k = 0; k < n; ++k) {
            w2[k] = double_well_second(res.phi.values[k], params.eps);
            convex = convex && w2[k] >= 0.0;
        }
        for (std::size_t k = 0; k < n; ++k)
            rhs[k] = -r[k];
        std::fill(delta.begin(), delta.end(), 0.0);
        if (convex)
            conjugate_gradient(J, rhs, delta, opt);
        else
            minres(J, rhs, delta, opt);

        bool accepted = false;
        for (double step = cfg.damping; step >= cfg.damping_floor; step *= 0.5) {
            ScalarField trial = res.phi;
            for (std::size_t k = 0; k < n; ++k)
                trial.values[k] += step * delta[k];
            std::vector<double> rt = residual_vector(trial, params);
            const double tn = max_abs(rt);
            if (std::isfinite(tn) && tn < rnorm) {
                res.phi = std::move(trial);
                r = std::move(rt);
                rnorm = tn;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
        ++res.iterations;
        res.residual = rnorm;
        res.history.push_back(res.residual);
    }
    res.converged = res.residual <= cfg.newton_tol;
    return res;
}

double distance_to_steady(const ScalarField& phi, const ScalarField& phi_inf)
{
    if (phi.grid != phi_inf.grid)
        throw std::invalid_argument("distance_to_steady: grid mismatch");
    ScalarField d = phi;
    for (std::size_t k = 0; k < d.values.size(); ++k)
        d.values[k] -= phi_inf.values[k];
    const ScalarField la = laplacian(phi), lb = laplacian(phi_inf);
    ScalarField dl = la;
    for (std::size_t k = 0; k < dl.values.size(); ++k)
        dl.values[k] -= lb.values[k];
    return std::sqrt(norm_sq(d)) + std::sqrt(norm_sq(dl));
}

}  // namespace marangoni
