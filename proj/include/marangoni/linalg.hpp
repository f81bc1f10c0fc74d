#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace marangoni {

/// y = A x, matrix-free.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct SolverOptions {
    double rel_tol = 1e-10;  // relative to max |b|
    double abs_tol = 0.0;    // stop when max |r| <= max(abs_tol, rel_tol * max |b|)
    int max_iterations = 1000;
    /// Keep iterates in the mean-zero subspace (singular Neumann operators).
    bool mean_zero = false;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  // max-norm of the final residual
    bool converged = false;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Preconditioned conjugate gradient for symmetric positive (semi-)definite A.
/// `inv_diag` is an optional Jacobi preconditioner. x holds the initial guess.
/// Reductions run in a fixed order so results are bit-reproducible.
SolveStats conjugate_gradient(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                              const SolverOptions& opt, std::span<const double> inv_diag = {});

/// MINRES for symmetric, possibly indefinite A.
SolveStats minres(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                  const SolverOptions& opt);

double dot(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> a);

}  // namespace marangoni
