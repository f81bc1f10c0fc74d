#include "marangoni/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace marangoni {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += a[k] * b[k];
    return s;
}

double max_abs(std::span<const double> a)
{
    double m = 0.0;
    for (double x : a)
        m = std::max(m, std::abs(x));
    return m;
}

namespace {

void remove_mean(std::span<double> x)
{
    if (x.empty())
        return;
    double s = 0.0;
    for (double v : x)
        s += v;
    s /= static_cast<double>(x.size());
    for (double& v : x)
        v -= s;
}

}  // namespace

SolveStats conjugate_gradient(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                              const SolverOptions& opt, std::span<const double> inv_diag)
{
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), q(n);

    std::vector<double> rhs(b.begin(), b.end());
    if (opt.mean_zero) {
        remove_mean(rhs);
        remove_mean(x);
    }
    const double target = std::max(opt.abs_tol, opt.rel_tol * max_abs(rhs));

    A(x, q);
    for (std::size_t k = 0; k < n; ++k)
        r[k] = rhs[k] - q[k];
    if (opt.mean_zero)
        remove_mean(r);

    SolveStats stats;
    stats.residual = max_abs(r);
    if (stats.residual <= target) {
        stats.converged = true;
        return stats;
    }

    auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (inv_diag.empty())
            out = in;
        else
            for (std::size_t k = 0; k < n; ++k)
                out[k] = inv_diag[k] * in[k];
        if (opt.mean_zero)
            remove_mean(out);
    };

    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        A(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0))
            break;  // operator not positive definite on this direction
        const double alpha = rz / pq;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        if (opt.mean_zero)
            remove_mean(r);
        stats.iterations = it;
        stats.residual = max_abs(r);
        if (stats.residual <= target) {
            stats.converged = true;
            break;
        }
        precondition(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k)
            p[k] = z[k] + beta * p[k];
    }
    if (opt.mean_zero)
        remove_mean(x);
    // Recursive residuals drift; report the true one.
    A(x, q);
    for (std::size_t k = 0; k < n; ++k)
        r[k] = rhs[k] - q[k];
    if (opt.mean_zero)
        remove_mean(r);
    stats.residual = max_abs(r);
    stats.converged = stats.residual <= 10.0 * target;
    return stats;
}

SolveStats minres(const LinearOperator& A, std::span<const double> b, std::span<double> x, const SolverOptions& opt)
{
    // Paige & Saunders, unpreconditioned.
    const std::size_t n = b.size();
    std::vector<double> r1(n), r2(n), v(n), w(n), w1(n), w2(n), y(n), ax(n);

    A(x, ax);
    for (std::size_t k = 0; k < n; ++k)
        r1[k] = b[k] - ax[k];
    const double target = std::max(opt.abs_tol, opt.rel_tol * max_abs(b));

    SolveStats stats;
    stats.residual = max_abs(r1);
    if (stats.residual <= target) {
        stats.converged = true;
        return stats;
    }

    y = r1;
    r2 = r1;
    double beta1 = std::sqrt(dot(r1, r1));
    double beta = beta1, oldb = 0.0;
    double dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);

    for (int it = 1; it <= opt.max_iterations; ++it) {
        const double s = 1.0 / beta;
        for (std::size_t k = 0; k < n; ++k)
            v[k] = s * y[k];
        A(v, y);
        if (it >= 2)
            for (std::size_t k = 0; k < n; ++k)
                y[k] -= (beta / oldb) * r1[k];
        const double alfa = dot(v, y);
        for (std::size_t k = 0; k < n; ++k)
            y[k] -= (alfa / beta) * r2[k];
        r1 = r2;
        r2 = y;
        oldb = beta;
        beta = std::sqrt(dot(r2, r2));

        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;

        const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        const double denom = 1.0 / gamma;
        w1 = w2;
        w2 = w;
        for (std::size_t k = 0; k < n; ++k) {
            w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) * denom;
            x[k] += phi * w[k];
        }
        stats.iterations = it;
        // phibar is the 2-norm of the residual; it bounds the max-norm.
        if (phibar <= target || beta == 0.0)
            break;
    }
    A(x, ax);
    for (std::size_t k = 0; k < n; ++k)
        r1[k] = b[k] - ax[k];
    stats.residual = max_abs(r1);
    stats.converged = stats.residual <= 10.0 * target;
    return stats;
}

}  // namespace marangoni
