#include "vfem/gmres.hpp"

#include <cmath>

#include "vfem/error.hpp"

namespace vfem {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace

GmresResult gmres(const LinearOperator& op, std::span<const double> b, std::span<const double> x0,
                  const GmresOptions& opts) {
    const std::size_t n = b.size();
    if (x0.size() != n) throw DimensionError("gmres: initial guess has the wrong length");
    const bool precond = !opts.jacobi_inverse_diagonal.empty();
    if (precond && opts.jacobi_inverse_diagonal.size() != n)
        throw DimensionError("gmres: preconditioner has the wrong length");
    const std::size_t m = std::max<std::size_t>(opts.restart, 1);

    GmresResult res;
    res.x.assign(x0.begin(), x0.end());
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.converged = true;
        return res;
    }
    const double target = opts.tol * bnorm;

    std::vector<double> r(n), w(n), z(n);
    auto true_residual = [&] {
        op(res.x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return norm2(r);
    };
    double beta = true_residual();
    res.residual_norm = beta;
    if (beta <= target) {
        res.converged = true;
        return res;
    }

    std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
    std::vector<double> h((m + 1) * m), cs(m), sn(m), g(m + 1), y(m);
    auto H = [&](std::size_t i, std::size_t j) -> double& { return h[i + j * (m + 1)]; };

    while (res.iterations < opts.max_iters) {
        for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        std::size_t j = 0;
        bool cycle_done = false;
        while (j < m && res.iterations < opts.max_iters && !cycle_done) {
            if (precond) {
                for (std::size_t i = 0; i < n; ++i) z[i] = opts.jacobi_inverse_diagonal[i] * basis[j][i];
                op(z, w);
            } else {
                op(basis[j], w);
            }
            for (std::size_t i = 0; i <= j; ++i) {
                const double hij = dot(w, basis[i]);
                H(i, j) = hij;
                for (std::size_t k = 0; k < n; ++k) w[k] -= hij * basis[i][k];
            }
            const double hnext = norm2(w);
            H(j + 1, j) = hnext;
            for (std::size_t i = 0; i < j; ++i) {
                const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
                H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
                H(i, j) = t;
            }
            const double denom = std::hypot(H(j, j), H(j + 1, j));
            cs[j] = denom == 0.0 ? 1.0 : H(j, j) / denom;
            sn[j] = denom == 0.0 ? 0.0 : H(j + 1, j) / denom;
            H(j, j) = denom;
            H(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            ++res.iterations;
            res.residual_history.push_back(std::abs(g[j + 1]));

            const bool breakdown = hnext < 1e-14 * bnorm;
            if (!breakdown)
                for (std::size_t k = 0; k < n; ++k) basis[j + 1][k] = w[k] / hnext;
            res.breakdown = res.breakdown || breakdown;
            ++j;
            cycle_done = breakdown || std::abs(g[j]) <= target;
        }

        // back substitution on the j x j triangle
        for (std::size_t i = j; i-- > 0;) {
            double s = g[i];
            for (std::size_t k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
            y[i] = H(i, i) == 0.0 ? 0.0 : s / H(i, i);
        }
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t i = 0; i < j; ++i)
            for (std::size_t k = 0; k < n; ++k) z[k] += y[i] * basis[i][k];
        for (std::size_t k = 0; k < n; ++k) res.x[k] += precond ? opts.jacobi_inverse_diagonal[k] * z[k] : z[k];

        beta = true_residual();
        res.residual_norm = beta;
        if (beta <= target) {
            res.converged = true;
            break;
        }
        if (res.breakdown) break;
    }
    return res;
}

} // namespace vfem
