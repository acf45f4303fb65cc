#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace vfem {

/// y = A x for a square operator of fixed size.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct GmresOptions {
    double tol = 1e-7;          ///< relative to ||b||_2
    std::size_t restart = 50;
    std::size_t max_iters = 1000;
    /// Optional right preconditioner: inverse diagonal of A, applied entrywise.
    std::vector<double> jacobi_inverse_diagonal;
};

struct GmresResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    bool converged = false;
    bool breakdown = false;
    double residual_norm = 0.0;              ///< true ||b - A x||_2 at exit
    std::vector<double> residual_history;    ///< Arnoldi estimates, one per iteration
};

/// Restarted GMRES: Arnoldi with modified Gram-Schmidt, Givens rotations for
/// the least-squares problem. Never throws on non-convergence; the flag says.
GmresResult gmres(const LinearOperator& op, std::span<const double> b,
                  std::span<const double> x0, const GmresOptions& opts = {});

} // namespace vfem
