#include "kernels_impl.hpp"

namespace vfem::kernels::detail {

void gemm_scalar(const double* q, std::size_t rows, std::size_t inner, const double* x, double* v,
                 std::size_t cols) {
    for (std::size_t e = 0; e < cols; ++e) {
        double* ve = v + e * rows;
        const double* xe = x + e * inner;
        for (std::size_t r = 0; r < rows; ++r) ve[r] = 0.0;
        for (std::size_t k = 0; k < inner; ++k) {
            const double xk = xe[k];
            const double* qk = q + k * rows;
            for (std::size_t r = 0; r < rows; ++r) ve[r] += qk[r] * xk;
        }
    }
}

void khatri_rao_scalar(const double* a, std::size_t a_rows, const double* b, std::size_t b_rows,
                       double* out, std::size_t cols) {
    for (std::size_t j = 0; j < cols; ++j) {
        const double* aj = a + j * a_rows;
        const double* bj = b + j * b_rows;
        double* oj = out + j * a_rows * b_rows;
        for (std::size_t i = 0; i < a_rows; ++i)
            for (std::size_t k = 0; k < b_rows; ++k) oj[i * b_rows + k] = aj[i] * bj[k];
    }
}

void scale_lambda_scalar(const double* s, const double* w, std::size_t nq, const double* b,
                         double* out, std::size_t ne) {
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t q = 0; q < nq; ++q) out[e * nq + q] = (s[e * nq + q] * w[q]) * b[e];
}

} // namespace vfem::kernels::detail
