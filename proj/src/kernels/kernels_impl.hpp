#pragma once

#include <cstddef>

namespace vfem::kernels::detail {

void gemm_scalar(const double* q, std::size_t rows, std::size_t inner, const double* x, double* v,
                 std::size_t cols);
void khatri_rao_scalar(const double* a, std::size_t a_rows, const double* b, std::size_t b_rows,
                       double* out, std::size_t cols);
void scale_lambda_scalar(const double* s, const double* w, std::size_t nq, const double* b,
                         double* out, std::size_t ne);

#if defined(VFEM_HAVE_AVX2)
void gemm_avx2(const double* q, std::size_t rows, std::size_t inner, const double* x, double* v,
               std::size_t cols);
void khatri_rao_avx2(const double* a, std::size_t a_rows, const double* b, std::size_t b_rows,
                     double* out, std::size_t cols);
void scale_lambda_avx2(const double* s, const double* w, std::size_t nq, const double* b,
                       double* out, std::size_t ne);
#endif

} // namespace vfem::kernels::detail
