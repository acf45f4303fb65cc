// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cstdint>

#include "kernels_impl.hpp"

namespace vfem::kernels::detail {

namespace {

inline __m256i tail_mask(std::size_t rem) {
    const std::int64_t m0 = rem > 0 ? -1 : 0;
    const std::int64_t m1 = rem > 1 ? -1 : 0;
    const std::int64_t m2 = rem > 2 ? -1 : 0;
    return _mm256_set_epi64x(0, m2, m1, m0);
}

} // namespace

void gemm_avx2(const double* q, std::size_t rows, std::size_t inner, const double* x, double* v,
               std::size_t cols) {
    const std::size_t rem = rows % 4;
    const std::size_t full = rows - rem;
    const __m256i mask = tail_mask(rem);
    for (std::size_t e = 0; e < cols; ++e) {
        double* ve = v + e * rows;
        const double* xe = x + e * inner;
        std::size_t r = 0;
        for (; r + 16 <= full; r += 16) {
            __m256d a0 = _mm256_setzero_pd();
            __m256d a1 = _mm256_setzero_pd();
            __m256d a2 = _mm256_setzero_pd();
            __m256d a3 = _mm256_setzero_pd();
            for (std::size_t k = 0; k < inner; ++k) {
                const __m256d xk = _mm256_broadcast_sd(xe + k);
                const double* qk = q + k * rows + r;
                a0 = _mm256_fmadd_pd(_mm256_loadu_pd(qk), xk, a0);
                a1 = _mm256_fmadd_pd(_mm256_loadu_pd(qk + 4), xk, a1);
                a2 = _mm256_fmadd_pd(_mm256_loadu_pd(qk + 8), xk, a2);
                a3 = _mm256_fmadd_pd(_mm256_loadu_pd(qk + 12), xk, a3);
            }
            _mm256_storeu_pd(ve + r, a0);
            _mm256_storeu_pd(ve + r + 4, a1);
            _mm256_storeu_pd(ve + r + 8, a2);
            _mm256_storeu_pd(ve + r + 12, a3);
        }
        for (; r < full; r += 4) {
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t k = 0; k < inner; ++k)
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(q + k * rows + r), _mm256_broadcast_sd(xe + k), acc);
            _mm256_storeu_pd(ve + r, acc);
        }
        if (rem) {
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t k = 0; k < inner; ++k)
                acc = _mm256_fmadd_pd(_mm256_maskload_pd(q + k * rows + r, mask),
                                      _mm256_broadcast_sd(xe + k), acc);
            _mm256_maskstore_pd(ve + r, mask, acc);
        }
    }
}

void khatri_rao_avx2(const double* a, std::size_t a_rows, const double* b, std::size_t b_rows,
                     double* out, std::size_t cols) {
    const std::size_t rem = b_rows % 4;
    const std::size_t full = b_rows - rem;
    const __m256i mask = tail_mask(rem);
    for (std::size_t j = 0; j < cols; ++j) {
        const double* aj = a + j * a_rows;
        const double* bj = b + j * b_rows;
        double* oj = out + j * a_rows * b_rows;
        for (std::size_t i = 0; i < a_rows; ++i) {
            const __m256d ai = _mm256_broadcast_sd(aj + i);
            double* oi = oj + i * b_rows;
            std::size_t k = 0;
            for (; k < full; k += 4) _mm256_storeu_pd(oi + k, _mm256_mul_pd(ai, _mm256_loadu_pd(bj + k)));
            if (rem)
                _mm256_maskstore_pd(oi + k, mask, _mm256_mul_pd(ai, _mm256_maskload_pd(bj + k, mask)));
        }
    }
}

void scale_lambda_avx2(const double* s, const double* w, std::size_t nq, const double* b,
                       double* out, std::size_t ne) {
    if (nq == 1) {
        const __m256d w0 = _mm256_broadcast_sd(w);
        std::size_t e = 0;
        for (; e + 4 <= ne; e += 4) {
            const __m256d sw = _mm256_mul_pd(_mm256_loadu_pd(s + e), w0);
            _mm256_storeu_pd(out + e, _mm256_mul_pd(sw, _mm256_loadu_pd(b + e)));
        }
        for (; e < ne; ++e) out[e] = (s[e] * w[0]) * b[e];
        return;
    }
    const std::size_t rem = nq % 4;
    const std::size_t full = nq - rem;
    const __m256i mask = tail_mask(rem);
    for (std::size_t e = 0; e < ne; ++e) {
        const __m256d be = _mm256_broadcast_sd(b + e);
        const double* se = s + e * nq;
        double* oe = out + e * nq;
        std::size_t q = 0;
        for (; q < full; q += 4) {
            const __m256d sw = _mm256_mul_pd(_mm256_loadu_pd(se + q), _mm256_loadu_pd(w + q));
            _mm256_storeu_pd(oe + q, _mm256_mul_pd(sw, be));
        }
        if (rem) {
            const __m256d sw = _mm256_mul_pd(_mm256_maskload_pd(se + q, mask), _mm256_maskload_pd(w + q, mask));
            _mm256_maskstore_pd(oe + q, mask, _mm256_mul_pd(sw, be));
        }
    }
}

} // namespace vfem::kernels::detail
