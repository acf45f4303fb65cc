#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops behind the batched assembly. Each kernel has a
// portable scalar reference and, on x86-64, an AVX2/FMA variant. The variant
// is chosen once at runtime from the CPU features; VFEM_KERNELS=scalar|avx2
// overrides the choice. All matrices are column-major.

namespace vfem::kernels {

enum class Isa { scalar, avx2 };

struct KernelSet {
    Isa isa;
    std::string_view name;

    /// v(:, e) = q * x(:, e) for e < cols. q is rows x inner, x is inner x cols.
    void (*gemm)(const double* q, std::size_t rows, std::size_t inner,
                 const double* x, double* v, std::size_t cols);

    /// out(:, j) = kron(a(:, j), b(:, j)); a is a_rows x cols, b is b_rows x cols.
    void (*khatri_rao)(const double* a, std::size_t a_rows, const double* b,
                       std::size_t b_rows, double* out, std::size_t cols);

    /// out(q, e) = (s(q, e) * w(q)) * b(e). Row scaling precedes column scaling.
    void (*scale_lambda)(const double* s, const double* w, std::size_t nq,
                         const double* b, double* out, std::size_t ne);
};

const KernelSet& scalar_kernels() noexcept;

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelSet* avx2_kernels() noexcept;

/// The set used by the assembly routines.
const KernelSet& active() noexcept;

/// Pin the active set (tests, benchmarks). Requesting avx2 on a machine
/// without it falls back to scalar and returns false.
bool select(Isa isa) noexcept;

/// Restore automatic selection.
void reset_selection() noexcept;

} // namespace vfem::kernels
