#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"
#include "vfem/kernels.hpp"

namespace vfem::kernels {

namespace {

constexpr KernelSet kScalar{Isa::scalar, "scalar", &detail::gemm_scalar, &detail::khatri_rao_scalar,
                            &detail::scale_lambda_scalar};

#if defined(VFEM_HAVE_AVX2)
constexpr KernelSet kAvx2{Isa::avx2, "avx2", &detail::gemm_avx2, &detail::khatri_rao_avx2,
                          &detail::scale_lambda_avx2};
#endif

bool cpu_has_avx2() noexcept {
#if defined(VFEM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelSet* automatic() noexcept {
    const KernelSet* best = avx2_kernels();
    if (const char* env = std::getenv("VFEM_KERNELS")) {
        const std::string_view v(env);
        if (v == "scalar") return &kScalar;
    }
    return best ? best : &kScalar;
}

std::atomic<const KernelSet*> g_active{nullptr};

} // namespace

const KernelSet& scalar_kernels() noexcept { return kScalar; }

const KernelSet* avx2_kernels() noexcept {
#if defined(VFEM_HAVE_AVX2)
    static const bool ok = cpu_has_avx2();
    return ok ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelSet& active() noexcept {
    const KernelSet* k = g_active.load(std::memory_order_acquire);
    if (!k) {
        k = automatic();
        g_active.store(k, std::memory_order_release);
    }
    return *k;
}

bool select(Isa isa) noexcept {
    if (isa == Isa::avx2) {
        if (const KernelSet* k = avx2_kernels()) {
            g_active = k;
            return true;
        }
        g_active = &kScalar;
        return false;
    }
    g_active = &kScalar;
    return true;
}

void reset_selection() noexcept { g_active = automatic(); }

} // namespace vfem::kernels
