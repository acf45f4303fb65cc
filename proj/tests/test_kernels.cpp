#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "vfem/assembly.hpp"
#include "vfem/kernels.hpp"

using namespace vfem;

namespace {

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(a[i]));
    }
    return den == 0.0 ? num : num / den;
}

struct KernelGuard {
    ~KernelGuard() { kernels::reset_selection(); }
};

} // namespace

TEST_CASE("active kernel set is one of the compiled variants") {
    const auto& k = kernels::active();
    CHECK((k.isa == kernels::Isa::scalar || k.isa == kernels::Isa::avx2));
    KernelGuard g;
    CHECK(kernels::select(kernels::Isa::scalar));
    CHECK(kernels::active().isa == kernels::Isa::scalar);
}

TEST_CASE("SIMD kernels match the scalar reference") {
    const kernels::KernelSet* simd = kernels::avx2_kernels();
    if (!simd) {
        MESSAGE("AVX2 variant unavailable on this machine; equivalence not exercised");
        return;
    }
    const kernels::KernelSet& ref = kernels::scalar_kernels();

    SUBCASE("gemm over odd shapes") {
        for (std::size_t rows : {1u, 3u, 4u, 9u, 36u, 37u})
            for (std::size_t inner : {1u, 2u, 6u, 24u})
                for (std::size_t cols : {1u, 5u, 8u, 17u}) {
                    const auto q = test::random_vector(rows * inner, -1, 1, rows * 100 + inner);
                    const auto x = test::random_vector(inner * cols, -1, 1, cols * 7 + 1);
                    std::vector<double> a(rows * cols), b(rows * cols);
                    ref.gemm(q.data(), rows, inner, x.data(), a.data(), cols);
                    simd->gemm(q.data(), rows, inner, x.data(), b.data(), cols);
                    CHECK(max_rel_diff(a, b) <= 1e-14);
                }
    }

    SUBCASE("khatri_rao is exact") {
        for (std::size_t ar : {1u, 2u, 3u, 6u})
            for (std::size_t br : {1u, 3u, 4u, 7u}) {
                const std::size_t cols = 13;
                const auto a = test::random_vector(ar * cols, -1, 1, ar);
                const auto b = test::random_vector(br * cols, -1, 1, br + 50);
                std::vector<double> x(ar * br * cols), y(ar * br * cols);
                ref.khatri_rao(a.data(), ar, b.data(), br, x.data(), cols);
                simd->khatri_rao(a.data(), ar, b.data(), br, y.data(), cols);
                CHECK(x == y);
            }
    }

    SUBCASE("scale_lambda is exact") {
        for (std::size_t nq : {1u, 3u, 6u, 12u})
            for (std::size_t ne : {1u, 4u, 5u, 33u}) {
                const auto s = test::random_vector(nq * ne, -2, 2, nq);
                const auto w = test::random_vector(nq, 0, 1, ne);
                const auto b = test::random_vector(ne, 0, 3, nq + ne);
                std::vector<double> x(nq * ne), y(nq * ne);
                ref.scale_lambda(s.data(), w.data(), nq, b.data(), x.data(), ne);
                simd->scale_lambda(s.data(), w.data(), nq, b.data(), y.data(), ne);
                CHECK(x == y);
            }
    }
}

TEST_CASE("assembled matrices agree across kernel variants") {
    if (!kernels::avx2_kernels()) return;
    KernelGuard g;
    for (int order : {1, 2}) {
        const auto mesh = test::square(7, order, 0.25, 4);
        const std::vector<Target> targets{Target::mass, Target::conductivity};
        const AssemblyPlan plan = build_plan(mesh, targets);
        const auto coeff = CoefficientField::spatial([](double x, double y, double) { return 1.0 + x * y; });
        for (Target t : targets) {
            kernels::select(kernels::Isa::scalar);
            const CsrMatrix a = assemble(plan, t, coeff, 0.0);
            kernels::select(kernels::Isa::avx2);
            const CsrMatrix b = assemble(plan, t, coeff, 0.0);
            CHECK(relative_frobenius_difference(a, b) <= 1e-14);
        }
    }
}
