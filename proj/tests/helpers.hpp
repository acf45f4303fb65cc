#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "vfem/mesh.hpp"
#include "vfem/sparse.hpp"

namespace vfem::test {

inline TriangleMesh reference_triangle() {
    return TriangleMesh({{0, 0}, {1, 0}, {0, 1}}, {0, 1, 2}, 1,
                        {{{0, 1, -1}, 1}, {{1, 2, -1}, 2}, {{2, 0, -1}, 3}});
}

inline std::shared_ptr<const TriangleMesh> shared(TriangleMesh m) {
    return std::make_shared<const TriangleMesh>(std::move(m));
}

inline TriangleMesh promote_if(TriangleMesh m, int order) {
    return order == 2 ? promote_to_p2(m) : m;
}

inline std::shared_ptr<const TriangleMesh> square(int n_div, int order = 1, double jitter = 0.0,
                                                  std::uint64_t seed = 7) {
    TriangleMesh m = generate_structured_unit_square(n_div);
    if (jitter > 0.0) m = jitter_interior_nodes(m, jitter, seed);
    if (order == 2) m = promote_to_p2(m);
    return shared(std::move(m));
}

inline std::vector<double> random_vector(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double sum(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

} // namespace vfem::test
