#include "vfem/dense.hpp"

#include <cmath>

#include "vfem/error.hpp"

namespace vfem {

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ca = 0; ca < a.cols(); ++ca)
        for (std::size_t cb = 0; cb < b.cols(); ++cb)
            for (std::size_t ra = 0; ra < a.rows(); ++ra)
                for (std::size_t rb = 0; rb < b.rows(); ++rb)
                    out(ra * b.rows() + rb, ca * b.cols() + cb) = a(ra, ca) * b(rb, cb);
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out(j, i) = a(i, j);
    return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double bkj = b(k, j);
            for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) += a(i, k) * bkj;
        }
    return out;
}

double frobenius_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace vfem
