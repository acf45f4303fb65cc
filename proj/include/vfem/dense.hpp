#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vfem {

/// Column-major dense matrix. Column j occupies data()[j*rows() .. (j+1)*rows()).
///
/// Every vectorization in the library (vec of element matrices, Khatri-Rao
/// columns, tensor columns) follows this convention, so that
/// vec(J A J^T) = (J kron J) vec(A) holds as written.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i + j * rows_]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i + j * rows_]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    void resize(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, 0.0);
    }
    void fill(double v) { data_.assign(data_.size(), v); }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Kronecker product with the first factor's indices slowest.
DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

/// Plain triple-loop product, used for small matrices and as a test reference.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(std::span<const double> v);

} // namespace vfem
