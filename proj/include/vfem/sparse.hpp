#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "vfem/dense.hpp"

namespace vfem {

/// Coordinate-format accumulation buffer; duplicates allowed.
struct TripletBuffer {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::int32_t> rows;
    std::vector<std::int32_t> cols;
    std::vector<double> vals;

    TripletBuffer() = default;
    TripletBuffer(std::size_t nr, std::size_t nc) : n_rows(nr), n_cols(nc) {}

    void add(std::int32_t i, std::int32_t j, double v) {
        rows.push_back(i);
        cols.push_back(j);
        vals.push_back(v);
    }
    std::size_t size() const noexcept { return vals.size(); }
};

/// Immutable CSR structure shared by all matrices assembled on it.
struct SparsityPattern {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col_idx;

    std::size_t nnz() const noexcept { return col_idx.size(); }
    /// Slot of (i, j), or -1 when not in the pattern.
    std::int64_t find(std::size_t i, std::size_t j) const;
    /// Throws if row_ptr/col_idx violate the CSR invariants.
    void check() const;
};

/// CSR matrix over a frozen, shareable pattern. Refills change values only.
class CsrMatrix {
public:
    CsrMatrix() = default;
    explicit CsrMatrix(std::shared_ptr<const SparsityPattern> pattern);

    std::size_t rows() const noexcept { return pattern_ ? pattern_->n_rows : 0; }
    std::size_t cols() const noexcept { return pattern_ ? pattern_->n_cols : 0; }
    std::size_t nnz() const noexcept { return vals_.size(); }

    const SparsityPattern& pattern() const { return *pattern_; }
    const std::shared_ptr<const SparsityPattern>& pattern_ptr() const noexcept { return pattern_; }
    std::span<const std::int64_t> row_ptr() const { return pattern_->row_ptr; }
    std::span<const std::int32_t> col_idx() const { return pattern_->col_idx; }
    std::span<double> values() noexcept { return vals_; }
    std::span<const double> values() const noexcept { return vals_; }

    /// Entry (i, j); zero outside the pattern.
    double at(std::size_t i, std::size_t j) const;

    /// this += alpha * other. other's pattern must be contained in this one.
    void add_scaled(const CsrMatrix& other, double alpha);
    void scale(double alpha);
    void set_zero();
    /// Replaces row i by the identity row (pattern must contain (i, i)).
    void set_identity_row(std::size_t i);

    DenseMatrix to_dense() const;

private:
    std::shared_ptr<const SparsityPattern> pattern_;
    std::vector<double> vals_;
};

/// For each local value, its destination slot in a CSR pattern's value array.
struct ScatterMap {
    std::vector<std::int64_t> slot;
    std::size_t size() const noexcept { return slot.size(); }
};

struct CsrWithMap {
    CsrMatrix matrix;
    ScatterMap map;
};

/// Sorts and merges triplets into CSR, recording each triplet's slot.
/// Values are accumulated through refill(), so a later refill with the same
/// local values reproduces them bit for bit.
CsrWithMap triplets_to_csr(const TripletBuffer& t);

/// Pattern and map from (row, col) index pairs alone.
std::pair<std::shared_ptr<const SparsityPattern>, ScatterMap>
build_pattern(std::size_t n_rows, std::size_t n_cols, std::span<const std::int32_t> rows,
              std::span<const std::int32_t> cols);

/// Zeroes m and accumulates local_vals through map, in local order.
void refill(CsrMatrix& m, const ScatterMap& map, std::span<const double> local_vals);

/// As refill() without zeroing first.
void scatter_add(CsrMatrix& m, const ScatterMap& map, std::span<const double> local_vals,
                 double alpha = 1.0);

void matvec(const CsrMatrix& m, std::span<const double> x, std::span<double> y);
std::vector<double> matvec(const CsrMatrix& m, std::span<const double> x);

double frobenius_norm(const CsrMatrix& m);
/// ||a - b||_F for matrices of equal shape, any patterns.
double frobenius_distance(const CsrMatrix& a, const CsrMatrix& b);
/// ||a - b||_F / max(||a||_F, ||b||_F); zero when both vanish.
double relative_frobenius_difference(const CsrMatrix& a, const CsrMatrix& b);
/// ||m - m^T||_F.
double asymmetry(const CsrMatrix& m);

/// MatrixMarket "coordinate real general", 1-based indices.
void write_matrix_market(const CsrMatrix& m, std::ostream& os);

} // namespace vfem
