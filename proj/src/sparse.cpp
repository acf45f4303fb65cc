#include "vfem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "vfem/error.hpp"

namespace vfem {

std::int64_t SparsityPattern::find(std::size_t i, std::size_t j) const {
    if (i >= n_rows) return -1;
    const auto first = col_idx.begin() + row_ptr[i];
    const auto last = col_idx.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(j));
    if (it == last || *it != static_cast<std::int32_t>(j)) return -1;
    return it - col_idx.begin();
}

void SparsityPattern::check() const {
    if (row_ptr.size() != n_rows + 1 || row_ptr.front() != 0 ||
        row_ptr.back() != static_cast<std::int64_t>(col_idx.size()))
        throw Error("CSR: row_ptr does not span col_idx");
    for (std::size_t i = 0; i < n_rows; ++i) {
        if (row_ptr[i + 1] < row_ptr[i]) throw Error("CSR: row_ptr decreases at row " + std::to_string(i));
        for (auto k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            if (col_idx[k] < 0 || static_cast<std::size_t>(col_idx[k]) >= n_cols)
                throw Error("CSR: column index out of range in row " + std::to_string(i));
            if (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1])
                throw Error("CSR: columns not strictly increasing in row " + std::to_string(i));
        }
    }
}

CsrMatrix::CsrMatrix(std::shared_ptr<const SparsityPattern> pattern)
    : pattern_(std::move(pattern)), vals_(pattern_->nnz(), 0.0) {}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto k = pattern_->find(i, j);
    return k < 0 ? 0.0 : vals_[static_cast<std::size_t>(k)];
}

void CsrMatrix::add_scaled(const CsrMatrix& other, double alpha) {
    if (other.rows() != rows() || other.cols() != cols()) throw DimensionError("add_scaled: shape mismatch");
    const auto& p = other.pattern();
    if (&p == pattern_.get() || (p.row_ptr == pattern_->row_ptr && p.col_idx == pattern_->col_idx)) {
        for (std::size_t k = 0; k < vals_.size(); ++k) vals_[k] += alpha * other.vals_[k];
        return;
    }
    for (std::size_t i = 0; i < p.n_rows; ++i)
        for (auto k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
            const auto slot = pattern_->find(i, static_cast<std::size_t>(p.col_idx[k]));
            if (slot < 0) throw DimensionError("add_scaled: operand pattern is not contained in the target pattern");
            vals_[static_cast<std::size_t>(slot)] += alpha * other.vals_[static_cast<std::size_t>(k)];
        }
}

void CsrMatrix::scale(double alpha) {
    for (double& v : vals_) v *= alpha;
}

void CsrMatrix::set_zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

void CsrMatrix::set_identity_row(std::size_t i) {
    const auto& p = *pattern_;
    bool has_diag = false;
    for (auto k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
        const bool diag = static_cast<std::size_t>(p.col_idx[k]) == i;
        vals_[static_cast<std::size_t>(k)] = diag ? 1.0 : 0.0;
        has_diag |= diag;
    }
    if (!has_diag) throw DimensionError("set_identity_row: no diagonal entry in row " + std::to_string(i));
}

DenseMatrix CsrMatrix::to_dense() const {
    DenseMatrix d(rows(), cols());
    const auto& p = *pattern_;
    for (std::size_t i = 0; i < p.n_rows; ++i)
        for (auto k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) d(i, static_cast<std::size_t>(p.col_idx[k])) += vals_[k];
    return d;
}

std::pair<std::shared_ptr<const SparsityPattern>, ScatterMap>
build_pattern(std::size_t n_rows, std::size_t n_cols, std::span<const std::int32_t> rows,
              std::span<const std::int32_t> cols) {
    if (rows.size() != cols.size()) throw DimensionError("build_pattern: row/column arrays differ in length");
    const std::size_t nt = rows.size();
    for (std::size_t t = 0; t < nt; ++t)
        if (rows[t] < 0 || static_cast<std::size_t>(rows[t]) >= n_rows || cols[t] < 0 ||
            static_cast<std::size_t>(cols[t]) >= n_cols)
            throw DimensionError("triplet " + std::to_string(t) + " outside the matrix shape");

    // bucket triplets by row, then sort each bucket by column
    std::vector<std::int64_t> start(n_rows + 1, 0);
    for (std::size_t t = 0; t < nt; ++t) ++start[static_cast<std::size_t>(rows[t]) + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<std::int64_t> order(nt);
    {
        std::vector<std::int64_t> fill(start.begin(), start.end() - 1);
        for (std::size_t t = 0; t < nt; ++t) order[static_cast<std::size_t>(fill[rows[t]]++)] = static_cast<std::int64_t>(t);
    }

    auto pattern = std::make_shared<SparsityPattern>();
    pattern->n_rows = n_rows;
    pattern->n_cols = n_cols;
    pattern->row_ptr.assign(n_rows + 1, 0);
    ScatterMap map;
    map.slot.assign(nt, -1);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto b = order.begin() + start[i];
        const auto e = order.begin() + start[i + 1];
        std::stable_sort(b, e, [&](std::int64_t x, std::int64_t y) { return cols[x] < cols[y]; });
        std::int32_t last = -1;
        for (auto it = b; it != e; ++it) {
            const std::int32_t c = cols[*it];
            if (c != last) {
                pattern->col_idx.push_back(c);
                last = c;
            }
            map.slot[static_cast<std::size_t>(*it)] = static_cast<std::int64_t>(pattern->col_idx.size()) - 1;
        }
        pattern->row_ptr[i + 1] = static_cast<std::int64_t>(pattern->col_idx.size());
    }
    pattern->check();
    return {std::move(pattern), std::move(map)};
}

CsrWithMap triplets_to_csr(const TripletBuffer& t) {
    if (t.rows.size() != t.vals.size() || t.cols.size() != t.vals.size())
        throw DimensionError("triplet arrays differ in length");
    auto [pattern, map] = build_pattern(t.n_rows, t.n_cols, t.rows, t.cols);
    CsrWithMap out{CsrMatrix(std::move(pattern)), std::move(map)};
    refill(out.matrix, out.map, t.vals);
    return out;
}

void refill(CsrMatrix& m, const ScatterMap& map, std::span<const double> local_vals) {
    if (local_vals.size() != map.size())
        throw DimensionError("refill: " + std::to_string(local_vals.size()) + " values for a map of " +
                             std::to_string(map.size()));
    m.set_zero();
    auto vals = m.values();
    for (std::size_t k = 0; k < local_vals.size(); ++k) vals[static_cast<std::size_t>(map.slot[k])] += local_vals[k];
}

void scatter_add(CsrMatrix& m, const ScatterMap& map, std::span<const double> local_vals, double alpha) {
    if (local_vals.size() != map.size()) throw DimensionError("scatter_add: length mismatch");
    auto vals = m.values();
    for (std::size_t k = 0; k < local_vals.size(); ++k)
        vals[static_cast<std::size_t>(map.slot[k])] += alpha * local_vals[k];
}

void matvec(const CsrMatrix& m, std::span<const double> x, std::span<double> y) {
    if (x.size() != m.cols() || y.size() != m.rows()) throw DimensionError("matvec: dimension mismatch");
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto v = m.values();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (auto k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[static_cast<std::size_t>(ci[k])];
        y[i] = s;
    }
}

std::vector<double> matvec(const CsrMatrix& m, std::span<const double> x) {
    std::vector<double> y(m.rows());
    matvec(m, x, y);
    return y;
}

double frobenius_norm(const CsrMatrix& m) { return frobenius_norm(m.values()); }

double frobenius_distance(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("frobenius_distance: shape mismatch");
    const auto ra = a.row_ptr(), rb = b.row_ptr();
    const auto ca = a.col_idx(), cb = b.col_idx();
    const auto va = a.values(), vb = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ka = ra[i], kb = rb[i];
        while (ka < ra[i + 1] || kb < rb[i + 1]) {
            double d;
            if (kb >= rb[i + 1] || (ka < ra[i + 1] && ca[ka] < cb[kb])) {
                d = va[ka++];
            } else if (ka >= ra[i + 1] || cb[kb] < ca[ka]) {
                d = -vb[kb++];
            } else {
                d = va[ka++] - vb[kb++];
            }
            s += d * d;
        }
    }
    return std::sqrt(s);
}

double relative_frobenius_difference(const CsrMatrix& a, const CsrMatrix& b) {
    const double scale = std::max(frobenius_norm(a), frobenius_norm(b));
    const double d = frobenius_distance(a, b);
    return scale == 0.0 ? d : d / scale;
}

double asymmetry(const CsrMatrix& m) {
    const auto& p = m.pattern();
    const auto v = m.values();
    double s = 0.0;
    for (std::size_t i = 0; i < p.n_rows; ++i)
        for (auto k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
            const auto j = static_cast<std::size_t>(p.col_idx[k]);
            const auto kt = p.find(j, i);
            const double d = v[k] - (kt < 0 ? 0.0 : v[kt]);
            s += kt < 0 ? 2.0 * d * d : d * d;
        }
    return std::sqrt(s);
}

void write_matrix_market(const CsrMatrix& m, std::ostream& os) {
    const auto& p = m.pattern();
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << p.n_rows << ' ' << p.n_cols << ' ' << p.nnz() << '\n';
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < p.n_rows; ++i)
        for (auto k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
            os << i + 1 << ' ' << p.col_idx[k] + 1 << ' ' << m.values()[k] << '\n';
    os.precision(old);
}

} // namespace vfem
