#ifndef SKEWEIG_SKEW_MATRIX_HPP
#define SKEWEIG_SKEW_MATRIX_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dense.hpp"
#include "errors.hpp"

namespace skeweig {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// General (possibly rectangular) sparse matrix in coordinate form.
/// Duplicates are allowed and mean summation.
struct CooMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Triplet> entries;
};

namespace detail {

// Sums duplicates in input order and drops entries that sum to exactly zero.
inline std::map<std::pair<std::size_t, std::size_t>, double>
accumulate(std::size_t rows, std::size_t cols, std::span<const Triplet> entries) {
    std::map<std::pair<std::size_t, std::size_t>, double> acc;
    for (const auto& t : entries) {
        if (t.row >= rows || t.col >= cols)
            throw IndexOutOfRange("entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                  ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        acc[{t.row, t.col}] += t.value;
    }
    std::erase_if(acc, [](const auto& kv) { return kv.second == 0.0; });
    return acc;
}

}  // namespace detail

/// Real skew-symmetric matrix in CSR form with both triangles stored.
///
/// Every stored A(i,j) = v has a stored partner A(j,i) = -v (bitwise
/// negation) and the diagonal is empty. The object is immutable after
/// construction; the only mutable member is the matvec tally, which is
/// atomic so that concurrent readers may share one matrix.
class SkewSparseMatrix {
public:
    SkewSparseMatrix() : row_ptr_(1, 0) {}

    SkewSparseMatrix(const SkewSparseMatrix& other)
        : n_(other.n_),
          row_ptr_(other.row_ptr_),
          col_idx_(other.col_idx_),
          values_(other.values_),
          matvecs_(other.matvecs_.load()) {}

    SkewSparseMatrix(SkewSparseMatrix&& other) noexcept
        : n_(other.n_),
          row_ptr_(std::move(other.row_ptr_)),
          col_idx_(std::move(other.col_idx_)),
          values_(std::move(other.values_)),
          matvecs_(other.matvecs_.load()) {}

    SkewSparseMatrix& operator=(SkewSparseMatrix other) noexcept {
        n_ = other.n_;
        row_ptr_ = std::move(other.row_ptr_);
        col_idx_ = std::move(other.col_idx_);
        values_ = std::move(other.values_);
        matvecs_.store(other.matvecs_.load());
        return *this;
    }

    /// Builds the matrix from coordinate entries. Duplicates are summed
    /// first; the result must then be exactly skew-symmetric.
    static SkewSparseMatrix from_triplets(std::size_t n, std::span<const Triplet> entries) {
        const auto acc = detail::accumulate(n, n, entries);
        for (const auto& [ij, v] : acc) {
            const auto [i, j] = ij;
            if (i == j)
                throw NotSkewSymmetric("nonzero diagonal entry at (" + std::to_string(i) + "," +
                                       std::to_string(i) + ")");
            const auto it = acc.find({j, i});
            if (it == acc.end() || it->second != -v)
                throw NotSkewSymmetric("A(" + std::to_string(i) + "," + std::to_string(j) +
                                       ") != -A(" + std::to_string(j) + "," + std::to_string(i) +
                                       ")");
        }
        SkewSparseMatrix A;
        A.n_ = n;
        A.row_ptr_.assign(n + 1, 0);
        A.col_idx_.reserve(acc.size());
        A.values_.reserve(acc.size());
        // std::map iterates in (row, col) lexicographic order.
        for (const auto& [ij, v] : acc) {
            ++A.row_ptr_[ij.first + 1];
            A.col_idx_.push_back(ij.second);
            A.values_.push_back(v);
        }
        for (std::size_t i = 0; i < n; ++i) A.row_ptr_[i + 1] += A.row_ptr_[i];
        return A;
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return values_.size(); }
    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    /// y = A x. Each row is summed sequentially in ascending column order,
    /// so the result is bitwise reproducible.
    void apply(std::span<const double> x, std::span<double> y) const {
        if (x.size() != n_ || y.size() != n_)
            throw DimensionMismatch("matvec: expected vectors of length " + std::to_string(n_));
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
            y[i] = s;
        }
        matvecs_.fetch_add(1, std::memory_order_relaxed);
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(n_);
        apply(x, y);
        return y;
    }

    /// Number of products with A performed so far (#Mv).
    std::uint64_t matvec_count() const noexcept { return matvecs_.load(std::memory_order_relaxed); }
    void reset_matvec_count() const noexcept { matvecs_.store(0, std::memory_order_relaxed); }

    double frobenius_norm() const noexcept { return norm2(values_); }

    DenseMatrix to_dense() const {
        DenseMatrix D(n_, n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) D(i, col_idx_[p]) = values_[p];
        return D;
    }

    /// Strictly lower triangle, the storage used by skew-symmetric Matrix Market files.
    std::vector<Triplet> lower_triplets() const {
        std::vector<Triplet> out;
        out.reserve(nnz() / 2);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
                if (col_idx_[p] < i) out.push_back({i, col_idx_[p], values_[p]});
        return out;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
    mutable std::atomic<std::uint64_t> matvecs_{0};
};

inline SkewSparseMatrix from_triplets(std::size_t n, std::span<const Triplet> entries) {
    return SkewSparseMatrix::from_triplets(n, entries);
}

/// (A_o - A_o^T) / 2 for a square sparse A_o. The two mirrored entries are
/// computed once and stored as exact negations of each other.
inline SkewSparseMatrix skew_symmetrize(const CooMatrix& Ao) {
    if (Ao.rows != Ao.cols)
        throw NonSquare("skew_symmetrize: input is " + std::to_string(Ao.rows) + "x" +
                        std::to_string(Ao.cols));
    const auto acc = detail::accumulate(Ao.rows, Ao.cols, Ao.entries);
    std::vector<Triplet> out;
    out.reserve(2 * acc.size());
    for (const auto& [ij, v] : acc) {
        const auto [i, j] = ij;
        if (i == j) continue;
        const auto it = acc.find({j, i});
        const double mirror = it == acc.end() ? 0.0 : it->second;
        if (i < j) {
            const double a = (v - mirror) * 0.5;
            out.push_back({i, j, a});
            out.push_back({j, i, -a});
        } else if (it == acc.end()) {
            // (i,j) in the lower triangle with no upper partner.
            const double a = (0.0 - v) * 0.5;
            out.push_back({j, i, a});
            out.push_back({i, j, -a});
        }
    }
    return SkewSparseMatrix::from_triplets(Ao.rows, out);
}

/// [[0, A_o], [-A_o^T, 0]] of order p + q.
inline SkewSparseMatrix block_embed(const CooMatrix& Ao) {
    const auto acc = detail::accumulate(Ao.rows, Ao.cols, Ao.entries);
    const std::size_t p = Ao.rows;
    std::vector<Triplet> out;
    out.reserve(2 * acc.size());
    for (const auto& [ij, v] : acc) {
        out.push_back({ij.first, p + ij.second, v});
        out.push_back({p + ij.second, ij.first, -v});
    }
    return SkewSparseMatrix::from_triplets(Ao.rows + Ao.cols, out);
}

inline std::vector<double> matvec(const SkewSparseMatrix& A, std::span<const double> x) {
    return A.apply(x);
}

}  // namespace skeweig

#endif  // SKEWEIG_SKEW_MATRIX_HPP
