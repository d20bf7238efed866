#ifndef SKEWEIG_DENSE_HPP
#define SKEWEIG_DENSE_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"

namespace skeweig {

/// Small column-major dense matrix. Used for Lanczos bases (n x m, m small)
/// and for the projected bidiagonal problem (m x m).
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept {
        assert(i < rows_ && j < cols_);
        return data_[j * rows_ + i];
    }
    double operator()(std::size_t i, std::size_t j) const noexcept {
        assert(i < rows_ && j < cols_);
        return data_[j * rows_ + i];
    }

    std::span<double> col(std::size_t j) noexcept {
        assert(j < cols_);
        return {data_.data() + j * rows_, rows_};
    }
    std::span<const double> col(std::size_t j) const noexcept {
        assert(j < cols_);
        return {data_.data() + j * rows_, rows_};
    }

    std::span<const double> data() const noexcept { return data_; }

    /// Copy of the leading `r x c` block.
    DenseMatrix block(std::size_t r, std::size_t c) const {
        assert(r <= rows_ && c <= cols_);
        DenseMatrix out(r, c);
        for (std::size_t j = 0; j < c; ++j)
            std::copy_n(data_.data() + j * rows_, r, out.data_.data() + j * r);
        return out;
    }

    DenseMatrix transpose() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t j = 0; j < cols_; ++j)
            for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
    assert(x.size() == y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) noexcept { return std::sqrt(dot(x, x)); }

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(double a, std::span<double> x) noexcept {
    for (double& v : x) v *= a;
}

/// Apply the plane rotation [c s; -s c] to the pair (x, y) in place:
/// x <- c x + s y, y <- -s x + c y.
inline void rotate(std::span<double> x, std::span<double> y, double c, double s) noexcept {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = c * xi + s * yi;
        y[i] = -s * xi + c * yi;
    }
}

/// C = A * B
inline DenseMatrix multiply(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.cols() != B.rows()) throw DimensionMismatch("multiply: inner dimensions differ");
    DenseMatrix C(A.rows(), B.cols());
    for (std::size_t j = 0; j < B.cols(); ++j)
        for (std::size_t l = 0; l < A.cols(); ++l) {
            const double b = B(l, j);
            if (b == 0.0) continue;
            axpy(b, A.col(l), C.col(j));
        }
    return C;
}

/// C = A^T * B
inline DenseMatrix multiply_transposed(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.rows() != B.rows()) throw DimensionMismatch("multiply_transposed: row counts differ");
    DenseMatrix C(A.cols(), B.cols());
    for (std::size_t j = 0; j < B.cols(); ++j)
        for (std::size_t i = 0; i < A.cols(); ++i) C(i, j) = dot(A.col(i), B.col(j));
    return C;
}

inline double frobenius_norm(const DenseMatrix& A) noexcept { return norm2(A.data()); }

/// max_ij |A_ij - B_ij|
inline double max_abs_difference(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw DimensionMismatch("max_abs_difference: shapes differ");
    double m = 0.0;
    const auto a = A.data();
    const auto b = B.data();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace skeweig

#endif  // SKEWEIG_DENSE_HPP
