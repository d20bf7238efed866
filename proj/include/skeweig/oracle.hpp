#ifndef SKEWEIG_ORACLE_HPP
#define SKEWEIG_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "bidiag.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "skew_matrix.hpp"

namespace skeweig::oracle {

/// Structured SVD of a dense skew-symmetric matrix:
/// A = sum_j sigma_j (u_j v_j^T - v_j u_j^T), A v_j = sigma_j u_j, A u_j = -sigma_j v_j.
/// [U V N] is orthogonal, N spans the null space.
struct DenseSkewEig {
    std::vector<double> sigmas;  // nonzero, descending
    DenseMatrix U;
    DenseMatrix V;
    DenseMatrix N;

    DenseMatrix reconstruct() const {
        const std::size_t n = U.rows();
        DenseMatrix A(n, n);
        for (std::size_t j = 0; j < sigmas.size(); ++j)
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t r = 0; r < n; ++r)
                    A(r, c) += sigmas[j] * (U(r, j) * V(c, j) - V(r, j) * U(c, j));
        return A;
    }
};

namespace detail {

inline void project_out(std::span<double> x, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) axpy(-dot(b, x), b, x);
}

// Unit vector orthogonal to `basis`, or an empty vector when the basis spans everything.
template <class Rng>
std::vector<double> random_complement(std::size_t n, const std::vector<std::vector<double>>& basis, Rng& rng) {
    if (basis.size() >= n) return {};
    std::normal_distribution<double> gauss;
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<double> x(n);
        for (double& v : x) v = gauss(rng);
        project_out(x, basis);
        const double nrm = norm2(x);
        if (nrm > 1e-6) {
            scale(1.0 / nrm, x);
            return x;
        }
    }
    return {};
}

inline std::vector<double> apply_dense(const DenseMatrix& A, std::span<const double> x) {
    std::vector<double> y(A.rows(), 0.0);
    for (std::size_t c = 0; c < A.cols(); ++c) axpy(x[c], A.col(c), y);
    return y;
}

}  // namespace detail

/// Full decomposition by running the skew-symmetric Lanczos bidiagonalization
/// with complete reorthogonalization until the space is exhausted, continuing
/// through breakdowns with random orthogonal vectors, then taking the SVD of
/// the resulting bidiagonal.
inline DenseSkewEig dense_decompose(const DenseMatrix& A) {
    const std::size_t n = A.rows();
    if (A.cols() != n) throw NonSquare("dense_decompose: matrix is not square");
    if (n > 400) throw InvalidOptions("dense_decompose: n > 400");
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i <= j; ++i)
            if (A(i, j) != -A(j, i)) throw NotSkewSymmetric("dense_decompose: A^T != -A");

    DenseSkewEig out;
    out.U = DenseMatrix(n, 0);
    out.V = DenseMatrix(n, 0);
    out.N = DenseMatrix::identity(n);
    const double fro = frobenius_norm(A);
    if (n == 0 || fro == 0.0) return out;

    const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * fro;
    std::mt19937_64 rng(20240601);
    std::vector<std::vector<double>> P, Q, all;
    std::vector<double> betas, gammas;
    Q.push_back(std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n))));
    all.push_back(Q.back());

    for (std::size_t j = 0; j < n; ++j) {
        auto s = detail::apply_dense(A, Q[j]);
        if (j > 0) axpy(-gammas[j - 1], P[j - 1], s);
        detail::project_out(s, all);
        double beta = norm2(s);
        std::vector<double> p;
        if (beta > tiny) {
            scale(1.0 / beta, s);
            p = std::move(s);
        } else {
            beta = 0.0;
            p = detail::random_complement(n, all, rng);
        }
        betas.push_back(beta);
        if (p.empty()) {
            P.emplace_back(n, 0.0);
            gammas.push_back(0.0);
            break;
        }
        P.push_back(p);
        all.push_back(p);

        auto t = detail::apply_dense(A, p);
        scale(-1.0, t);
        axpy(-beta, Q[j], t);
        detail::project_out(t, all);
        double gamma = norm2(t);
        std::vector<double> q;
        if (gamma > tiny) {
            scale(1.0 / gamma, t);
            q = std::move(t);
        } else {
            gamma = 0.0;
            q = detail::random_complement(n, all, rng);
        }
        gammas.push_back(gamma);
        if (q.empty()) break;
        Q.push_back(q);
        all.push_back(q);
    }

    BidiagonalMatrix B;
    B.betas = betas;
    B.gammas.assign(gammas.begin(), gammas.begin() + static_cast<std::ptrdiff_t>(betas.size() - 1));
    const BidiagonalSVD svd = skeweig::svd(B);
    const double zero = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * svd.thetas.front();

    std::size_t r = 0;
    while (r < svd.thetas.size() && svd.thetas[r] > zero) ++r;
    out.sigmas.assign(svd.thetas.begin(), svd.thetas.begin() + static_cast<std::ptrdiff_t>(r));
    out.U = DenseMatrix(n, r);
    out.V = DenseMatrix(n, r);
    std::vector<std::vector<double>> span_uv;
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t l = 0; l < B.size(); ++l) {
            axpy(svd.C(l, j), P[l], out.U.col(j));
            axpy(svd.D(l, j), Q[l], out.V.col(j));
        }
        scale(1.0 / norm2(out.U.col(j)), out.U.col(j));
        scale(1.0 / norm2(out.V.col(j)), out.V.col(j));
        span_uv.emplace_back(out.U.col(j).begin(), out.U.col(j).end());
        span_uv.emplace_back(out.V.col(j).begin(), out.V.col(j).end());
    }

    // Null block: complete [U V] with coordinate vectors.
    std::vector<std::vector<double>> null;
    for (std::size_t e = 0; e < n && span_uv.size() < n; ++e) {
        std::vector<double> x(n, 0.0);
        x[e] = 1.0;
        detail::project_out(x, span_uv);
        const double nrm = norm2(x);
        if (nrm < 0.5) continue;
        scale(1.0 / nrm, x);
        span_uv.push_back(x);
        null.push_back(std::move(x));
    }
    out.N = DenseMatrix(n, null.size());
    for (std::size_t j = 0; j < null.size(); ++j) std::copy(null[j].begin(), null[j].end(), out.N.col(j).begin());
    return out;
}

inline DenseSkewEig dense_decompose(const SkewSparseMatrix& A) {
    if (A.n() > 400) throw InvalidOptions("dense_decompose: n > 400");
    return dense_decompose(A.to_dense());
}

/// Singular values of a general dense matrix by one-sided Jacobi rotations,
/// descending.
inline std::vector<double> jacobi_singular_values(const DenseMatrix& M) {
    DenseMatrix W = M.rows() >= M.cols() ? M : M.transpose();
    const std::size_t cols = W.cols();
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool rotated = false;
        for (std::size_t a = 0; a + 1 < cols; ++a)
            for (std::size_t b = a + 1; b < cols; ++b) {
                const double alpha = dot(W.col(a), W.col(a));
                const double beta = dot(W.col(b), W.col(b));
                const double gamma = dot(W.col(a), W.col(b));
                if (std::abs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                rotate(W.col(a), W.col(b), c, -c * t);
            }
        if (!rotated) break;
    }
    std::vector<double> sv(cols);
    for (std::size_t j = 0; j < cols; ++j) sv[j] = norm2(W.col(j));
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

/// (max_{i!=j} |p_i^T p_j|, max_{i!=j} |q_i^T q_j|, max_{i,j} |p_i^T q_j|).
inline std::array<double, 3> measure_orthogonality(const DenseMatrix& P, const DenseMatrix& Q) {
    if (P.rows() != Q.rows()) throw DimensionMismatch("measure_orthogonality: row counts differ");
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < P.cols(); ++j)
        for (std::size_t i = 0; i < j; ++i) out[0] = std::max(out[0], std::abs(dot(P.col(i), P.col(j))));
    for (std::size_t j = 0; j < Q.cols(); ++j)
        for (std::size_t i = 0; i < j; ++i) out[1] = std::max(out[1], std::abs(dot(Q.col(i), Q.col(j))));
    for (std::size_t j = 0; j < Q.cols(); ++j)
        for (std::size_t i = 0; i < P.cols(); ++i) out[2] = std::max(out[2], std::abs(dot(P.col(i), Q.col(j))));
    return out;
}

/// Orthonormal basis of the column span (modified Gram-Schmidt, two passes).
inline DenseMatrix orthonormalize(const DenseMatrix& X) {
    std::vector<std::vector<double>> basis;
    for (std::size_t j = 0; j < X.cols(); ++j) {
        std::vector<double> x(X.col(j).begin(), X.col(j).end());
        const double before = norm2(x);
        detail::project_out(x, basis);
        const double nrm = norm2(x);
        if (nrm <= 1e-10 * before || nrm == 0.0) continue;
        scale(1.0 / nrm, x);
        basis.push_back(std::move(x));
    }
    DenseMatrix out(X.rows(), basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) std::copy(basis[j].begin(), basis[j].end(), out.col(j).begin());
    return out;
}

/// Sine of the largest principal angle between span(X) and span(Y).
/// When the dimensions differ this measures how far span(X) is from lying in span(Y).
inline double subspace_sine(const DenseMatrix& X, const DenseMatrix& Y) {
    if (X.rows() != Y.rows()) throw DimensionMismatch("subspace_sine: row counts differ");
    const DenseMatrix Xo = orthonormalize(X);
    const DenseMatrix Yo = orthonormalize(Y);
    DenseMatrix R = Xo;
    for (std::size_t j = 0; j < R.cols(); ++j)
        for (std::size_t i = 0; i < Yo.cols(); ++i) axpy(-dot(Yo.col(i), R.col(j)), Yo.col(i), R.col(j));
    if (R.cols() == 0) return 0.0;
    return std::min(1.0, jacobi_singular_values(R).front());
}

}  // namespace skeweig::oracle

#endif  // SKEWEIG_ORACLE_HPP
