#ifndef SKEWEIG_BIDIAG_HPP
#define SKEWEIG_BIDIAG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dense.hpp"
#include "errors.hpp"

namespace skeweig {

/// Upper bidiagonal matrix: betas on the diagonal, gammas on the superdiagonal.
struct BidiagonalMatrix {
    std::vector<double> betas;
    std::vector<double> gammas;  // size() - 1 entries (empty for size() <= 1)

    std::size_t size() const noexcept { return betas.size(); }

    DenseMatrix to_dense() const {
        const std::size_t m = size();
        DenseMatrix B(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            B(i, i) = betas[i];
            if (i + 1 < m) B(i, i + 1) = gammas[i];
        }
        return B;
    }
};

/// B = C diag(thetas) D^T with thetas in decreasing order.
struct BidiagonalSVD {
    std::vector<double> thetas;
    DenseMatrix C;
    DenseMatrix D;
};

/// Output of a sequence of implicit-shift sweeps: B_swept = C^T B D.
struct SweepResult {
    BidiagonalMatrix B;
    DenseMatrix C;
    DenseMatrix D;
};

namespace detail {

struct Givens {
    double c;
    double s;
    double r;
};

// [c s; -s c] [f; g] = [r; 0]
inline Givens givens(double f, double g) noexcept {
    if (g == 0.0) return {1.0, 0.0, f};
    if (f == 0.0) return {0.0, 1.0, g};
    const double r = std::hypot(f, g);
    return {f / r, g / r, r};
}

inline void rotate_cols(DenseMatrix* M, std::size_t a, std::size_t b, double c, double s) noexcept {
    if (M) rotate(M->col(a), M->col(b), c, s);
}

/// One Golub-Kahan implicit QR sweep on the block [lo, hi] of the bidiagonal
/// (d, e), equivalent to a QR step on B^T B with shift `shift2`. Left rotations
/// accumulate into U, right rotations into V; either may be null.
inline void shifted_sweep(std::span<double> d, std::span<double> e, std::size_t lo, std::size_t hi,
                          double shift2, DenseMatrix* U, DenseMatrix* V) noexcept {
    double y = d[lo] * d[lo] - shift2;
    double z = d[lo] * e[lo];
    for (std::size_t k = lo; k < hi; ++k) {
        const auto right = givens(y, z);
        if (k > lo) e[k - 1] = right.r;
        const double dk = d[k];
        const double ek = e[k];
        const double dk1 = d[k + 1];
        d[k] = right.c * dk + right.s * ek;
        e[k] = -right.s * dk + right.c * ek;
        const double bulge = right.s * dk1;
        d[k + 1] = right.c * dk1;
        rotate_cols(V, k, k + 1, right.c, right.s);

        const auto left = givens(d[k], bulge);
        d[k] = left.r;
        const double ek2 = e[k];
        const double dk12 = d[k + 1];
        e[k] = left.c * ek2 + left.s * dk12;
        d[k + 1] = -left.s * ek2 + left.c * dk12;
        rotate_cols(U, k, k + 1, left.c, left.s);

        if (k + 1 < hi) {
            y = e[k];
            z = left.s * e[k + 1];
            e[k + 1] = left.c * e[k + 1];
        }
    }
}

/// Demmel-Kahan zero-shift sweep on [lo, hi]; keeps high relative accuracy
/// when the shift would be negligible.
inline void zero_shift_sweep(std::span<double> d, std::span<double> e, std::size_t lo, std::size_t hi,
                             DenseMatrix* U, DenseMatrix* V) noexcept {
    double cs = 1.0;
    double oldcs = 1.0;
    double oldsn = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const auto g1 = givens(d[i] * cs, e[i]);
        cs = g1.c;
        const double sn = g1.s;
        if (i > lo) e[i - 1] = oldsn * g1.r;
        const auto g2 = givens(oldcs * g1.r, d[i + 1] * sn);
        oldcs = g2.c;
        oldsn = g2.s;
        d[i] = g2.r;
        rotate_cols(V, i, i + 1, cs, sn);
        rotate_cols(U, i, i + 1, oldcs, oldsn);
    }
    const double h = d[hi] * cs;
    d[hi] = h * oldcs;
    e[hi - 1] = h * oldsn;
}

/// Eigenvalue of the trailing 2x2 block of B^T B (restricted to [lo, hi])
/// closer to its last diagonal entry.
inline double wilkinson_shift(std::span<const double> d, std::span<const double> e, std::size_t lo,
                              std::size_t hi) noexcept {
    const double da = d[hi - 1];
    const double db = d[hi];
    const double fa = hi - 1 > lo ? e[hi - 2] : 0.0;
    const double fb = e[hi - 1];
    const double ta = da * da + fa * fa;
    const double tb = db * db + fb * fb;
    const double tab = da * fb;
    const double dt = (ta - tb) / 2.0;
    const double h = std::hypot(dt, tab);
    if (h == 0.0) return tb;
    return dt >= 0.0 ? tb - (tab * tab) / (dt + h) : tb + (tab * tab) / (-dt + h);
}

// d[i] == 0 with i < hi: rotate the lone superdiagonal entry of row i out
// through rows i+1..hi.
inline void chase_zero_diagonal_row(std::span<double> d, std::span<double> e, std::size_t i, std::size_t hi,
                                    DenseMatrix* U) noexcept {
    double f = e[i];
    e[i] = 0.0;
    for (std::size_t j = i + 1; j <= hi && f != 0.0; ++j) {
        const auto g = givens(d[j], f);
        d[j] = g.r;
        if (j < hi) {
            f = -g.s * e[j];
            e[j] = g.c * e[j];
        }
        rotate_cols(U, j, i, g.c, g.s);
    }
}

// d[hi] == 0: rotate the superdiagonal entry above it out through columns hi-1..lo.
inline void chase_zero_diagonal_col(std::span<double> d, std::span<double> e, std::size_t lo, std::size_t hi,
                                    DenseMatrix* V) noexcept {
    double f = e[hi - 1];
    e[hi - 1] = 0.0;
    for (std::size_t j = hi; j-- > lo && f != 0.0;) {
        const auto g = givens(d[j], f);
        d[j] = g.r;
        if (j > lo) {
            f = -g.s * e[j - 1];
            e[j - 1] = g.c * e[j - 1];
        }
        rotate_cols(V, j, hi, g.c, g.s);
    }
}

/// Diagonalizes (d, e) in place. On return e == 0 and d holds the singular
/// values with arbitrary sign and order.
inline void diagonalize(std::span<double> d, std::span<double> e, DenseMatrix* U, DenseMatrix* V) {
    const std::size_t m = d.size();
    if (m <= 1) return;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double bnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) bnorm = std::max(bnorm, std::abs(d[i]) + (i + 1 < m ? std::abs(e[i]) : 0.0));
    if (bnorm == 0.0) {
        std::fill(e.begin(), e.end(), 0.0);
        return;
    }
    const auto negligible = [&](std::size_t i) {
        return std::abs(e[i]) <= eps * (std::abs(d[i]) + std::abs(d[i + 1]));
    };

    const std::size_t budget = 30 * m;
    std::size_t sweeps = 0;
    std::size_t hi = m - 1;
    while (hi > 0) {
        if (negligible(hi - 1)) {
            e[hi - 1] = 0.0;
            --hi;
            continue;
        }
        std::size_t lo = hi - 1;
        while (lo > 0 && !negligible(lo - 1)) --lo;
        if (lo > 0) e[lo - 1] = 0.0;

        bool chased = false;
        for (std::size_t i = lo; i <= hi; ++i) {
            if (std::abs(d[i]) > eps * bnorm) continue;
            d[i] = 0.0;
            if (i < hi)
                chase_zero_diagonal_row(d, e, i, hi, U);
            else
                chase_zero_diagonal_col(d, e, lo, hi, V);
            chased = true;
            break;
        }
        if (chased) continue;

        if (++sweeps > budget)
            throw NoConvergence("bidiagonal SVD did not converge in " + std::to_string(budget) + " sweeps");
        const double shift2 = wilkinson_shift(d, e, lo, hi);
        if (shift2 <= eps * d[lo] * d[lo])
            zero_shift_sweep(d, e, lo, hi, U, V);
        else
            shifted_sweep(d, e, lo, hi, shift2, U, V);
    }
}

}  // namespace detail

/// Full SVD of an upper bidiagonal matrix by implicit-shift QR.
///
/// Singular values come back in decreasing order. Each left singular vector
/// is signed so that its largest-magnitude entry is positive (the first such
/// entry on ties), and the right vector follows it.
inline BidiagonalSVD svd(const BidiagonalMatrix& B) {
    const std::size_t m = B.size();
    if (m > 0 && B.gammas.size() + 1 != m) throw DimensionMismatch("svd: gammas must have size() - 1 entries");
    std::vector<double> d = B.betas;
    std::vector<double> e = B.gammas;
    DenseMatrix U = DenseMatrix::identity(m);
    DenseMatrix V = DenseMatrix::identity(m);
    detail::diagonalize(d, e, &U, &V);

    for (std::size_t i = 0; i < m; ++i)
        if (d[i] < 0.0) {
            d[i] = -d[i];
            scale(-1.0, V.col(i));
        }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

    BidiagonalSVD out{std::vector<double>(m), DenseMatrix(m, m), DenseMatrix(m, m)};
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t src = order[j];
        out.thetas[j] = d[src];
        auto c = out.C.col(j);
        auto v = out.D.col(j);
        std::copy_n(U.col(src).begin(), m, c.begin());
        std::copy_n(V.col(src).begin(), m, v.begin());
        std::size_t big = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (std::abs(c[i]) > std::abs(c[big])) big = i;
        if (c[big] < 0.0) {
            scale(-1.0, c);
            scale(-1.0, v);
        }
    }
    return out;
}

/// Singular values only, in decreasing order.
inline std::vector<double> singular_values(const BidiagonalMatrix& B) {
    if (B.size() > 0 && B.gammas.size() + 1 != B.size())
        throw DimensionMismatch("singular_values: gammas must have size() - 1 entries");
    std::vector<double> d = B.betas;
    std::vector<double> e = B.gammas;
    detail::diagonalize(d, e, nullptr, nullptr);
    for (double& x : d) x = std::abs(x);
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
}

/// Applies one full-length implicit QR sweep per shift, in the given order,
/// with shift mu entering as mu^2 on B^T B. Signs are pushed into the
/// columns of C and D so that the returned bidiagonal is nonnegative.
inline SweepResult implicit_qr_sweeps(const BidiagonalMatrix& B, std::span<const double> shifts) {
    const std::size_t m = B.size();
    if (m > 0 && B.gammas.size() + 1 != m)
        throw DimensionMismatch("implicit_qr_sweeps: gammas must have size() - 1 entries");
    SweepResult out{B, DenseMatrix::identity(m), DenseMatrix::identity(m)};
    auto& d = out.B.betas;
    auto& e = out.B.gammas;
    if (m >= 2)
        for (const double mu : shifts) detail::shifted_sweep(d, e, 0, m - 1, mu * mu, &out.C, &out.D);

    // Row flips negate (d_i, e_i), column flips negate (e_{i-1}, d_i).
    for (std::size_t i = 0; i < m; ++i) {
        if (d[i] < 0.0) {
            d[i] = -d[i];
            if (i + 1 < m) e[i] = -e[i];
            scale(-1.0, out.C.col(i));
        }
        if (i + 1 < m && e[i] < 0.0) {
            e[i] = -e[i];
            d[i + 1] = -d[i + 1];
            scale(-1.0, out.D.col(i + 1));
        }
    }
    return out;
}

}  // namespace skeweig

#endif  // SKEWEIG_BIDIAG_HPP
