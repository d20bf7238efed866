#ifndef SKEWEIG_LANCZOS_HPP
#define SKEWEIG_LANCZOS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "bidiag.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "reorth.hpp"
#include "skew_matrix.hpp"

namespace skeweig {

enum class ReorthMode {
    partial,  // estimate-driven, keeps semi-orthogonality and semi-biorthogonality
    full,     // two Gram-Schmidt passes against every previous vector
    none,
};

struct ReorthPolicy {
    ReorthMode mode = ReorthMode::partial;
    /// In partial mode, false drops the p-against-Q and q-against-P passes
    /// (only orthogonality within each basis is maintained).
    bool biorthogonality = true;
};

enum class Breakdown { none, beta, gamma };

/// Bases and coefficients of an SSLBD process after `steps` steps:
/// A Q_j = P_j B_j and A P_j = -Q_{j+1} [B_j, gamma_j e_j]^T.
struct LanczosState {
    DenseMatrix P;                // n x capacity; columns [0, steps) are live
    DenseMatrix Q;                // n x (capacity + 1); columns [0, steps] are live
    std::vector<double> betas;    // capacity entries
    std::vector<double> gammas;   // capacity entries; gammas[steps-1] couples q_steps
    std::size_t steps = 0;
    Breakdown breakdown = Breakdown::none;

    std::size_t n() const noexcept { return P.rows(); }
    std::size_t capacity() const noexcept { return P.cols(); }

    /// The square bidiagonal B_j.
    BidiagonalMatrix bidiagonal() const {
        BidiagonalMatrix B;
        B.betas.assign(betas.begin(), betas.begin() + static_cast<std::ptrdiff_t>(steps));
        if (steps > 1) B.gammas.assign(gammas.begin(), gammas.begin() + static_cast<std::ptrdiff_t>(steps - 1));
        return B;
    }

    /// gamma_j, the coefficient of q_{j+1} in A p_j.
    double coupling() const noexcept { return steps == 0 ? 0.0 : gammas[steps - 1]; }

    DenseMatrix left_basis() const { return P.block(n(), steps); }
    DenseMatrix right_basis() const { return Q.block(n(), steps + 1); }
};

/// Per-step diagnostics (one record per expansion step).
struct StepInfo {
    std::size_t step = 0;
    double max_phi = 0.0;
    double max_psi = 0.0;
    double max_omega = 0.0;
    std::size_t set_p = 0;
    std::size_t set_pq = 0;
    std::size_t set_q = 0;
    std::size_t set_qp = 0;
    Breakdown breakdown = Breakdown::none;
};

/// Starts a process with room for `capacity` steps. q1 is normalized.
inline LanczosState start(const SkewSparseMatrix& A, std::span<const double> q1, std::size_t capacity) {
    if (q1.size() != A.n()) throw DimensionMismatch("start vector length differs from matrix order");
    const double nrm = norm2(q1);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw ZeroStartVector("start vector has zero or non-finite norm");
    LanczosState s;
    s.P = DenseMatrix(A.n(), capacity);
    s.Q = DenseMatrix(A.n(), capacity + 1);
    s.betas.assign(capacity, 0.0);
    s.gammas.assign(capacity, 0.0);
    auto q = s.Q.col(0);
    for (std::size_t i = 0; i < q1.size(); ++i) q[i] = q1[i] / nrm;
    return s;
}

namespace detail {

// Two classical passes of projection against the given columns.
inline void orthogonalize_against(std::span<double> x, const DenseMatrix& basis, std::size_t count) {
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < count; ++i) axpy(-dot(basis.col(i), x), basis.col(i), x);
}

inline double breakdown_tolerance(std::size_t n, double anorm) {
    return static_cast<double>(n) * std::numeric_limits<double>::epsilon() * anorm;
}

}  // namespace detail

/// Runs one SSLBD step: p_j from A q_j, then q_{j+1} from A p_j, with the
/// requested reorthogonalization. Consumes exactly two products with A,
/// or one when beta_j breaks down.
///
/// A breakdown is declared when beta_j or gamma_j falls below n*eps*||A||_e.
/// The offending coefficient and vector are set to zero and the step still
/// counts, so B_j keeps the exact triplets of the invariant subspace found.
inline StepInfo step(LanczosState& st, const SkewSparseMatrix& A, OrthoEstimates& est,
                     const ReorthPolicy& policy = {}) {
    const std::size_t j = st.steps;
    if (st.breakdown != Breakdown::none) throw Error("step: process has broken down");
    if (j >= st.capacity()) throw Error("step: capacity exhausted");
    const std::size_t n = st.n();
    StepInfo info;
    info.step = j;
    // Estimates are tracked without reorthogonalization in ReorthMode::none
    // so that the loss of orthogonality stays observable.
    const bool partial = policy.mode == ReorthMode::partial;
    const bool tracked = policy.mode != ReorthMode::full;
    const bool bio = policy.biorthogonality;
    IndexSets sets;

    // Left vector: s_j = A q_j - gamma_{j-1} p_{j-1}.
    auto s = st.P.col(j);
    A.apply(st.Q.col(j), s);
    if (j > 0) axpy(-st.gammas[j - 1], st.P.col(j - 1), s);
    double beta = norm2(s);
    if (j == 0) est.raise_anorm(beta);

    if (tracked) {
        st.betas[j] = beta;
        est.update_phi_omega_row(j, st.betas, st.gammas);
        est.left_index_sets(j, sets);
        if (!bio) sets.pq.clear();
        info.set_p = sets.p.size();
        info.set_pq = sets.pq.size();
        for (int pass = 0; partial && pass < 2 && !(sets.p.empty() && sets.pq.empty()); ++pass) {
            const double before = norm2(s);
            reorthogonalize(s, st.P, sets.p, [&](std::size_t i, double tau) { est.propagate_left_against_p(j, i, tau); });
            reorthogonalize(s, st.Q, sets.pq, [&](std::size_t i, double tau) { est.propagate_left_against_q(j, i, tau); });
            if (norm2(s) > before / std::sqrt(2.0)) break;
        }
        beta = norm2(s);
    } else if (policy.mode == ReorthMode::full) {
        detail::orthogonalize_against(s, st.P, j);
        detail::orthogonalize_against(s, st.Q, j + 1);
        beta = norm2(s);
    }

    if (beta <= detail::breakdown_tolerance(n, est.anorm())) {
        std::fill(s.begin(), s.end(), 0.0);
        st.betas[j] = 0.0;
        st.gammas[j] = 0.0;
        std::fill(st.Q.col(j + 1).begin(), st.Q.col(j + 1).end(), 0.0);
        st.steps = j + 1;
        st.breakdown = Breakdown::beta;
        info.breakdown = Breakdown::beta;
        return info;
    }
    st.betas[j] = beta;
    if (tracked) est.finalize_phi_omega_row(j, beta);
    scale(1.0 / beta, s);

    // Right vector: t_j = -A p_j - beta_j q_j.
    auto t = st.Q.col(j + 1);
    A.apply(st.P.col(j), t);
    scale(-1.0, t);
    axpy(-beta, st.Q.col(j), t);
    double gamma = norm2(t);

    if (tracked) {
        st.gammas[j] = gamma;
        est.update_psi_omega_col(j, st.betas, st.gammas);
        est.right_index_sets(j, sets);
        if (!bio) sets.qp.clear();
        info.set_q = sets.q.size();
        info.set_qp = sets.qp.size();
        for (int pass = 0; partial && pass < 2 && !(sets.q.empty() && sets.qp.empty()); ++pass) {
            const double before = norm2(t);
            reorthogonalize(t, st.Q, sets.q, [&](std::size_t i, double tau) { est.propagate_right_against_q(j, i, tau); });
            reorthogonalize(t, st.P, sets.qp, [&](std::size_t i, double tau) { est.propagate_right_against_p(j, i, tau); });
            if (norm2(t) > before / std::sqrt(2.0)) break;
        }
        gamma = norm2(t);
    } else if (policy.mode == ReorthMode::full) {
        detail::orthogonalize_against(t, st.Q, j + 1);
        detail::orthogonalize_against(t, st.P, j + 1);
        gamma = norm2(t);
    }

    st.gammas[j] = gamma;
    est.update_anorm_estimate(j, st.betas, st.gammas);
    st.steps = j + 1;
    if (gamma <= detail::breakdown_tolerance(n, est.anorm())) {
        std::fill(t.begin(), t.end(), 0.0);
        st.gammas[j] = 0.0;
        st.breakdown = Breakdown::gamma;
        info.breakdown = Breakdown::gamma;
        if (tracked) {
            const auto mx = est.step_maxima(j);
            info.max_phi = mx[0];
            info.max_omega = mx[2];
        }
        return info;
    }
    if (tracked) est.finalize_psi_omega_col(j, gamma);
    scale(1.0 / gamma, t);

    if (tracked) {
        const auto mx = est.step_maxima(j);
        info.max_phi = mx[0];
        info.max_psi = mx[1];
        info.max_omega = mx[2];
    }
    return info;
}

namespace detail {

// Fills x with a random unit vector orthogonal to the given columns; false
// when those columns already span the whole space.
template <class Rng>
bool random_orthogonal(std::span<double> x, const DenseMatrix& P, std::size_t np, const DenseMatrix& Q,
                       std::size_t nq, Rng& rng) {
    if (np + nq >= x.size()) return false;
    std::normal_distribution<double> gauss;
    for (int attempt = 0; attempt < 8; ++attempt) {
        for (double& v : x) v = gauss(rng);
        orthogonalize_against(x, P, np);
        orthogonalize_against(x, Q, nq);
        const double nrm = norm2(x);
        if (nrm > 1e-8) {
            scale(1.0 / nrm, x);
            return true;
        }
    }
    return false;
}

}  // namespace detail

struct ResumeResult {
    std::size_t mv_count = 0;
    bool exhausted = false;  // no direction orthogonal to both bases is left
};

/// Continues a process past a breakdown with a random vector orthogonal to
/// both bases; the broken coefficient stays zero so both relations remain exact.
/// After a gamma breakdown q_{j+1} is replaced; after a beta breakdown p_j is
/// replaced and q_{j+1} is built from it at the cost of one product with A.
template <class Rng>
ResumeResult resume(LanczosState& st, const SkewSparseMatrix& A, OrthoEstimates& est, Rng& rng) {
    const std::size_t j = st.steps - 1;
    const std::size_t n = st.n();
    if (st.breakdown == Breakdown::gamma) {
        if (!detail::random_orthogonal(st.Q.col(j + 1), st.P, j + 1, st.Q, j + 1, rng)) {
            std::fill(st.Q.col(j + 1).begin(), st.Q.col(j + 1).end(), 0.0);
            return {0, true};
        }
        st.gammas[j] = 0.0;
        est.reseed_column(j + 1);
        st.breakdown = Breakdown::none;
        return {0, false};
    }
    if (st.breakdown != Breakdown::beta) return {};
    auto p = st.P.col(j);
    if (!detail::random_orthogonal(p, st.P, j, st.Q, j + 1, rng)) {
        std::fill(p.begin(), p.end(), 0.0);
        return {0, true};
    }
    est.reseed_row(j);
    auto t = st.Q.col(j + 1);
    A.apply(p, t);
    scale(-1.0, t);
    detail::orthogonalize_against(t, st.Q, j + 1);
    detail::orthogonalize_against(t, st.P, j + 1);
    const double gamma = norm2(t);
    st.gammas[j] = gamma;
    est.update_anorm_estimate(j, st.betas, st.gammas);
    if (gamma <= detail::breakdown_tolerance(n, est.anorm())) {
        std::fill(t.begin(), t.end(), 0.0);
        st.gammas[j] = 0.0;
        st.breakdown = Breakdown::gamma;
        return {1, false};
    }
    scale(1.0 / gamma, t);
    est.reseed_column(j + 1);
    st.breakdown = Breakdown::none;
    return {1, false};
}

}  // namespace skeweig

#endif  // SKEWEIG_LANCZOS_HPP
