#ifndef SKEWEIG_RESTART_HPP
#define SKEWEIG_RESTART_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "bidiag.hpp"
#include "dense.hpp"
#include "lanczos.hpp"
#include "reorth.hpp"

namespace skeweig {

struct RestartPlan {
    std::vector<double> shifts;  // decreasing; zeros mark replaced bad shifts
    std::size_t k = 0;
    std::size_t m = 0;
    std::size_t bad_shifts = 0;
};

/// Exact shifts theta_{k+1..m}. A shift within theta_k * 1e-3 of
/// theta_k - ||r_k|| would damp a wanted direction and is replaced by zero.
inline RestartPlan select_shifts(std::span<const double> thetas, std::size_t k, double residual_norm_k) {
    const std::size_t m = thetas.size();
    if (k == 0 || k > m) throw InvalidOptions("select_shifts: need 0 < k <= m");
    RestartPlan plan;
    plan.k = k;
    plan.m = m;
    const double wanted = thetas[k - 1];
    for (std::size_t i = k; i < m; ++i) {
        double mu = thetas[i];
        if (std::abs((wanted - residual_norm_k) - mu) <= wanted * 1e-3) {
            mu = 0.0;
            ++plan.bad_shifts;
        }
        plan.shifts.push_back(mu);
    }
    std::sort(plan.shifts.begin(), plan.shifts.end(), std::greater<>());
    return plan;
}

inline RestartPlan select_shifts(const BidiagonalSVD& svd, std::size_t k, double residual_norm_k) {
    return select_shifts(svd.thetas, k, residual_norm_k);
}

struct CompactResult {
    double beta_new = 0.0;    // norm of the unnormalized new q_{k+1}
    bool degenerate = false;  // beta_new fell below n*eps*||A||_e; q_{k+1} not set
};

/// Shrinks an m-step process to k steps using the swept bidiagonal
/// B~ = C~^T B_m D~: P_k <- P_m C~_k, Q_k <- Q_m D~_k, B_k <- B~_k and
/// q_{k+1} <- gamma_m c~_{m,k} q_{m+1} + gamma~_k Q_m d~_{k+1}, normalized,
/// whose norm becomes the new coupling gamma_k. No products with A.
inline CompactResult compact(LanczosState& st, const SweepResult& sw, std::size_t k, double anorm) {
    const std::size_t m = st.steps;
    const std::size_t n = st.n();
    if (k == 0 || k > m) throw InvalidOptions("compact: need 0 < k <= steps");
    if (sw.B.size() != m) throw DimensionMismatch("compact: sweep size differs from process length");
    if (k == m) return {st.coupling(), false};

    const double gamma_m = st.gammas[m - 1];
    const double c_mk = sw.C(m - 1, k - 1);
    const double gamma_tilde = sw.B.gammas[k - 1];

    DenseMatrix newP(n, k), newQ(n, k);
    std::vector<double> qnext(n, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
        const auto p = st.P.col(l);
        const auto q = st.Q.col(l);
        for (std::size_t i = 0; i < k; ++i) {
            if (const double c = sw.C(l, i); c != 0.0) axpy(c, p, newP.col(i));
            if (const double d = sw.D(l, i); d != 0.0) axpy(d, q, newQ.col(i));
        }
        axpy(gamma_tilde * sw.D(l, k), q, qnext);
    }
    axpy(gamma_m * c_mk, st.Q.col(m), qnext);

    for (std::size_t i = 0; i < k; ++i) {
        std::copy(newP.col(i).begin(), newP.col(i).end(), st.P.col(i).begin());
        std::copy(newQ.col(i).begin(), newQ.col(i).end(), st.Q.col(i).begin());
        st.betas[i] = sw.B.betas[i];
        if (i + 1 < k) st.gammas[i] = sw.B.gammas[i];
    }
    for (std::size_t i = k; i < m; ++i) {
        st.betas[i] = 0.0;
        st.gammas[i] = 0.0;
        std::fill(st.P.col(i).begin(), st.P.col(i).end(), 0.0);
        std::fill(st.Q.col(i + 1).begin(), st.Q.col(i + 1).end(), 0.0);
    }
    st.steps = k;
    st.breakdown = Breakdown::none;

    CompactResult res;
    res.beta_new = norm2(qnext);
    auto qk = st.Q.col(k);
    if (res.beta_new <= detail::breakdown_tolerance(n, anorm)) {
        res.degenerate = true;
        st.gammas[k - 1] = 0.0;
        std::fill(qk.begin(), qk.end(), 0.0);
        return res;
    }
    st.gammas[k - 1] = res.beta_new;
    for (std::size_t i = 0; i < n; ++i) qk[i] = qnext[i] / res.beta_new;
    return res;
}

/// Carries the orthogonality estimates through a compaction.
inline void update_estimates(OrthoEstimates& est, const SweepResult& sw, std::size_t m, std::size_t k,
                             double gamma_m, double beta_new) {
    if (k == m) return;
    est.restart(sw.C, sw.D, m, k, gamma_m, sw.B.gammas[k - 1], beta_new);
}

/// Replaces the vanished q_{k+1} of a degenerate compaction by a random unit
/// vector orthogonal to P_k and Q_k, with a zero coupling coefficient.
template <class Rng>
void reseed(LanczosState& st, OrthoEstimates& est, Rng& rng) {
    const std::size_t k = st.steps;
    if (!detail::random_orthogonal(st.Q.col(k), st.P, k, st.Q, k, rng))
        throw Error("reseed: no direction left orthogonal to the current bases");
    st.gammas[k - 1] = 0.0;
    est.reseed_column(k);
}

}  // namespace skeweig

#endif  // SKEWEIG_RESTART_HPP
