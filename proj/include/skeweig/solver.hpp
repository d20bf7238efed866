#ifndef SKEWEIG_SOLVER_HPP
#define SKEWEIG_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bidiag.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "lanczos.hpp"
#include "reorth.hpp"
#include "restart.hpp"
#include "skew_matrix.hpp"

namespace skeweig {

struct SolverOptions {
    std::size_t k = 1;
    std::size_t m = 30;
    std::size_t max_restarts = 2000;
    double tol = 1e-8;
    std::vector<double> q1;  // empty: uniform n^{-1/2}
    ReorthPolicy reorth;
    std::uint64_t seed = 0;
    bool trace_steps = false;  // record per-step Ritz extremes and estimate maxima
};

/// A conjugate pair +-i*sigma with eigenvectors (u +- i v)/sqrt(2).
struct ConjugateEigenpair {
    double sigma = 0.0;
    std::vector<double> u;
    std::vector<double> v;
    double residual = 0.0;
};

struct RitzTriplet {
    double theta = 0.0;
    std::vector<double> c;
    std::vector<double> d;
    double residual = 0.0;
};

struct StepRecord {
    std::size_t cycle = 0;
    std::size_t step = 0;  // 1-based dimension after the step
    std::size_t mv_count = 0;
    double theta_max = 0.0;
    double theta_min = 0.0;
    double max_phi = 0.0;
    double max_psi = 0.0;
    double max_omega = 0.0;
    std::size_t reorth_p = 0;
    std::size_t reorth_pq = 0;
    std::size_t reorth_q = 0;
    std::size_t reorth_qp = 0;
    Breakdown breakdown = Breakdown::none;
};

struct CycleRecord {
    std::size_t cycle = 0;
    std::size_t dimension = 0;
    std::vector<double> thetas;     // leading k Ritz values
    std::vector<double> residuals;  // their cheap residual norms
    std::size_t mv_count = 0;
    double anorm = 0.0;
    std::size_t bad_shifts = 0;
    bool breakdown = false;
};

struct SolveTrace {
    std::vector<CycleRecord> cycles;
    std::vector<StepRecord> steps;
};

struct SolveResult {
    std::vector<ConjugateEigenpair> pairs;
    std::size_t mv_count = 0;
    std::size_t restarts = 0;
    bool converged = false;
    bool exhausted = false;  // the bases span the whole space; fewer than k nonzero pairs exist
    double anorm = 0.0;
    SolveTrace trace;
};

/// What an observer sees once per cycle, right after the Ritz extraction.
struct CycleView {
    const LanczosState& state;
    const BidiagonalSVD& svd;
    std::span<const double> residuals;  // one per Ritz value
    double anorm;
    std::size_t cycle;
};

/// Optional hooks for tests and diagnostics; none of them may modify the solve.
struct SolverObserver {
    std::function<void(const LanczosState&, const StepInfo&)> on_step;
    std::function<void(const CycleView&)> on_cycle;
    std::function<void(const LanczosState&, const OrthoEstimates&)> on_restart;
};

inline void validate(const SkewSparseMatrix& A, const SolverOptions& opts) {
    const std::size_t n = A.n();
    if (opts.k < 1) throw InvalidOptions("k must be at least 1");
    if (opts.k >= opts.m) throw InvalidOptions("k must be smaller than m");
    if (opts.k > n / 2)
        throw InvalidOptions("k = " + std::to_string(opts.k) + " exceeds n/2 = " + std::to_string(n / 2));
    if (!(opts.tol > 0.0) || !std::isfinite(opts.tol)) throw InvalidOptions("tol must be positive");
    if (!opts.q1.empty() && opts.q1.size() != n) throw InvalidOptions("start vector length differs from n");
}

/// Subspace dimension actually used: m, capped by the number of independent
/// Lanczos directions n/2 but never below k + 1.
inline std::size_t effective_dimension(std::size_t n, const SolverOptions& opts) {
    return std::min(opts.m, std::max(n / 2, opts.k + 1));
}

/// Cheap residual norms ||r_{+-j}|| = gamma_m |e_m^T c_j| / sqrt(2).
inline std::vector<double> ritz_residuals(const BidiagonalSVD& svd, double coupling) {
    const std::size_t m = svd.thetas.size();
    std::vector<double> r(m);
    for (std::size_t j = 0; j < m; ++j) r[j] = coupling * std::abs(svd.C(m - 1, j)) / std::sqrt(2.0);
    return r;
}

inline std::vector<RitzTriplet> ritz_triplets(const BidiagonalSVD& svd, double coupling, std::size_t count) {
    const auto res = ritz_residuals(svd, coupling);
    const std::size_t m = svd.thetas.size();
    std::vector<RitzTriplet> out;
    for (std::size_t j = 0; j < std::min(count, m); ++j) {
        RitzTriplet t;
        t.theta = svd.thetas[j];
        t.c.assign(svd.C.col(j).begin(), svd.C.col(j).end());
        t.d.assign(svd.D.col(j).begin(), svd.D.col(j).end());
        t.residual = res[j];
        out.push_back(std::move(t));
    }
    return out;
}

/// u = P_m c and v = Q_m d for each triplet, normalized.
inline std::vector<ConjugateEigenpair> recover_eigenpairs(std::span<const RitzTriplet> triplets,
                                                          const LanczosState& st) {
    const std::size_t n = st.n();
    std::vector<ConjugateEigenpair> out;
    for (const auto& t : triplets) {
        ConjugateEigenpair e;
        e.sigma = t.theta;
        e.residual = t.residual;
        e.u.assign(n, 0.0);
        e.v.assign(n, 0.0);
        for (std::size_t l = 0; l < t.c.size(); ++l) {
            if (t.c[l] != 0.0) axpy(t.c[l], st.P.col(l), e.u);
            if (t.d[l] != 0.0) axpy(t.d[l], st.Q.col(l), e.v);
        }
        if (const double nu = norm2(e.u); nu > 0.0) scale(1.0 / nu, e.u);
        if (const double nv = norm2(e.v); nv > 0.0) scale(1.0 / nv, e.v);
        out.push_back(std::move(e));
    }
    return out;
}

namespace detail {

inline std::size_t count_nonzero(std::span<const double> thetas, double tiny) {
    return static_cast<std::size_t>(std::count_if(thetas.begin(), thetas.end(), [&](double t) { return t > tiny; }));
}

}  // namespace detail

/// Implicitly restarted SSLBD with partial reorthogonalization: the k
/// largest conjugate eigenpairs +-i*sigma of a skew-symmetric A.
inline SolveResult solve(const SkewSparseMatrix& A, const SolverOptions& opts, const SolverObserver& obs = {}) {
    validate(A, opts);
    if (A.nnz() == 0) throw MatrixAllZero("matrix has no nonzero entries");

    const std::size_t n = A.n();
    const std::size_t k = opts.k;
    const std::size_t m = effective_dimension(n, opts);
    std::mt19937_64 rng(opts.seed);

    std::vector<double> q1 = opts.q1;
    if (q1.empty()) q1.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
    LanczosState st = start(A, q1, m);
    OrthoEstimates est(m, n);

    SolveResult result;
    std::size_t cycle = 0;
    for (;;) {
        bool exact = false;
        while (st.steps < m) {
            const StepInfo info = step(st, A, est, opts.reorth);
            result.mv_count += info.breakdown == Breakdown::beta ? 1 : 2;
            if (opts.trace_steps) {
                StepRecord r;
                r.cycle = cycle;
                r.step = st.steps;
                r.mv_count = result.mv_count;
                const auto sv = singular_values(st.bidiagonal());
                r.theta_max = sv.front();
                r.theta_min = sv.back();
                r.max_phi = info.max_phi;
                r.max_psi = info.max_psi;
                r.max_omega = info.max_omega;
                r.reorth_p = info.set_p;
                r.reorth_pq = info.set_pq;
                r.reorth_q = info.set_q;
                r.reorth_qp = info.set_qp;
                r.breakdown = info.breakdown;
                result.trace.steps.push_back(r);
            }
            if (obs.on_step) obs.on_step(st, info);
            if (st.breakdown == Breakdown::none) continue;
            // The current triplets are exact; stop if they already hold k nonzero values.
            const auto sv = singular_values(st.bidiagonal());
            est.raise_anorm(sv.front());
            if (detail::count_nonzero(sv, detail::breakdown_tolerance(n, est.anorm())) >= k) {
                exact = true;
                break;
            }
            auto rr = resume(st, A, est, rng);
            if (!rr.exhausted && st.breakdown != Breakdown::none) {
                const auto again = resume(st, A, est, rng);
                rr = {rr.mv_count + again.mv_count, again.exhausted};
            }
            result.mv_count += rr.mv_count;
            if (rr.exhausted) {
                exact = true;
                result.exhausted = true;
                break;
            }
        }

        const BidiagonalSVD svd = skeweig::svd(st.bidiagonal());
        est.raise_anorm(svd.thetas.front());
        const double anorm = est.anorm();
        const auto residuals = ritz_residuals(svd, st.coupling());
        const std::size_t nonzero = detail::count_nonzero(svd.thetas, detail::breakdown_tolerance(n, anorm));

        bool converged = nonzero >= k || result.exhausted;
        for (std::size_t j = 0; j < std::min(k, nonzero); ++j)
            converged = converged && residuals[j] <= anorm * opts.tol;

        CycleRecord rec;
        rec.cycle = cycle;
        rec.dimension = st.steps;
        rec.thetas.assign(svd.thetas.begin(), svd.thetas.begin() + static_cast<std::ptrdiff_t>(std::min(k, svd.thetas.size())));
        rec.residuals.assign(residuals.begin(), residuals.begin() + static_cast<std::ptrdiff_t>(rec.thetas.size()));
        rec.mv_count = result.mv_count;
        rec.anorm = anorm;
        rec.breakdown = exact;
        if (obs.on_cycle) obs.on_cycle(CycleView{st, svd, residuals, anorm, cycle});

        if (converged || exact || result.restarts >= opts.max_restarts) {
            result.trace.cycles.push_back(std::move(rec));
            const auto triplets = ritz_triplets(svd, st.coupling(), std::min(k, nonzero));
            result.pairs = recover_eigenpairs(triplets, st);
            result.converged = converged;
            result.anorm = anorm;
            return result;
        }

        const RestartPlan plan = select_shifts(svd, k, residuals[k - 1]);
        rec.bad_shifts = plan.bad_shifts;
        result.trace.cycles.push_back(std::move(rec));

        const SweepResult sw = implicit_qr_sweeps(st.bidiagonal(), plan.shifts);
        const std::size_t m_now = st.steps;
        const double gamma_m = st.coupling();
        const CompactResult cr = compact(st, sw, k, anorm);
        update_estimates(est, sw, m_now, k, gamma_m, cr.degenerate ? 1.0 : cr.beta_new);
        if (cr.degenerate) reseed(st, est, rng);
        ++result.restarts;
        ++cycle;
        if (obs.on_restart) obs.on_restart(st, est);
    }
}

}  // namespace skeweig

#endif  // SKEWEIG_SOLVER_HPP
