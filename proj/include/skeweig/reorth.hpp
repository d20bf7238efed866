#ifndef SKEWEIG_REORTH_HPP
#define SKEWEIG_REORTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dense.hpp"

namespace skeweig {

/// Index lists of basis vectors a new Lanczos vector must be reorthogonalized
/// against. `p`/`pq` serve the left vector p_j, `q`/`qp` the right vector q_{j+1}.
struct IndexSets {
    std::vector<std::size_t> p;   // p_i, i < j
    std::vector<std::size_t> pq;  // q_i, i <= j
    std::vector<std::size_t> q;   // q_i, i <= j
    std::vector<std::size_t> qp;  // p_i, i <= j
};

/// Running estimates of the orthogonality levels of the Lanczos bases:
/// phi(i,j) ~ p_i^T p_j, psi(i,j) ~ q_i^T q_j, omega(i,j) ~ p_i^T q_j.
///
/// All indices are 0-based: step j produces p_j and then q_{j+1}, with
/// A q_i = beta_i p_i + gamma_{i-1} p_{i-1} and A p_i = -beta_i q_i - gamma_i q_{i+1}.
///
/// The recurrences for a step run in three phases per vector: `update_*`
/// computes the unnormalized values and a provisional normalization,
/// `propagate_*` keeps the unnormalized values consistent with each
/// Gram-Schmidt update of the vector, and `finalize_*` normalizes with the
/// final coefficient. In the signed form the unnormalized omega values carry
/// the opposite sign of the inner product they track
/// (omega_ji = -(omega'_ji + ...)/beta_j).
class OrthoEstimates {
public:
    OrthoEstimates() = default;

    /// `m` is the maximum subspace dimension, `n` the matrix order.
    OrthoEstimates(std::size_t m, std::size_t n)
        : m_(m),
          n_(n),
          threshold_(std::sqrt(std::numeric_limits<double>::epsilon() / static_cast<double>(m))),
          phi_(m, m),
          psi_(m + 1, m + 1),
          omega_(m, m + 1),
          work_(m + 1, 0.0),
          work2_(m + 1, 0.0) {
        for (std::size_t i = 0; i < m; ++i) phi_(i, i) = 1.0;
        for (std::size_t i = 0; i <= m; ++i) psi_(i, i) = 1.0;
    }

    std::size_t capacity() const noexcept { return m_; }
    double threshold() const noexcept { return threshold_; }
    double anorm() const noexcept { return anorm_; }
    /// Rounding term eps*sqrt(n)*||A||_e/2 added to every new estimate.
    double eps1() const noexcept {
        return rounding_scale_ * std::numeric_limits<double>::epsilon() * std::sqrt(double(n_)) * anorm_ / 2;
    }

    /// Multiplies eps1; 0 turns the recurrences into their exact-arithmetic form.
    void set_rounding_scale(double scale) noexcept { rounding_scale_ = scale; }

    /// By default every term enters the recurrences with its magnitude, so an
    /// estimate bounds |p_i^T p_j| (etc.) instead of approximating it with a
    /// sign. false selects the signed recurrences, which can cancel and then
    /// underestimate the true level.
    void set_magnitudes(bool on) noexcept { magnitudes_ = on; }
    bool magnitudes() const noexcept { return magnitudes_; }

    double phi(std::size_t i, std::size_t j) const noexcept { return phi_(i, j); }
    double psi(std::size_t i, std::size_t j) const noexcept { return psi_(i, j); }
    double omega(std::size_t i, std::size_t j) const noexcept { return omega_(i, j); }

    void set_phi(std::size_t i, std::size_t j, double v) noexcept { phi_(i, j) = phi_(j, i) = v; }
    void set_psi(std::size_t i, std::size_t j, double v) noexcept { psi_(i, j) = psi_(j, i) = v; }
    void set_omega(std::size_t i, std::size_t j, double v) noexcept { omega_(i, j) = v; }

    const DenseMatrix& phi_matrix() const noexcept { return phi_; }
    const DenseMatrix& psi_matrix() const noexcept { return psi_; }
    const DenseMatrix& omega_matrix() const noexcept { return omega_; }

    /// Folds a lower bound for ||A|| into the running estimate.
    void raise_anorm(double value) noexcept { anorm_ = std::max(anorm_, value); }

    /// Norm-estimate recurrence after step j has produced beta_j and gamma_j.
    void update_anorm_estimate(std::size_t j, std::span<const double> betas, std::span<const double> gammas) noexcept {
        if (j == 0) {
            raise_anorm(std::hypot(betas[0], gammas[0]));
            return;
        }
        const double g1 = gammas[j - 1];
        const double g2 = j >= 2 ? gammas[j - 2] : 0.0;
        const double b1 = betas[j - 1];
        const double b = betas[j];
        const double g = gammas[j];
        raise_anorm(std::sqrt(b1 * b1 + g1 * g1 + g1 * b + g2 * b1));
        raise_anorm(std::sqrt(b * b + g * g + g1 * b));
    }

    /// phi(i,j), i < j, and omega(j,i), i <= j, from the recurrences, with
    /// betas[j] taken as provisional. The unit terms gamma_{j-1} psi(j,j) and
    /// gamma_{j-1} phi(j-1,j-1) cancel exactly and are left out.
    void update_phi_omega_row(std::size_t j, std::span<const double> betas, std::span<const double> gammas) {
        const double gprev = j > 0 ? gammas[j - 1] : 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double a = term(betas[i], psi_(i, j));
            const double b = i + 1 < j ? term(gammas[i], psi_(i + 1, j)) : 0.0;
            const double c = i + 1 < j ? term(gprev, phi_(i, j - 1)) : 0.0;
            work_[i] = a + b + neg(c);
        }
        for (std::size_t i = 0; i <= j; ++i) {
            const double a = term(betas[i], omega_(i, j));
            const double b = i > 0 ? term(gammas[i - 1], omega_(i - 1, j)) : 0.0;
            const double c = j > 0 ? term(gprev, omega_(j - 1, i)) : 0.0;
            work2_[i] = a + b + c;
        }
        finalize_phi_omega_row(j, betas[j]);
    }

    /// Normalizes the current unnormalized left-step values by beta_j.
    void finalize_phi_omega_row(std::size_t j, double beta) {
        const double e1 = eps1();
        for (std::size_t i = 0; i < j; ++i) {
            const double v = clamp((work_[i] + signum(work_[i]) * e1) / beta);
            phi_(i, j) = v;
            phi_(j, i) = v;
        }
        for (std::size_t i = 0; i <= j; ++i) omega_(j, i) = clamp(flip(work2_[i] + signum(work2_[i]) * e1) / beta);
    }

    /// psi(i,j+1) and omega(i,j+1), i <= j, with gammas[j] taken as provisional.
    /// For i = j the unit terms beta_j phi(j,j) and beta_j psi(j,j) cancel.
    void update_psi_omega_col(std::size_t j, std::span<const double> betas, std::span<const double> gammas) {
        for (std::size_t i = 0; i <= j; ++i) {
            const double a = i > 0 ? term(gammas[i - 1], phi_(i - 1, j)) : 0.0;
            const double b = i < j ? term(betas[i], phi_(i, j)) : 0.0;
            const double c = i < j ? term(betas[j], psi_(i, j)) : 0.0;
            work_[i] = a + b + neg(c);
        }
        for (std::size_t i = 0; i <= j; ++i) {
            const double a = term(gammas[i], omega_(j, i + 1));
            work2_[i] = a + term(betas[i], omega_(j, i)) + term(betas[j], omega_(i, j));
        }
        // omega(j, j+1) is read above before it is written below.
        finalize_psi_omega_col(j, gammas[j]);
    }

    void finalize_psi_omega_col(std::size_t j, double gamma) {
        const double e1 = eps1();
        for (std::size_t i = 0; i <= j; ++i) {
            const double v = clamp((work_[i] + signum(work_[i]) * e1) / gamma);
            psi_(i, j + 1) = v;
            psi_(j + 1, i) = v;
        }
        for (std::size_t i = 0; i <= j; ++i)
            omega_(i, j + 1) = clamp(flip(work2_[i] + signum(work2_[i]) * e1) / gamma);
    }

    /// Left-step sets: I_P = {i < j : |phi(i,j)| >= thr}, I_PQ = {i <= j : |omega(j,i)| >= thr}.
    void left_index_sets(std::size_t j, IndexSets& sets) const {
        sets.p.clear();
        sets.pq.clear();
        for (std::size_t i = 0; i < j; ++i)
            if (std::abs(phi_(i, j)) >= threshold_) sets.p.push_back(i);
        for (std::size_t i = 0; i <= j; ++i)
            if (std::abs(omega_(j, i)) >= threshold_) sets.pq.push_back(i);
    }

    /// Right-step sets: I_Q = {i <= j : |psi(i,j+1)| >= thr}, I_QP = {i <= j : |omega(i,j+1)| >= thr}.
    void right_index_sets(std::size_t j, IndexSets& sets) const {
        sets.q.clear();
        sets.qp.clear();
        for (std::size_t i = 0; i <= j; ++i) {
            if (std::abs(psi_(i, j + 1)) >= threshold_) sets.q.push_back(i);
            if (std::abs(omega_(i, j + 1)) >= threshold_) sets.qp.push_back(i);
        }
    }

    IndexSets index_sets(std::size_t j) const {
        IndexSets s;
        left_index_sets(j, s);
        right_index_sets(j, s);
        return s;
    }

    // s <- s - tau p_i during the left step j.
    void propagate_left_against_p(std::size_t j, std::size_t i, double tau) {
        for (std::size_t l = 0; l < j; ++l)
            if (l != i) work_[l] += neg(term(tau, phi_(l, i)));
        for (std::size_t l = 0; l <= j; ++l) work2_[l] += term(tau, omega_(i, l));
        work_[i] = 0.0;
    }

    // s <- s - tau q_i during the left step j.
    void propagate_left_against_q(std::size_t j, std::size_t i, double tau) {
        for (std::size_t l = 0; l <= j; ++l)
            if (l != i) work2_[l] += term(tau, psi_(i, l));
        for (std::size_t l = 0; l < j; ++l) work_[l] += neg(term(tau, omega_(l, i)));
        work2_[i] = 0.0;
    }

    // t <- t - tau q_i during the right step j.
    void propagate_right_against_q(std::size_t j, std::size_t i, double tau) {
        for (std::size_t l = 0; l <= j; ++l) {
            if (l != i) work_[l] += neg(term(tau, psi_(l, i)));
            work2_[l] += term(tau, omega_(l, i));
        }
        work_[i] = 0.0;
    }

    // t <- t - tau p_i during the right step j.
    void propagate_right_against_p(std::size_t j, std::size_t i, double tau) {
        for (std::size_t l = 0; l <= j; ++l) {
            if (l != i) work2_[l] += term(tau, phi_(l, i));
            work_[l] += neg(term(tau, omega_(i, l)));
        }
        work2_[i] = 0.0;
    }

    /// Largest magnitudes among the estimates produced at step j:
    /// (max_i |phi(i,j)|, max_i |psi(i,j+1)|, max over omega(j,.) and omega(.,j+1)).
    std::array<double, 3> step_maxima(std::size_t j) const {
        double mp = 0.0, mq = 0.0, mo = 0.0;
        for (std::size_t i = 0; i < j; ++i) mp = std::max(mp, std::abs(phi_(i, j)));
        for (std::size_t i = 0; i <= j; ++i) {
            mq = std::max(mq, std::abs(psi_(i, j + 1)));
            mo = std::max({mo, std::abs(omega_(j, i)), std::abs(omega_(i, j + 1))});
        }
        return {mp, mq, mo};
    }

    /// Replaces the estimates after an implicit restart that keeps k
    /// vectors: P_k = P_m C_k, Q_k = Q_m D_k and
    /// q_k = (gamma_m c_{m,k} q_m + gamma~_k Q_m d_{k+1}) / beta_new.
    /// Only the deviations from the identity are transformed; with magnitudes
    /// every factor enters with its absolute value.
    void restart(const DenseMatrix& C, const DenseMatrix& D, std::size_t m, std::size_t k, double gamma_m,
                 double gamma_tilde, double beta_new) {
        const DenseMatrix Ck = transformed(C.block(m, k));
        const DenseMatrix Dk = transformed(D.block(m, k));
        DenseMatrix Ephi = transformed(phi_.block(m, m));
        DenseMatrix Epsi = transformed(psi_.block(m, m));
        const DenseMatrix Omega_m = transformed(omega_.block(m, m));
        for (std::size_t i = 0; i < m; ++i) Ephi(i, i) = Epsi(i, i) = 0.0;

        const DenseMatrix phi_k = multiply_transposed(Ck, multiply(Ephi, Ck));
        const DenseMatrix psi_k = multiply_transposed(Dk, multiply(Epsi, Dk));
        const DenseMatrix omega_k = multiply_transposed(Ck, multiply(Omega_m, Dk));

        // Column m of Psi/Omega and the d_{k+1} direction feed the new coupling column.
        DenseMatrix dnext(m, 1);
        for (std::size_t i = 0; i < m; ++i) dnext(i, 0) = magnitudes_ ? std::abs(D(i, k)) : D(i, k);
        const DenseMatrix psi_d = multiply(Epsi, dnext);
        const DenseMatrix omega_d = multiply(Omega_m, dnext);
        const double a = term(gamma_m, C(m - 1, k - 1));
        const double g = magnitudes_ ? std::abs(gamma_tilde) : gamma_tilde;
        DenseMatrix psi_col(m, 1), omega_col(m, 1);
        for (std::size_t i = 0; i < m; ++i) {
            psi_col(i, 0) = a * (magnitudes_ ? std::abs(psi_(i, m)) : psi_(i, m)) + g * psi_d(i, 0);
            omega_col(i, 0) = a * (magnitudes_ ? std::abs(omega_(i, m)) : omega_(i, m)) + g * omega_d(i, 0);
        }
        const DenseMatrix psi_new = multiply_transposed(Dk, psi_col);
        const DenseMatrix omega_new = multiply_transposed(Ck, omega_col);

        reset();
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < k; ++i) {
                phi_(i, j) = i == j ? 1.0 : clamp(phi_k(i, j));
                psi_(i, j) = i == j ? 1.0 : clamp(psi_k(i, j));
                omega_(i, j) = clamp(omega_k(i, j));
            }
        for (std::size_t i = 0; i < k; ++i) {
            psi_(i, k) = psi_(k, i) = clamp(psi_new(i, 0) / beta_new);
            omega_(i, k) = clamp(omega_new(i, 0) / beta_new);
        }
    }

    /// Estimates after q_k was replaced by a vector explicitly orthogonalized
    /// against P_k and Q_k.
    void reseed_column(std::size_t k) {
        constexpr double eps = std::numeric_limits<double>::epsilon();
        for (std::size_t i = 0; i < k; ++i) {
            psi_(i, k) = psi_(k, i) = eps;
            omega_(i, k) = eps;
        }
    }

    /// Estimates after p_j was replaced by a vector explicitly orthogonalized
    /// against P_j and Q_{j+1}.
    void reseed_row(std::size_t j) {
        constexpr double eps = std::numeric_limits<double>::epsilon();
        for (std::size_t i = 0; i < j; ++i) phi_(i, j) = phi_(j, i) = eps;
        for (std::size_t i = 0; i <= j; ++i) omega_(j, i) = eps;
    }

    /// Identity/zero estimates (the state right after start()).
    void reset() {
        phi_ = DenseMatrix(m_, m_);
        psi_ = DenseMatrix(m_ + 1, m_ + 1);
        omega_ = DenseMatrix(m_, m_ + 1);
        for (std::size_t i = 0; i < m_; ++i) phi_(i, i) = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) psi_(i, i) = 1.0;
    }

private:
    // sign(0) = +1 so the rounding term is always added.
    static double signum(double x) noexcept { return x < 0.0 ? -1.0 : 1.0; }

    double term(double coef, double estimate) const noexcept {
        return magnitudes_ ? std::abs(coef * estimate) : coef * estimate;
    }
    double neg(double x) const noexcept { return magnitudes_ ? x : -x; }
    DenseMatrix transformed(DenseMatrix X) const {
        if (magnitudes_)
            for (std::size_t j = 0; j < X.cols(); ++j)
                for (double& v : X.col(j)) v = std::abs(v);
        return X;
    }
    // The unnormalized omega values carry the opposite sign of the inner product.
    double flip(double x) const noexcept { return magnitudes_ ? x : -x; }

    // Inner products of unit vectors never exceed 1; without reorthogonalization
    // the recurrences would otherwise grow without bound.
    static double clamp(double x) noexcept { return std::clamp(x, -1.0, 1.0); }

    std::size_t m_ = 0;
    std::size_t n_ = 0;
    double threshold_ = 0.0;
    double anorm_ = 0.0;
    double rounding_scale_ = 1.0;
    bool magnitudes_ = true;
    DenseMatrix phi_;
    DenseMatrix psi_;
    DenseMatrix omega_;
    std::vector<double> work_;   // unnormalized phi (left step) or psi (right step)
    std::vector<double> work2_;  // unnormalized omega, in the recurrence's sign convention
};

/// One modified Gram-Schmidt pass of x against the listed columns of
/// `basis`, in list order. `on_tau(i, tau)` sees each coefficient removed.
template <class OnTau>
void reorthogonalize(std::span<double> x, const DenseMatrix& basis, std::span<const std::size_t> indices,
                     OnTau&& on_tau) {
    for (const std::size_t i : indices) {
        const double tau = dot(basis.col(i), x);
        axpy(-tau, basis.col(i), x);
        on_tau(i, tau);
    }
}

}  // namespace skeweig

#endif  // SKEWEIG_REORTH_HPP
