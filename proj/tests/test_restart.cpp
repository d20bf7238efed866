#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "test_util.hpp"

using namespace skeweig;

namespace {

struct Process {
    LanczosState st;
    OrthoEstimates est;
};

Process expand(const SkewSparseMatrix& A, std::size_t m, ReorthPolicy policy = {}) {
    const std::vector<double> q1(A.n(), 1.0);
    Process p{start(A, q1, m), OrthoEstimates(m, A.n())};
    while (p.st.steps < m) step(p.st, A, p.est, policy);
    return p;
}

// Runs one restart and returns the bidiagonal SVD it was based on.
BidiagonalSVD restart_once(Process& p, std::size_t k) {
    const auto s = svd(p.st.bidiagonal());
    p.est.raise_anorm(s.thetas.front());
    const auto res = ritz_residuals(s, p.st.coupling());
    const auto plan = select_shifts(s, k, res[k - 1]);
    const auto sw = implicit_qr_sweeps(p.st.bidiagonal(), plan.shifts);
    const std::size_t m = p.st.steps;
    const double gamma_m = p.st.coupling();
    const auto cr = compact(p.st, sw, k, p.est.anorm());
    update_estimates(p.est, sw, m, k, gamma_m, cr.degenerate ? 1.0 : cr.beta_new);
    if (cr.degenerate) {
        std::mt19937_64 rng(k);
        reseed(p.st, p.est, rng);
    }
    return s;
}

}  // namespace

TEST(SelectShifts, ExactShifts) {
    const std::vector<double> thetas{5, 4, 3, 2, 1};
    const auto plan = select_shifts(thetas, 2, 1e-3);
    EXPECT_EQ(plan.shifts, (std::vector<double>{3, 2, 1}));
    EXPECT_EQ(plan.bad_shifts, 0u);
    EXPECT_EQ(plan.k, 2u);
    EXPECT_EQ(plan.m, 5u);
}

TEST(SelectShifts, BadShiftReplacedByZero) {
    const std::vector<double> thetas{2.0, 1.0, 0.9995, 0.5};
    const auto plan = select_shifts(thetas, 2, 0.0);
    EXPECT_EQ(plan.bad_shifts, 1u);
    EXPECT_EQ(plan.shifts, (std::vector<double>{0.5, 0.0}));
}

TEST(SelectShifts, NoShiftsWhenKEqualsM) {
    const std::vector<double> thetas{3, 2};
    EXPECT_TRUE(select_shifts(thetas, 2, 0.1).shifts.empty());
    EXPECT_THROW(select_shifts(thetas, 3, 0.1), InvalidOptions);
    EXPECT_THROW(select_shifts(thetas, 0, 0.1), InvalidOptions);
}

TEST(SelectShifts, ShiftsAreDecreasingAndCounted) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sv = singular_values(testutil::random_bidiagonal(20, rng));
        const auto plan = select_shifts(sv, 5, 0.01);
        ASSERT_EQ(plan.shifts.size(), 15u);
        for (std::size_t i = 1; i < plan.shifts.size(); ++i) EXPECT_GE(plan.shifts[i - 1], plan.shifts[i]);
    }
}

TEST(SelectShifts, ClusteredSpectrumProducesBadShifts) {
    std::vector<double> sig{3.0, 2.0, 1.0, 0.9995};
    for (int i = 0; i < 36; ++i) sig.push_back(0.1 + 0.01 * i);
    const auto A = testutil::prescribed_spectrum(sig, 0, 2);
    SolverOptions opts;
    opts.k = 3;
    opts.m = 12;
    opts.tol = 1e-12;
    std::size_t bad = 0;
    const auto r = solve(A, opts);
    for (const auto& c : r.trace.cycles) bad += c.bad_shifts;
    EXPECT_GT(bad, 0u);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.pairs[2].sigma, 1.0, 1e-10);
}

TEST(Compact, KEqualsMIsNoOp) {
    const auto A = testutil::random_skew(30, 0.2, 1);
    auto p = expand(A, 4);
    const auto P = p.st.left_basis();
    const auto Q = p.st.right_basis();
    const auto betas = p.st.betas;
    const auto gammas = p.st.gammas;
    const auto sw = implicit_qr_sweeps(p.st.bidiagonal(), {});
    const auto cr = compact(p.st, sw, 4, 1.0);
    EXPECT_FALSE(cr.degenerate);
    EXPECT_EQ(cr.beta_new, gammas[3]);
    EXPECT_EQ(p.st.steps, 4u);
    EXPECT_EQ(max_abs_difference(p.st.left_basis(), P), 0.0);
    EXPECT_EQ(max_abs_difference(p.st.right_basis(), Q), 0.0);
    EXPECT_EQ(p.st.betas, betas);
    EXPECT_EQ(p.st.gammas, gammas);
}

TEST(Compact, RejectsBadArguments) {
    const auto A = testutil::random_skew(30, 0.2, 1);
    auto p = expand(A, 4);
    const auto sw = implicit_qr_sweeps(p.st.bidiagonal(), {});
    EXPECT_THROW(compact(p.st, sw, 5, 1.0), InvalidOptions);
    EXPECT_THROW(compact(p.st, sw, 0, 1.0), InvalidOptions);
    const auto sw3 = implicit_qr_sweeps(BidiagonalMatrix{{1, 1, 1}, {1, 1}}, {});
    EXPECT_THROW(compact(p.st, sw3, 2, 1.0), DimensionMismatch);
}

TEST(Compact, ThreeToOneKeepsRelations) {
    const auto A = testutil::random_skew(10, 0.5, 10);
    auto p = expand(A, 3, {ReorthMode::full, true});
    const double anorm = oracle::jacobi_singular_values(A.to_dense()).front();
    restart_once(p, 1);
    EXPECT_EQ(p.st.steps, 1u);
    const auto [r1, r2] = testutil::decomposition_residuals(A, p.st);
    EXPECT_LE(r1, 1e-13 * anorm);
    EXPECT_LE(r2, 1e-13 * anorm);
    EXPECT_NEAR(norm2(p.st.Q.col(1)), 1.0, 1e-14);
    const auto o = oracle::measure_orthogonality(p.st.left_basis(), p.st.right_basis());
    EXPECT_LE(std::max({o[0], o[1], o[2]}), 1e-13);
}

TEST(Compact, RetainsWantedRitzValues) {
    const auto A = testutil::random_skew(200, 0.05, 20);
    auto p = expand(A, 20);
    const auto before = restart_once(p, 5);
    const auto after = singular_values(p.st.bidiagonal());
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(after[j], before.thetas[j], 1e-11 * before.thetas[0]);
}

TEST(Compact, UsesNoMatrixProducts) {
    const auto A = testutil::random_skew(100, 0.1, 21);
    auto p = expand(A, 20);
    A.reset_matvec_count();
    restart_once(p, 4);
    EXPECT_EQ(A.matvec_count(), 0u);
}

TEST(Compact, RelationsAndOrthogonalityAfterRepeatedRestarts) {
    const auto A = testutil::random_skew(400, 0.02, 22);
    const double anorm = oracle::jacobi_singular_values(A.to_dense()).front();
    const std::size_t m = 30, k = 6;
    const double bound = 2 * std::sqrt(std::numeric_limits<double>::epsilon() / m);
    auto p = expand(A, m);
    for (int cycle = 0; cycle < 5; ++cycle) {
        restart_once(p, k);
        const auto [r1, r2] = testutil::decomposition_residuals(A, p.st);
        EXPECT_LE(std::hypot(r1, r2), 1e-11 * anorm) << "cycle " << cycle;
        const auto o = oracle::measure_orthogonality(p.st.left_basis(), p.st.right_basis());
        EXPECT_LE(std::max({o[0], o[1], o[2]}), bound) << "cycle " << cycle;
        while (p.st.steps < m) step(p.st, A, p.est);
    }
}

TEST(Reseed, ProducesOrthogonalUnitVector) {
    const auto A = testutil::random_skew(50, 0.2, 24);
    auto p = expand(A, 10, {ReorthMode::full, true});
    const auto sw = implicit_qr_sweeps(p.st.bidiagonal(), {});
    compact(p.st, sw, 4, 1.0);
    std::mt19937_64 rng(1);
    reseed(p.st, p.est, rng);
    EXPECT_EQ(p.st.gammas[3], 0.0);
    EXPECT_NEAR(norm2(p.st.Q.col(4)), 1.0, 1e-14);
    const auto o = oracle::measure_orthogonality(p.st.left_basis(), p.st.right_basis());
    EXPECT_LE(std::max({o[0], o[1], o[2]}), 1e-13);
    EXPECT_EQ(p.est.psi(0, 4), std::numeric_limits<double>::epsilon());
}
