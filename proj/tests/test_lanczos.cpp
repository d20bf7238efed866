#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "test_util.hpp"

using namespace skeweig;

namespace {

SkewSparseMatrix rot2() {
    const std::vector<Triplet> t{{0, 1, 2.0}, {1, 0, -2.0}};
    return from_triplets(2, t);
}

}  // namespace

TEST(Start, NormalizesStartVector) {
    const auto A = rot2();
    const std::vector<double> q1{2, 0};
    const auto st = start(A, q1, 1);
    EXPECT_EQ(st.Q(0, 0), 1.0);
    EXPECT_EQ(st.Q(1, 0), 0.0);
    EXPECT_EQ(st.steps, 0u);
}

TEST(Start, RejectsZeroVector) {
    const auto A = rot2();
    const std::vector<double> q1{0, 0};
    EXPECT_THROW(start(A, q1, 1), ZeroStartVector);
}

TEST(Start, RejectsWrongLength) {
    const auto A = rot2();
    const std::vector<double> q1{1, 0, 0};
    EXPECT_THROW(start(A, q1, 1), DimensionMismatch);
}

TEST(Step, RotationBlockFirstStep) {
    const auto A = rot2();
    const std::vector<double> q1{1, 0};
    auto st = start(A, q1, 1);
    OrthoEstimates est(1, 2);
    const auto info = step(st, A, est);
    EXPECT_EQ(st.betas[0], 2.0);
    EXPECT_EQ(st.P(0, 0), 0.0);
    EXPECT_EQ(st.P(1, 0), -1.0);
    EXPECT_EQ(info.breakdown, Breakdown::gamma);
    EXPECT_EQ(st.gammas[0], 0.0);
    EXPECT_EQ(st.steps, 1u);
}

TEST(Step, RefusesAfterBreakdownOrAtCapacity) {
    const auto A = rot2();
    const std::vector<double> q1{1, 0};
    auto st = start(A, q1, 1);
    OrthoEstimates est(1, 2);
    step(st, A, est);
    EXPECT_THROW(step(st, A, est), Error);

    const auto B = testutil::random_skew(20, 0.3, 1);
    const std::vector<double> ones(20, 1.0);
    auto st2 = start(B, ones, 2);
    OrthoEstimates est2(2, 20);
    step(st2, B, est2);
    step(st2, B, est2);
    EXPECT_THROW(step(st2, B, est2), Error);
}

TEST(Step, FullReorthogonalizationKeepsRelations) {
    const auto A = testutil::random_skew(40, 0.2, 40);
    const double anorm = oracle::jacobi_singular_values(A.to_dense()).front();
    const std::vector<double> q1(40, 1.0);
    auto st = start(A, q1, 10);
    OrthoEstimates est(10, 40);
    for (int j = 0; j < 10; ++j) step(st, A, est, {ReorthMode::full, true});
    const auto [r1, r2] = testutil::decomposition_residuals(A, st);
    EXPECT_LE(r1, 1e-12 * anorm);
    EXPECT_LE(r2, 1e-12 * anorm);
    const auto o = oracle::measure_orthogonality(st.left_basis(), st.right_basis());
    EXPECT_LE(o[0], 1e-12);
    EXPECT_LE(o[1], 1e-12);
    EXPECT_LE(o[2], 1e-12);
}

TEST(Step, ProductCountAndUnitNorms) {
    const auto A = testutil::random_skew(80, 0.1, 3);
    const std::vector<double> q1(80, 1.0);
    auto st = start(A, q1, 20);
    OrthoEstimates est(20, 80);
    A.reset_matvec_count();
    for (std::size_t j = 1; j <= 20; ++j) {
        step(st, A, est);
        EXPECT_EQ(A.matvec_count(), 2 * j);
        EXPECT_NEAR(norm2(st.P.col(j - 1)), 1.0, 1e-14);
        EXPECT_NEAR(norm2(st.Q.col(j)), 1.0, 1e-14);
        EXPECT_GT(st.betas[j - 1], 0.0);
        EXPECT_GT(st.gammas[j - 1], 0.0);
    }
}

TEST(Step, RitzValuesInterlace) {
    const auto A = testutil::random_skew(100, 0.1, 14);
    const std::vector<double> q1(100, 1.0);
    auto st = start(A, q1, 30);
    OrthoEstimates est(30, 100);
    std::vector<double> prev;
    for (std::size_t j = 0; j < 30; ++j) {
        step(st, A, est);
        const auto sv = singular_values(st.bidiagonal());
        const double tol = 1e-13 * sv.front();
        for (std::size_t i = 0; i < prev.size(); ++i) {
            EXPECT_GE(sv[i], prev[i] - tol);
            EXPECT_LE(sv[i + 1], prev[i] + tol);
        }
        prev = sv;
    }
}

TEST(Step, PartialModeSemiOrthogonalAndAccurate) {
    const auto A = testutil::random_skew(300, 0.03, 15);
    const double anorm = oracle::jacobi_singular_values(A.to_dense()).front();
    const std::vector<double> q1(300, 1.0);
    auto st = start(A, q1, 60);
    OrthoEstimates est(60, 300);
    const double bound = 2 * std::sqrt(std::numeric_limits<double>::epsilon() / 60);
    for (std::size_t j = 0; j < 60; ++j) {
        step(st, A, est);
        const auto o = oracle::measure_orthogonality(st.left_basis(), st.right_basis());
        EXPECT_LE(std::max({o[0], o[1], o[2]}), bound) << "step " << j;
    }
    const auto [r1, r2] = testutil::decomposition_residuals(A, st);
    EXPECT_LE(std::hypot(r1, r2), std::sqrt(std::numeric_limits<double>::epsilon()) * anorm);
}

TEST(Step, BetaBreakdownOnNullVector) {
    // e3 spans the null space of a 3x3 matrix supported on the leading block.
    const std::vector<Triplet> t{{0, 1, 1.5}, {1, 0, -1.5}};
    const auto A = from_triplets(3, t);
    const std::vector<double> q1{0, 0, 1};
    auto st = start(A, q1, 1);
    OrthoEstimates est(1, 3);
    A.reset_matvec_count();
    const auto info = step(st, A, est);
    EXPECT_EQ(info.breakdown, Breakdown::beta);
    EXPECT_EQ(A.matvec_count(), 1u);
    EXPECT_EQ(st.betas[0], 0.0);
    EXPECT_EQ(st.steps, 1u);
}

TEST(Resume, AfterBetaBreakdownKeepsRelations) {
    const std::vector<Triplet> t{{0, 1, 1.5}, {1, 0, -1.5}, {2, 3, 0.5}, {3, 2, -0.5}};
    const auto A = from_triplets(5, t);
    const std::vector<double> q1{0, 0, 0, 0, 1};
    auto st = start(A, q1, 2);
    OrthoEstimates est(2, 5);
    est.raise_anorm(1.5);
    step(st, A, est);
    ASSERT_EQ(st.breakdown, Breakdown::beta);
    std::mt19937_64 rng(4);
    const auto rr = resume(st, A, est, rng);
    EXPECT_FALSE(rr.exhausted);
    EXPECT_EQ(rr.mv_count, 1u);
    EXPECT_EQ(st.breakdown, Breakdown::none);
    EXPECT_GT(st.gammas[0], 0.0);
    const auto [r1, r2] = testutil::decomposition_residuals(A, st);
    EXPECT_LE(r1, 1e-14);
    EXPECT_LE(r2, 1e-14);
    const auto o = oracle::measure_orthogonality(st.left_basis(), st.right_basis());
    EXPECT_LE(std::max({o[0], o[1], o[2]}), 1e-14);
    step(st, A, est);
    const auto [s1, s2] = testutil::decomposition_residuals(A, st);
    EXPECT_LE(s1, 1e-14);
    EXPECT_LE(s2, 1e-14);
}

TEST(Resume, AfterGammaBreakdownKeepsRelations) {
    const std::vector<Triplet> t{{0, 1, 2.0}, {1, 0, -2.0}, {2, 3, 1.0}, {3, 2, -1.0}};
    const auto A = from_triplets(4, t);
    const std::vector<double> q1{1, 0, 0, 0};
    auto st = start(A, q1, 2);
    OrthoEstimates est(2, 4);
    step(st, A, est);
    ASSERT_EQ(st.breakdown, Breakdown::gamma);
    std::mt19937_64 rng(5);
    const auto rr = resume(st, A, est, rng);
    EXPECT_FALSE(rr.exhausted);
    EXPECT_EQ(rr.mv_count, 0u);
    step(st, A, est);
    EXPECT_EQ(st.breakdown, Breakdown::gamma);
    const auto sv = singular_values(st.bidiagonal());
    EXPECT_NEAR(sv[0], 2.0, 1e-15);
    EXPECT_NEAR(sv[1], 1.0, 1e-15);
    const auto [r1, r2] = testutil::decomposition_residuals(A, st);
    EXPECT_LE(r1, 1e-14);
    EXPECT_LE(r2, 1e-14);
}

TEST(Resume, ExhaustedWhenBasesFillTheSpace) {
    const auto A = rot2();
    const std::vector<double> q1{1, 0};
    auto st = start(A, q1, 1);
    OrthoEstimates est(1, 2);
    step(st, A, est);
    std::mt19937_64 rng(6);
    EXPECT_TRUE(resume(st, A, est, rng).exhausted);
}
