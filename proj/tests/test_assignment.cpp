#include "subco/assignment.hpp"
#include "subco/errors.hpp"
#include "subco/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace subco;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(lo, hi);
    return m;
}

Vector random_vector(Eigen::Index n, Rng& rng) {
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v[k] = rng.normal();
    return v;
}

AssignmentConfig cfg_of(double tau, double delta) {
    AssignmentConfig c;
    c.tau = tau;
    c.delta_match = delta;
    return c;
}

double objective(const Matrix& s, const AssignmentConfig& cfg, const AssignmentGrad& g) {
    const auto r = soft_assign(s, cfg);
    double v = (r.assignment.array() * g.assignment.array()).sum();
    if (g.deletion.size()) v += r.deletion.dot(g.deletion);
    if (g.initiation.size()) v += r.initiation.dot(g.initiation);
    return v;
}

// Smallest |R - C| over all entries; finite differences are invalid near a min tie.
double min_tie_gap(const AssignmentResult& r) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < r.assignment.size(); ++k)
        gap = std::min(gap, std::abs(r.forward.data()[k] - r.backward.data()[k]));
    return gap;
}

}  // namespace

TEST(ScoreMatrix, IdentityBasis) {
    const Matrix e = Matrix::Identity(2, 2);
    EXPECT_EQ(score_matrix(e, e), e);
}

TEST(ScoreMatrix, ZeroEmbeddingsGiveZeroScores) {
    Rng rng(1);
    EXPECT_TRUE(score_matrix(random_matrix(3, 4, rng), Matrix::Zero(5, 4)).isZero(0.0));
}

TEST(ScoreMatrix, MatchesTripleLoop) {
    Rng rng(2);
    const Matrix y = random_matrix(3, 4, rng), x = random_matrix(5, 4, rng);
    const Matrix s = score_matrix(y, x);
    ASSERT_EQ(s.rows(), 3);
    ASSERT_EQ(s.cols(), 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) {
            double ref = 0.0;
            for (int d = 0; d < 4; ++d) ref += y(i, d) * x(j, d);
            EXPECT_NEAR(s(i, j), ref, 1e-14);
        }
}

TEST(ScoreMatrix, WidthMismatchAndEmptyInputs) {
    EXPECT_THROW(score_matrix(Matrix::Zero(2, 3), Matrix::Zero(2, 4)), DimensionError);
    const Matrix s = score_matrix(Matrix(0, 3), Matrix::Zero(2, 3));
    EXPECT_EQ(s.rows(), 0);
    EXPECT_EQ(s.cols(), 2);
}

TEST(SoftAssign, ScoreEqualToDeltaSplitsEvenly) {
    for (double tau : {0.1, 1.0, 10.0, 300.0}) {
        const auto r = soft_assign(Matrix::Constant(1, 1, 0.5), cfg_of(tau, 0.5));
        EXPECT_EQ(r.forward(0, 0), 0.5);
        EXPECT_EQ(r.deletion[0], 0.5);
        EXPECT_EQ(r.backward(0, 0), 0.5);
        EXPECT_EQ(r.initiation[0], 0.5);
    }
}

TEST(SoftAssign, ScalarLogTwoCase) {
    // exp(ln 2) = 2 against exp(0) = 1: the pair gets 2/3, the no-match slot 1/3.
    const auto r = soft_assign(Matrix::Constant(1, 1, std::log(2.0)), cfg_of(1.0, 0.0));
    EXPECT_NEAR(r.forward(0, 0), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.deletion[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.assignment(0, 0), 2.0 / 3.0, 1e-15);
}

TEST(SoftAssign, StrongDiagonalIsNearIdentity) {
    Matrix s(2, 2);
    s << 10, -10, -10, 10;
    const auto r = soft_assign(s, cfg_of(1.0, 0.0));
    EXPECT_TRUE(r.assignment.isApprox(Matrix::Identity(2, 2), 1e-3));
    EXPECT_LT((r.assignment - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT(r.deletion.maxCoeff(), 1e-3);
}

TEST(SoftAssign, SimplexInvariantsOnRandomInstances) {
    Rng rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = 1 + static_cast<Eigen::Index>(rng.below(6));
        const auto k = 1 + static_cast<Eigen::Index>(rng.below(6));
        const auto cfg = cfg_of(rng.uniform(0.1, 30.0), rng.uniform(-1.0, 1.0));
        const auto r = soft_assign(random_matrix(m, k, rng, -2.0, 2.0), cfg);
        for (Eigen::Index i = 0; i < m; ++i) ASSERT_NEAR(r.forward.row(i).sum() + r.deletion[i], 1.0, 1e-9);
        for (Eigen::Index j = 0; j < k; ++j) ASSERT_NEAR(r.backward.col(j).sum() + r.initiation[j], 1.0, 1e-9);
        ASSERT_GE(r.forward.minCoeff(), 0.0);
        ASSERT_GE(r.backward.minCoeff(), 0.0);
        for (Eigen::Index e = 0; e < r.assignment.size(); ++e) {
            ASSERT_LE(r.assignment.data()[e], r.forward.data()[e]);
            ASSERT_LE(r.assignment.data()[e], r.backward.data()[e]);
            ASSERT_EQ(r.assignment.data()[e], std::min(r.forward.data()[e], r.backward.data()[e]));
        }
        ASSERT_LE(r.assignment.rowwise().sum().maxCoeff(), 1.0 + 1e-12);
        ASSERT_LE(r.assignment.colwise().sum().maxCoeff(), 1.0 + 1e-12);
    }
}

TEST(SoftAssign, LargeLogitsDoNotOverflow) {
    Matrix s(2, 3);
    s << 1000, -1000, 0, 3, 1000, -999;
    const auto r = soft_assign(s, cfg_of(10.0, 0.5));
    EXPECT_TRUE(r.assignment.allFinite());
    EXPECT_NEAR(r.assignment(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(r.assignment(1, 1), 1.0, 1e-12);
}

TEST(SoftAssign, NonFiniteScoresThrow) {
    Matrix s = Matrix::Zero(2, 2);
    s(1, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(soft_assign(s, {}), std::invalid_argument);
    s(1, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(soft_assign(s, {}), std::invalid_argument);
}

TEST(SoftAssign, EmptySides) {
    const auto no_cols = soft_assign(Matrix(3, 0), {});
    EXPECT_EQ(no_cols.assignment.rows(), 3);
    EXPECT_EQ(no_cols.assignment.cols(), 0);
    EXPECT_EQ(no_cols.deletion, Vector::Ones(3));
    EXPECT_EQ(no_cols.initiation.size(), 0);
    const auto no_rows = soft_assign(Matrix(0, 2), {});
    EXPECT_EQ(no_rows.initiation, Vector::Ones(2));
    EXPECT_EQ(no_rows.deletion.size(), 0);
}

TEST(SoftAssign, RaisingAScoreDoesNotLowerItsForwardOrBackwardMass) {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        Matrix s = random_matrix(3, 4, rng);
        const auto cfg = cfg_of(rng.uniform(0.5, 20.0), 0.5);
        const auto before = soft_assign(s, cfg);
        const auto i = static_cast<Eigen::Index>(rng.below(3)), j = static_cast<Eigen::Index>(rng.below(4));
        s(i, j) += rng.uniform(0.0, 1.0);
        const auto after = soft_assign(s, cfg);
        EXPECT_GE(after.forward(i, j), before.forward(i, j));
        EXPECT_GE(after.backward(i, j), before.backward(i, j));
    }
}

TEST(SoftAssign, HighTemperatureSaturatesDominantPair) {
    Matrix s(2, 2);
    s << 0.9, 0.2, 0.1, 0.3;
    double prev = 0.0;
    for (double tau : {1.0, 10.0, 100.0, 1000.0}) {
        const double a = soft_assign(s, cfg_of(tau, 0.5)).assignment(0, 0);
        EXPECT_GE(a, prev);
        prev = a;
    }
    EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(SoftAssign, PermutationEquivariance) {
    Rng rng(5);
    const Matrix y = random_matrix(4, 3, rng), x = random_matrix(5, 3, rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> pr(4), pc(5);
    pr.indices() << 2, 0, 3, 1;
    pc.indices() << 4, 1, 0, 2, 3;
    const auto base = soft_assign(score_matrix(y, x), {});
    const auto perm = soft_assign(score_matrix(pr * y, pc * x), {});
    EXPECT_TRUE(perm.assignment.isApprox(pr * base.assignment * pc.transpose(), 1e-14));
    EXPECT_TRUE(perm.deletion.isApprox(pr * base.deletion, 1e-14));
    EXPECT_TRUE(perm.initiation.isApprox(pc * base.initiation, 1e-14));
}

TEST(SoftAssignBackward, ZeroUpstreamGivesZero) {
    Rng rng(3);
    const Matrix s = random_matrix(2, 3, rng);
    EXPECT_TRUE(soft_assign_backward(s, {}, {Matrix::Zero(2, 3), {}, {}}).isZero(0.0));
    EXPECT_TRUE(soft_assign_backward(s, {}, {}).isZero(0.0));
}

TEST(SoftAssignBackward, RowMassHasZeroGradient) {
    // Upstream of one on every R entry of a row and on its d slot. Entries
    // where R < C route everything through the forward softmax, so the row
    // total is constant and its gradient vanishes.
    Matrix s(1, 3);
    s << 0.2, -0.4, 0.7;
    const AssignmentConfig cfg = cfg_of(2.0, 0.2);
    const auto fwd = soft_assign(s, cfg);
    ASSERT_TRUE((fwd.forward.array() < fwd.backward.array()).all());
    const Matrix g = soft_assign_backward(s, cfg, {Matrix::Ones(1, 3), Vector::Ones(1), {}});
    EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SoftAssignBackward, MatchesCentralFiniteDifferences) {
    constexpr double h = 1e-6;
    Rng rng(99);
    int checked = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 200 && checked < 60; ++trial) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(2));
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.below(2));
        const auto cfg = cfg_of(rng.uniform(0.5, 5.0), rng.uniform(-0.5, 0.5));
        const Matrix s = random_matrix(m, k, rng);
        const auto fwd = soft_assign(s, cfg);
        if (min_tie_gap(fwd) < 1e-4) continue;
        const AssignmentGrad g{random_matrix(m, k, rng), random_vector(m, rng), random_vector(k, rng)};
        const Matrix analytic = soft_assign_backward(s, cfg, g);
        EXPECT_TRUE(analytic.isApprox(soft_assign_backward(fwd, cfg, g), 1e-15));
        for (Eigen::Index e = 0; e < s.size(); ++e) {
            Matrix sp = s, sm = s;
            sp.data()[e] += h;
            sm.data()[e] -= h;
            const double numeric = (objective(sp, cfg, g) - objective(sm, cfg, g)) / (2 * h);
            const double a = analytic.data()[e];
            worst = std::max(worst, std::abs(numeric - a) / std::max(1e-3, std::abs(numeric) + std::abs(a)));
        }
        ++checked;
    }
    EXPECT_GE(checked, 40);
    EXPECT_LT(worst, 1e-5);
}

TEST(SoftAssignBackward, TieRoutesGradientToForward) {
    // 1x1 with equal logits: R == C exactly, so only the R path is differentiated.
    const Matrix s = Matrix::Constant(1, 1, 0.3);
    const AssignmentConfig cfg = cfg_of(2.0, 0.1);
    const auto fwd = soft_assign(s, cfg);
    ASSERT_EQ(fwd.forward(0, 0), fwd.backward(0, 0));
    const Matrix g = soft_assign_backward(s, cfg, {Matrix::Ones(1, 1), {}, {}});
    const double r = fwd.forward(0, 0);
    EXPECT_NEAR(g(0, 0), cfg.tau * r * (1 - r), 1e-15);
}

TEST(SoftAssignBackward, ShapeMismatchThrows) {
    EXPECT_THROW(soft_assign_backward(Matrix::Zero(2, 2), {}, {Matrix::Zero(2, 3), {}, {}}), DimensionError);
    EXPECT_THROW(soft_assign_backward(Matrix::Zero(2, 2), {}, {{}, Vector::Zero(3), {}}), DimensionError);
}

TEST(AssignmentConfig, Validation) {
    EXPECT_THROW(cfg_of(0.0, 0.5).validate(), ConfigError);
    EXPECT_THROW(cfg_of(-1.0, 0.5).validate(), ConfigError);
    EXPECT_NO_THROW(cfg_of(1.0, -3.0).validate());
}
