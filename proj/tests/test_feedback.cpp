#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "cbc/feedback.hpp"
#include "cbc/laws.hpp"
#include "support/oracles.hpp"

using namespace cbc;

TEST(Washout, ControlExamples) {
    WashoutGains g{-5.0, 0.1, 0.3, 2.0};
    EXPECT_EQ(washout_u(0.3, 2.0, g), 0.0);
    EXPECT_NEAR(washout_u(0.2, 1.0, {-5.0, 0.1, 0.0, 0.0}), -0.9, 1e-15);
}

TEST(Zie, ControlExamples) {
    const ZieGains g{50.0, -0.2, 0.2, 0.0, 0.0};
    EXPECT_NEAR(zie_u(0.1, 0.3, g), 0.04, 1e-15);
    // Any point on the line through the reference with direction (K_mu, -K_y).
    const ZieGains h{50.0, -0.2, 0.7, 0.4, -1.1};
    for (double t : {-2.0, 0.5, 3.0}) EXPECT_NEAR(zie_u(0.4 + 0.7 * t, -1.1 + 0.2 * t, h), 0.0, 1e-14);
    const ZieGains zero{50.0, 0.0, 0.0, 1.0, 1.0};
    EXPECT_EQ(zie_u(-7.0, 3.0, zero), 0.0);
}

TEST(Washout, AdmissibilityExamples) {
    EXPECT_TRUE(washout_gains_admissible({1.0, 1.0, 0.0, 1, {}}, {-5.0, 0.1}));
    for (double kst : {-5.0, 0.0, 3.0})
        for (double kwo : {-0.1, 0.1}) EXPECT_FALSE(washout_gains_admissible({0.0, 1.0, 0.0, 1, {}}, {kst, kwo}));
    EXPECT_TRUE(washout_gains_admissible({-1.0, 1.0, 0.0, 1, {}}, {0.0, -0.1}));
}

TEST(Zie, AdmissibilityExamples) {
    EXPECT_TRUE(zie_gains_admissible({1.0, 1.0, 0.01, 1, {}}, {50.0, -0.2, 0.1}));
    EXPECT_TRUE(zie_gains_admissible({1.0, 1.0, 0.01, 1, {}}, {0.0, -300.0, -2.0}));
    // Below the large-gain bound |K_y| > lambda^2 / |wfmu| = 100.
    EXPECT_FALSE(zie_gains_admissible({1.0, 1.0, 0.01, 1, {}}, {0.0, -90.0, -2.0}));
    EXPECT_TRUE(zie_gains_admissible({-1.0, 1.0, 0.3, 1, {}}, {50.0, 0.0, 0.0}));
    EXPECT_FALSE(zie_gains_admissible({1.0, 1.0, 0.3, 1, {}}, {50.0, 0.0, 0.0}));
}

namespace {

// Slow-plane closed loops assembled from scratch:
//   washout: y' = l y + w u, y_wo' = u, u = K_st y + K_wo y_wo
//   ZIE:     y' = l y + m mu + a w u, mu' = u, u = K_y y + K_mu mu
Eigen::Matrix2d washout_loop(double l, double w, double kst, double kwo) {
    Eigen::Matrix2d A;
    A << l + w * kst, w * kwo, kst, kwo;
    return A;
}

Eigen::Matrix2d zie_loop(double l, double w, double m, double a, double ky, double kmu) {
    Eigen::Matrix2d A;
    A << l + a * w * ky, m + a * w * kmu, ky, kmu;
    return A;
}

bool hurwitz(const Eigen::Matrix2d& A) {
    const auto ev = A.eigenvalues();
    return ev[0].real() < 0.0 && ev[1].real() < 0.0;
}

// Keep the spectrum away from the imaginary axis so the eigenvalue oracle
// is not decided by round-off.
bool marginal(const Eigen::Matrix2d& A) {
    const auto ev = A.eigenvalues();
    return std::abs(ev[0].real()) < 1e-9 || std::abs(ev[1].real()) < 1e-9;
}

}  // namespace

TEST(FeedbackProperty, WashoutAdmissibleIffHurwitz) {
    oracle::Gen g(31);
    int checked = 0;
    for (int k = 0; k < 3000; ++k) {
        const SlowDirectionInfo info{g.real(-3, 3), g.real(-2, 2), 0.0, 1, {}};
        const WashoutGains gains{g.real(-10, 10), g.real(-1, 1)};
        const Eigen::Matrix2d A = washout_loop(info.lambda_c, info.wfu, gains.k_st, gains.k_wo);
        if (marginal(A)) continue;
        ++checked;
        EXPECT_EQ(washout_gains_admissible(info, gains), hurwitz(A)) << "case " << k;
        EXPECT_EQ(washout_slow_jacobian(info, gains).hurwitz(), hurwitz(A));
    }
    EXPECT_GT(checked, 2900);
}

TEST(FeedbackProperty, ZieAdmissibleIffHurwitz) {
    oracle::Gen g(32);
    int checked = 0;
    for (int k = 0; k < 3000; ++k) {
        const SlowDirectionInfo info{g.real(-3, 3), g.real(-2, 2), g.real(-1, 1), 1, {}};
        const ZieGains gains{g.pick(0, 1) ? 50.0 : g.real(0, 5), g.real(-2, 2), g.real(-5, 5)};
        const Eigen::Matrix2d A = zie_loop(info.lambda_c, info.wfu, info.wfmu, gains.a, gains.k_st_y, gains.k_st_mu);
        if (marginal(A)) continue;
        ++checked;
        EXPECT_EQ(zie_gains_admissible(info, gains), hurwitz(A)) << "case " << k;
        EXPECT_EQ(zie_slow_jacobian(info, gains).hurwitz(), hurwitz(A));
    }
    EXPECT_GT(checked, 2900);
}

TEST(Secant, GainExamples) {
    const double s = 1.0 / std::sqrt(2.0);
    auto g = zie_gains_from_secant({s, s}, 1, false);
    EXPECT_DOUBLE_EQ(g.k_st_y, -0.2);
    EXPECT_NEAR(g.k_st_mu, -0.2, 1e-15);
    EXPECT_FALSE(g.capped);

    g = zie_gains_from_secant({0.0, 1.0}, 1, false);
    EXPECT_EQ(g.k_st_mu, 0.0);

    const double nrm = std::hypot(1.0, 0.01);
    g = zie_gains_from_secant({1.0 / nrm, 0.01 / nrm}, 1, false);
    EXPECT_TRUE(g.capped);
    EXPECT_DOUBLE_EQ(std::abs(g.k_st_mu), 10.0);

    g = zie_gains_from_secant({1.0, 0.0}, 1, false);
    EXPECT_TRUE(g.capped);
    EXPECT_DOUBLE_EQ(std::abs(g.k_st_mu), 10.0);
}

TEST(Secant, LineIsPerpendicular) {
    oracle::Gen gen(33);
    for (int k = 0; k < 500; ++k) {
        const double ang = gen.real(-3.1, 3.1);
        const Secant sec{std::cos(ang), std::sin(ang)};
        if (std::abs(sec.v_y) < 0.05) continue;  // cap would engage
        const auto g = zie_gains_from_secant(sec, 1, false, 1e9);
        // The u = 0 line runs along (dmu, dy) = (-v_y, v_mu).
        EXPECT_NEAR(-g.k_st_y * sec.v_mu + g.k_st_mu * sec.v_y, 0.0, 1e-12) << "case " << k;
        const auto f = zie_gains_from_secant(sec, 1, true, 1e9);
        EXPECT_EQ(f.k_st_mu, -g.k_st_mu);
    }
}

TEST(Secant, GeometricCriterion) {
    EXPECT_TRUE(zie_geometric_criterion({0.0, 1.0}, -1, -0.2, 0.0));
    EXPECT_FALSE(zie_geometric_criterion({0.0, 1.0}, 1, -0.2, 0.0));
    EXPECT_TRUE(zie_geometric_criterion({1.0, 0.0}, 1, -0.2, 3.0));
}

TEST(Secant, FoldTangentIsOrthogonalToSlowRow) {
    // On x = +-sqrt(mu): (lambda_c, wfmu) = (-2x, 1) against tangent (dx, dmu) ~ (1, 2x).
    for (double x : {-1.0, -0.3, 0.0, 0.5, 2.0}) EXPECT_DOUBLE_EQ(-2.0 * x * 1.0 + 1.0 * 2.0 * x, 0.0);
}

TEST(ZieControllerTest, FlipsOnceAtRunawayRadius) {
    ZieController c({50.0, -0.2, 1.5, 0.0, 0.0}, 0.2);
    c.control(0.1, 0.1);
    EXPECT_FALSE(c.flipped());
    c.control(0.3, 0.0);
    EXPECT_TRUE(c.flipped());
    EXPECT_EQ(c.gains().k_st_mu, -1.5);
    c.control(0.0, 0.0);
    c.control(5.0, 5.0);
    EXPECT_EQ(c.gains().k_st_mu, -1.5);
}

TEST(ZieControllerTest, ZeroRadiusNeverFlips) {
    ZieController c({50.0, -0.2, 1.5, 0.0, 0.0}, 0.0);
    c.control(10.0, 10.0);
    EXPECT_FALSE(c.flipped());
}

TEST(Laws, WashoutLawIntegratesFilter) {
    WashoutLaw law({-5.0, 0.1, 0.0, 0.0}, 1.0, 2.0);
    EXPECT_FALSE(law.drives_parameter());
    const double u = law.control(0.1, 0.0);
    EXPECT_NEAR(u, -0.5 + 0.2, 1e-15);
    law.advance(u, 0.1);
    EXPECT_NEAR(law.y_wo(), 2.0 + 0.1 * u, 1e-15);
}
