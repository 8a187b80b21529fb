#include <gtest/gtest.h>

#include <cmath>

#include "shewhart/calibration.hpp"
#include "shewhart/errors.hpp"
#include "shewhart/oracle.hpp"

using namespace shewhart;

TEST(PiecewiseLinear, InterpolatesAndExtrapolates) {
    const PiecewiseLinear f{{0.0, 1.0, 3.0}, {1.0, 2.0, 2.0}};
    EXPECT_DOUBLE_EQ(f(0.5), 1.5);
    EXPECT_DOUBLE_EQ(f(2.0), 2.0);
    EXPECT_DOUBLE_EQ(f(10.0), 2.0);
    const PiecewiseLinear g{{0.0, 1.0}, {0.0, 2.0}};
    EXPECT_DOUBLE_EQ(g(4.0), 8.0);
}

TEST(ExpectNominal, ExactForPiecewiseLinear) {
    const GaussianMeanShiftModel m(1.0);
    const auto grid = lr_grid(m, 1, 200);
    ASSERT_EQ(grid.front(), 0.0);
    // E∞[1] = 1 and E∞[ℓ] = 1.
    EXPECT_NEAR(expect_nominal(m, 1, {grid, std::vector<double>(grid.size(), 1.0)}), 1.0, 1e-14);
    EXPECT_NEAR(expect_nominal(m, 1, {grid, grid}), 1.0, 1e-12);
    // E∞[max(ℓ, ν)] = ν P∞(ℓ < ν) + P₀(ℓ ≥ ν), with ν a grid node.
    const double nu = 2.0;
    const auto g2 = lr_grid(m, 1, 200, {nu});
    std::vector<double> vals;
    for (double x : g2) vals.push_back(std::max(x, nu));
    EXPECT_NEAR(expect_nominal(m, 1, {g2, vals}),
                nu * (1.0 - survival_inf(m, 1, nu)) + survival_post(m, 1, 1, nu), 1e-12);
}

TEST(Lagrangian, ConstantThresholdOptimum) {
    const GaussianMeanShiftModel m(1.0);
    const auto c = lagrangian_check(m, 10.0, 100, 1001);
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(c.nu, 2.1848595898501846, 1e-9);
    EXPECT_NEAR(c.beta, 0.38914369164536106, 1e-11);
    EXPECT_NEAR(c.lambda, c.beta - c.nu / 10.0, 1e-14);
    EXPECT_LT(c.identity_residual, 1e-9);
    EXPECT_LT(c.dp_residual, 1e-4);
    // The finite-horizon values increase toward ν.
    for (std::size_t k = 1; k < c.dp_by_horizon.size(); ++k) {
        EXPECT_GE(c.dp_by_horizon[k], c.dp_by_horizon[k - 1] - 1e-12);
    }
}

TEST(Lagrangian, UnitGamma) {
    const auto c = lagrangian_check(GaussianMeanShiftModel(1.0), 1.0, 20, 201);
    EXPECT_EQ(c.nu, 0.0);
    EXPECT_DOUBLE_EQ(c.lambda, 1.0);
    EXPECT_TRUE(c.pass);
}

TEST(DpBound, ConstantAndAlternatingMeans) {
    for (const auto& seq : {std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}}) {
        const GaussianMeanShiftModel m(seq);
        const auto cal = calibrate_time_varying(m, 10.0);
        const auto d = dp_bound(m, cal.policy, 10.0, 60, 801);
        EXPECT_TRUE(d.pass);
        EXPECT_LE(d.V0, 10.0 + 1e-4);
        EXPECT_GT(d.V0, 9.0);
        EXPECT_LT(d.omega0_residual, 1e-6);
        EXPECT_LT(d.recursion_residual, 1e-10);
        EXPECT_TRUE(d.bounds_ok);
        EXPECT_TRUE(d.monotone);
    }
}

TEST(DpBound, DegenerateAtUnitGamma) {
    const GaussianMeanShiftModel m(1.0);
    const auto cal = calibrate_time_varying(m, 1.0);
    EXPECT_THROW(dp_bound(m, cal.policy, 1.0, 10, 101), std::invalid_argument);
}

TEST(DpBound, StrictModeRejectsAnInflatedTarget) {
    // Claiming a larger run length than the rule attains breaks ω_0 = γ.
    const GaussianMeanShiftModel m(1.0);
    const auto cal = calibrate_time_varying(m, 10.0);
    EXPECT_THROW(dp_bound(m, cal.policy, 5.0, 60, 801), OracleMismatch);
}

TEST(Dominance, CompetitorsDoNotBeatShewhart) {
    const GaussianMeanShiftModel m(1.0);
    DominanceConfig cfg;
    cfg.arl_paths = 4000;
    cfg.paths_per_t = 4000;
    cfg.t_grid = {0, 1, 3, 8};
    cfg.threads = 1;
    cfg.strict = false;
    const auto table = dominance_sweep(m, 10.0, default_competitors(), cfg);
    EXPECT_NEAR(table.beta, 0.38914369164536106, 1e-11);
    ASSERT_EQ(table.rows.size(), default_competitors().size());
    for (const auto& row : table.rows) {
        EXPECT_TRUE(row.dominated) << row.rule;
        EXPECT_TRUE(row.bound_ok) << row.rule;
        EXPECT_TRUE(row.ordering_ok) << row.rule;
    }
    EXPECT_TRUE(table.pass);
}

TEST(MixtureBound, LowerBoundIdentity) {
    const auto m = TwoAlternativeGaussianModel::two_sided(2.0);
    const auto cal = calibrate_mixture(m, 2.0);
    const auto c = mixture_bound_check(m, cal.policy, 2.0, 200000, {4, 1, 100});
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(c.target1, c.target2, 1e-9);
    EXPECT_NEAR(c.denominator.value, c.target1, 3.0 * c.denominator.se);
}

TEST(MixtureBound, RequiresTheClassicalRange) {
    const auto m = TwoAlternativeGaussianModel::two_sided(2.0);
    const auto cal = calibrate_mixture(m, 50.0);
    EXPECT_THROW(mixture_bound_check(m, cal.policy, 50.0, 1000, {4, 1, 10}), std::invalid_argument);
}
