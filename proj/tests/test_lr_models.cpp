#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "shewhart/errors.hpp"
#include "shewhart/lr_models.hpp"
#include "shewhart/normal.hpp"
#include "shewhart/numerics.hpp"

using namespace shewhart;

namespace {
const std::string kData = TEST_DATA_DIR;
}

// Reference values from tests/oracle/reference_values.py.

TEST(GaussianShift, SurvivalMatchesReference) {
    const GaussianMeanShiftModel m(1.0);
    EXPECT_NEAR(survival_inf(m, 1, 2.0), 0.11640586826199839, 1e-15);
    EXPECT_NEAR(survival_post(m, 1, 1, 2.0), 0.4234218517607552, 1e-15);
    const GaussianMeanShiftModel big(6.1805);
    EXPECT_NEAR(survival_inf(big, 1, 1.0), 0.0009999404249019612, 1e-17);
}

TEST(GaussianShift, SurvivalAtZeroIsOne) {
    const GaussianMeanShiftModel m(2.0);
    EXPECT_EQ(survival_inf(m, 1, 0.0), 1.0);
    EXPECT_EQ(survival_post(m, 1, 1, 0.0), 1.0);
}

TEST(GaussianShift, QuantileExamples) {
    EXPECT_NEAR(quantile_inf(GaussianMeanShiftModel(1.0), 1, 0.1), 2.1848595898501846, 1e-9);
    // Φ(−0.5μ) = 0.001 puts the 0.001 quantile at ν = 1.
    EXPECT_NEAR(quantile_inf(GaussianMeanShiftModel(6.1805), 1, 0.001), 1.0, 2e-3);
    EXPECT_EQ(quantile_inf(GaussianMeanShiftModel(1.0), 1, 1.0), 0.0);
    EXPECT_THROW(quantile_inf(GaussianMeanShiftModel(1.0), 1, 0.0), std::invalid_argument);
}

TEST(GaussianShift, PostQuantileClosedFormAgreesWithBisection) {
    const GaussianMeanShiftModel m(std::vector<double>{0.7, 1.9});
    for (std::int64_t t : {1, 2, 3}) {
        for (double beta : {0.9, 0.4, 0.01}) {
            const double closed = log_quantile_post(m, t, beta);
            const double bis = log_quantile(m, Measure::Alt1, 1, t, beta);
            EXPECT_NEAR(closed, bis, 1e-9);
        }
    }
}

TEST(GaussianShift, SequenceIsPeriodic) {
    const GaussianMeanShiftModel m(std::vector<double>{1.0, 2.0, 3.0});
    EXPECT_TRUE(m.time_varying());
    EXPECT_EQ(m.period(), 3);
    EXPECT_EQ(m.mu_at(1), 1.0);
    EXPECT_EQ(m.mu_at(5), 2.0);
    EXPECT_EQ(m.mu_at(9), 3.0);
    EXPECT_FALSE(GaussianMeanShiftModel(std::vector<double>{1.5, 1.5}).time_varying());
}

TEST(GaussianShift, RejectsBadMeans) {
    EXPECT_THROW(GaussianMeanShiftModel(0.0), std::invalid_argument);
    EXPECT_THROW(GaussianMeanShiftModel(-1.0), std::invalid_argument);
    EXPECT_THROW(GaussianMeanShiftModel(std::vector<double>{}), std::invalid_argument);
}

TEST(GaussianShift, PassesContinuityAudit) {
    EXPECT_NO_THROW(require_continuity(GaussianMeanShiftModel(6.1805)));
    EXPECT_NO_THROW(require_continuity(GaussianMeanShiftModel(std::vector<double>{1.0, 2.0})));
}

TEST(TwoAlternative, LikelihoodRatios) {
    const TwoAlternativeGaussianModel m(1.0, -2.0);
    EXPECT_NEAR(m.log_lr_at(1, 0.5), 0.0, 1e-15);
    EXPECT_NEAR(m.log_lr_at(2, 0.5), -1.0 - 2.0, 1e-15);
    EXPECT_EQ(m.mean(Measure::Alt2), -2.0);
    EXPECT_NEAR(m.observation_pdf(Measure::Alt1, 1.0), normal_pdf(0.0), 1e-16);
    EXPECT_NEAR(m.log_mixture_at(0.0, 0.3), m.log_lr_at(1, 0.3), 1e-15);
    EXPECT_NEAR(m.log_mixture_at(1.0, 0.3), m.log_lr_at(2, 0.3), 1e-15);
}

TEST(TwoAlternative, SurvivalOfEachRatio) {
    const TwoAlternativeGaussianModel m(1.0, -2.0);
    // ℓ² under P∞ has the law of a μ = 2 shift.
    const GaussianMeanShiftModel ref(2.0);
    EXPECT_NEAR(m.survival(Measure::Nominal, 2, 1, 1.3), survival_inf(ref, 1, 1.3), 1e-15);
    EXPECT_NEAR(m.survival(Measure::Alt2, 2, 1, 1.3), survival_post(ref, 1, 1, 1.3), 1e-15);
}

TEST(SamplePath, RegimesSwitchLaws) {
    const GaussianMeanShiftModel m(50.0);
    Rng rng = make_stream(3, 0);
    // With μ = 50 the sign of log ℓ identifies the law almost surely.
    RegimeSpec pre;
    for (const auto& s : sample_path(m, pre, 20, rng)) EXPECT_LT(s.lr1, 0.0);
    RegimeSpec post;
    post.tau = 0;
    for (const auto& s : sample_path(m, post, 20, rng)) EXPECT_GT(s.lr1, 0.0);
    RegimeSpec transient;
    transient.tau = 3;
    transient.duration = 2;
    const auto path = sample_path(m, transient, 8, rng);
    for (std::int64_t s = 1; s <= 8; ++s) {
        const bool changed = s == 4 || s == 5;
        EXPECT_EQ(path[s - 1].lr1 > 0.0, changed) << "s=" << s;
    }
}

TEST(SamplePath, ChangeOfMeasureIdentity) {
    // E∞[ℓ 1{ℓ ≥ ν}] = P₀(ℓ ≥ ν).
    const GaussianMeanShiftModel m(1.0);
    Rng rng = make_stream(21, 0);
    const int n = 400000;
    for (double nu : {0.5, 1.0, 2.0}) {
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            const double y = m.sample(Measure::Nominal, 1, rng).lr1;
            const double v = y >= std::log(nu) ? std::exp(y) : 0.0;
            s += v;
            s2 += v * v;
        }
        const double mean = s / n;
        const double se = std::sqrt((s2 / n - mean * mean) / n);
        EXPECT_NEAR(mean, survival_post(m, 1, 1, nu), 3.0 * se) << "nu=" << nu;
    }
}

TEST(Tabulated, GaussianTableReproducesClosedForm) {
    const auto tab = TabulatedModel::from_csv(kData + "/gauss_mu1.csv");
    const GaussianMeanShiftModel ref(1.0);
    EXPECT_TRUE(tab.declares_continuity());
    for (double nu : {0.2, 0.8, 1.0, 2.5, 7.0}) {
        EXPECT_NEAR(survival_inf(tab, 1, nu), survival_inf(ref, 1, nu), 1e-6);
        EXPECT_NEAR(survival_post(tab, 1, 1, nu), survival_post(ref, 1, 1, nu), 1e-6);
    }
    EXPECT_NEAR(quantile_inf(tab, 1, 0.1), 2.1848595898501846, 1e-4);
    EXPECT_NO_THROW(require_continuity(tab));
}

TEST(Tabulated, AtomIsRejected) {
    const auto tab = TabulatedModel::from_csv(kData + "/atom.csv");
    EXPECT_FALSE(tab.declares_continuity());
    EXPECT_THROW(require_continuity(tab), ModelContractViolation);
    // Step lookup is right-continuous at the atom.
    EXPECT_DOUBLE_EQ(survival_inf(tab, 1, 1.0), 0.8);
    EXPECT_DOUBLE_EQ(survival_inf(tab, 1, 1.5), 0.1);
}

TEST(Tabulated, ValidatesInput) {
    EXPECT_THROW(TabulatedModel::from_csv_text("nu,s_inf\n0,1\n"), std::invalid_argument);
    EXPECT_THROW(TabulatedModel::from_csv_text("nu,s_inf,s_post1\n0,1,1\n1,0.5,0.7\n2,0,0\n"),
                 std::invalid_argument);
    EXPECT_THROW(TabulatedModel::from_csv_text("nu,s_inf,s_post1\n0,1,1\n1,0.5,0.7\n2,0.6,0.1\n3,0,0\n"),
                 NonMonotoneModel);
    EXPECT_THROW(TabulatedModel::from_csv_text("nu,s_inf,s_post1\n1,1,1\n2,0.5,0.7\n3,0.1,0.1\n4,0,0\n"),
                 std::invalid_argument);
    EXPECT_THROW(TabulatedModel::from_csv("/nonexistent.csv"), std::invalid_argument);
}

TEST(Tabulated, SecondColumnAddsAnAlternative) {
    const auto tab = TabulatedModel::from_csv_text(
        "# comment\nnu,s_inf,s_post1,s_post2\n0,1,1,1\n1,0.5,0.8,0.9\n2,0.2,0.5,0.7\n4,0,0,0\n");
    EXPECT_EQ(tab.num_alternatives(), 2);
    EXPECT_NEAR(tab.survival(Measure::Alt2, 1, 1, 1.0), 0.9, 1e-15);
}

TEST(Tabulated, SamplingFollowsTheTable) {
    const auto tab = TabulatedModel::from_csv(kData + "/gauss_mu1.csv");
    Rng rng = make_stream(4, 0);
    const int n = 20000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += tab.sample(Measure::Nominal, 1, rng).lr1 >= std::log(2.0);
    const double p = survival_inf(tab, 1, 2.0);
    EXPECT_NEAR(hits / double(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
}
