#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "shewhart/detectors.hpp"
#include "shewhart/errors.hpp"

using namespace shewhart;

namespace {

std::vector<LrSample> path_of(std::initializer_list<double> lrs) {
    std::vector<LrSample> out;
    for (double l : lrs) out.push_back({std::log(l)});
    return out;
}

std::int64_t stop_time(const Policy& p, const std::vector<LrSample>& path) {
    return run_to_stop(p, path, StartDecision::RunDetector).T;
}

}  // namespace

TEST(Detector, ShewhartStopsAtFirstExceedance) {
    EXPECT_EQ(stop_time(Policy::shewhart(0.7), path_of({0.3, 0.8})), 2);
    EXPECT_EQ(stop_time(Policy::shewhart(0.7), path_of({0.7})), 1);  // ≥ compares inclusively
}

TEST(Detector, CusumHandExample) {
    Detector d(Policy::cusum(0.7));
    EXPECT_EQ(d.step(std::log(0.3)), StepResult::Continue);
    EXPECT_NEAR(std::exp(d.state().log_stat), 0.3, 1e-15);
    EXPECT_EQ(d.step(std::log(0.8)), StepResult::Stop);
    EXPECT_NEAR(std::exp(d.state().log_stat), 0.8, 1e-15);
    EXPECT_EQ(d.t(), 2);
}

TEST(Detector, ClassicalCusumIsForcedToStopAtOne) {
    EXPECT_EQ(stop_time(Policy::classical_cusum(0.7), path_of({0.3, 0.8})), 1);
}

TEST(Detector, CusumRecursions) {
    // Y_t = max{Y_{t−1}, 1} ℓ_t versus Y_t = max{Y_{t−1} ℓ_t, 1}.
    Detector shifted(Policy::cusum(100.0));
    Detector classical(Policy::classical_cusum(100.0));
    const double ls[] = {2.0, 0.25, 3.0, 5.0};
    double yp = 0.0;
    double yc = 1.0;
    for (double l : ls) {
        yp = std::max(yp, 1.0) * l;
        yc = std::max(yc * l, 1.0);
        shifted.step(std::log(l));
        classical.step(std::log(l));
        EXPECT_NEAR(std::exp(shifted.state().log_stat), yp, 1e-12);
        EXPECT_NEAR(std::exp(classical.state().log_stat), yc, 1e-12);
    }
}

TEST(Detector, PoorCusumDiscounts) {
    Detector d(Policy::poor_cusum(100.0, 0.5));
    d.step(std::log(4.0));
    EXPECT_NEAR(std::exp(d.state().log_stat), 2.0, 1e-12);
    d.step(std::log(3.0));
    EXPECT_NEAR(std::exp(d.state().log_stat), 3.0, 1e-12);
}

TEST(Detector, MixtureStatistic) {
    Detector d(Policy::mixture(0.25, 100.0));
    d.step(std::log(2.0), std::log(6.0));
    EXPECT_NEAR(std::exp(d.state().log_stat), 0.75 * 2.0 + 0.25 * 6.0, 1e-12);
    Detector bad(Policy::mixture(0.25, 1.0));
    EXPECT_THROW(bad.step(0.0), std::invalid_argument);
}

TEST(Detector, ScheduledThresholds) {
    ThresholdSchedule s;
    s.beta = 0.5;
    s.log_nu = {std::log(1.0), std::log(4.0)};
    const auto p = Policy::time_varying(s);
    // t = 2 uses ν = 4, t = 3 wraps back to ν = 1.
    EXPECT_EQ(stop_time(p, path_of({0.5, 3.0, 1.5})), 3);
    EXPECT_EQ(stop_time(p, path_of({0.5, 4.0})), 2);
}

TEST(Detector, FixedSample) {
    EXPECT_EQ(stop_time(Policy::fixed_sample(3), path_of({100, 100, 100, 100})), 3);
}

TEST(Detector, ZeroThresholdStopsImmediately) {
    EXPECT_EQ(stop_time(Policy::shewhart(0.0), path_of({1e-300, 1.0})), 1);
}

TEST(Detector, TruncatedPath) {
    const auto out = run_to_stop(Policy::shewhart(10.0), path_of({1, 2, 3}), StartDecision::RunDetector);
    EXPECT_TRUE(out.truncated);
    EXPECT_EQ(out.T, 3);
}

TEST(Detector, SteppingAfterStopThrows) {
    Detector d(Policy::shewhart(0.5));
    d.step(0.0);
    EXPECT_TRUE(d.stopped());
    EXPECT_THROW(d.step(0.0), SteppedAfterStop);
    EXPECT_THROW(Detector(Policy::stop_at_zero()).step(0.0), std::logic_error);
}

TEST(Detector, AdvanceOnlyForMemorylessRules) {
    Detector s(Policy::shewhart(2.0));
    s.advance_to(40);
    EXPECT_EQ(s.t(), 40);
    s.step(std::log(3.0));
    EXPECT_EQ(*s.state().stopped_at, 41);
    Detector c(Policy::cusum(2.0));
    EXPECT_THROW(c.advance_to(3), std::logic_error);
}

TEST(Detector, NextStopProbability) {
    const GaussianMeanShiftModel m(1.0);
    Detector s(Policy::shewhart(2.0));
    EXPECT_NEAR(s.next_stop_probability(m, Measure::Alt1), survival_post(m, 1, 1, 2.0), 1e-15);
    Detector c(Policy::cusum(2.0));
    c.step(std::log(1.6));
    EXPECT_NEAR(c.next_stop_probability(m, Measure::Nominal), survival_inf(m, 1, 2.0 / 1.6), 1e-14);
    Detector f(Policy::fixed_sample(2));
    EXPECT_EQ(f.next_stop_probability(m, Measure::Nominal), 0.0);
    f.step(0.0);
    EXPECT_EQ(f.next_stop_probability(m, Measure::Nominal), 1.0);
}

TEST(Randomization, Extremes) {
    Rng rng = make_stream(1, 0);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(apply_randomization(Policy::shewhart(1.0, 0.0), rng), StartDecision::RunDetector);
        EXPECT_EQ(apply_randomization(Policy::stop_at_zero(), rng), StartDecision::StopAtZero);
    }
    EXPECT_EQ(run_to_stop(Policy::stop_at_zero(), path_of({5.0}), rng).T, 0);
}

TEST(Randomization, Frequency) {
    Rng rng = make_stream(2, 0);
    const int n = 1000000;
    int stops = 0;
    const auto p = Policy::shewhart(1.0, 0.25);
    for (int i = 0; i < n; ++i) stops += apply_randomization(p, rng) == StartDecision::StopAtZero;
    EXPECT_NEAR(stops / double(n), 0.25, 3.0 * std::sqrt(0.25 * 0.75 / n));
}
