#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "shewhart/errors.hpp"
#include "shewhart/monte_carlo.hpp"
#include "shewhart/normal.hpp"
#include "shewhart/numerics.hpp"
#include "shewhart/rng.hpp"

using namespace shewhart;

// Reference values from tests/oracle/reference_values.py.

TEST(Normal, MatchesReference) {
    EXPECT_NEAR(normal_cdf(-1.5), 0.06680720126885807, 1e-15);
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_isf(1e-10), 6.361340902404056, 1e-9);
    EXPECT_NEAR(normal_sf(1.5), normal_cdf(-1.5), 1e-16);
    EXPECT_NEAR(normal_pdf(0.0), 1.0 / std::sqrt(2.0 * M_PI), 1e-16);
}

TEST(Normal, QuantileInvertsCdf) {
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.8, 0.999}) {
        EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 + 1e-12 * p);
        EXPECT_NEAR(normal_sf(normal_isf(p)), p, 1e-14 + 1e-12 * p);
    }
}

TEST(LogSumExp, HandlesInfinities) {
    EXPECT_EQ(log_sum_exp(kNegInf, 2.0), 2.0);
    EXPECT_EQ(log_sum_exp(3.0, kNegInf), 3.0);
    EXPECT_NEAR(log_sum_exp(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
    EXPECT_NEAR(log_sum_exp(1000.0, 1000.0), 1000.0 + std::log(2.0), 1e-12);
    EXPECT_EQ(safe_log(0.0), kNegInf);
}

TEST(Bisection, SolvesMonotoneEquations) {
    const double x = solve_decreasing([](double v) { return std::exp(-v); }, 0.25, 0.0, 0.1);
    EXPECT_NEAR(x, std::log(4.0), 1e-12);
    const double y = solve_increasing([](double v) { return v * v * v; }, 8.0, -1.0, 0.0);
    EXPECT_NEAR(y, 2.0, 1e-12);
}

TEST(Bisection, ReportsMissingBracket) {
    BisectionOptions opts;
    opts.max_expansions = 5;
    EXPECT_THROW(solve_decreasing([](double) { return 1.0; }, 0.5, 0.0, 1.0, opts), BracketNotFound);
}

TEST(Bisection, ReportsWrongMonotonicity) {
    EXPECT_THROW(solve_decreasing([](double v) { return v; }, 0.5, 0.0, 1.0), NonMonotoneModel);
}

TEST(Simpson, IntegratesSmoothFunctions) {
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI), 2.0, 1e-10);
    EXPECT_NEAR(adaptive_simpson(normal_pdf, -1.0, 2.0), normal_cdf(2.0) - normal_cdf(-1.0), 1e-11);
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
    Rng a = make_stream(7, 3);
    Rng b = make_stream(7, 3);
    Rng c = make_stream(7, 4);
    for (int i = 0; i < 10; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        EXPECT_NE(x, c());
    }
}

TEST(Rng, DrawsHaveTheRightMoments) {
    Rng rng = make_stream(11, 0);
    const int n = 200000;
    double s = 0, s2 = 0, u = 0;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const double z = standard_normal(rng);
        s += z;
        s2 += z * z;
        u += uniform01(rng);
        hits += bernoulli(rng, 0.3);
    }
    EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(u / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(hits / double(n), 0.3, 4.0 * std::sqrt(0.21 / n));
}

TEST(MonteCarlo, SplitCountCoversEverything) {
    const auto parts = split_count(1003, 10);
    ASSERT_EQ(parts.size(), 10u);
    std::int64_t total = 0;
    for (auto p : parts) {
        EXPECT_TRUE(p == 100 || p == 101);
        total += p;
    }
    EXPECT_EQ(total, 1003);
}

TEST(MonteCarlo, BatchStatistics) {
    const auto m = batch_mean({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.value, 2.5);
    EXPECT_NEAR(m.se, std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0 / 4.0), 1e-15);
    const auto r = batch_ratio({1.0, 1.0, 1.0}, {2.0, 2.0, 2.0});
    EXPECT_DOUBLE_EQ(r.value, 0.5);
    EXPECT_NEAR(r.se, 0.0, 1e-15);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
    auto run = [](int threads) {
        std::vector<double> out(16);
        for_each_batch(16, threads, [&](int b) {
            Rng rng = make_stream(5, batch_stream(9, 0, b));
            out[b] = standard_normal(rng);
        });
        return out;
    };
    EXPECT_EQ(run(1), run(4));
}

TEST(MonteCarlo, BatchExceptionsPropagate) {
    EXPECT_THROW(for_each_batch(8, 2, [](int b) { if (b == 5) throw std::runtime_error("x"); }),
                 std::runtime_error);
}

TEST(MonteCarlo, BatchStreamsDiffer) {
    std::set<std::uint64_t> ids;
    for (std::uint64_t tag : {1, 2})
        for (std::uint64_t idx : {0, 1})
            for (int b = 0; b < 100; ++b) ids.insert(batch_stream(tag, idx, b));
    EXPECT_EQ(ids.size(), 400u);
}
