#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace shewhart {

struct Estimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
};

struct McConfig {
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency
    int batches = 100;
};

// Runs body(b) for b = 0..batches-1 on a small thread pool. Each batch must
// derive its generator from (seed, b) so results are independent of threads.
// The first exception thrown by any batch is rethrown.
void for_each_batch(int batches, int threads, const std::function<void(int)>& body);

// Stream id for batch b of a task identified by tag (and an optional index).
std::uint64_t batch_stream(std::uint64_t tag, std::uint64_t index, int batch);

// Mean of equally weighted batch values with batch-means standard error.
Estimate batch_mean(const std::vector<double>& values);

// Σ num / Σ den with a delta-method batch-means standard error.
Estimate batch_ratio(const std::vector<double>& num, const std::vector<double>& den);

// Splits n into `batches` near-equal parts.
std::vector<std::int64_t> split_count(std::int64_t n, int batches);

}  // namespace shewhart
