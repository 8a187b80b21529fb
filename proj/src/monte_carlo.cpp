#include "shewhart/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace shewhart {

void for_each_batch(int batches, int threads, const std::function<void(int)>& body) {
    if (batches < 1) throw std::invalid_argument("need at least one batch");
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, batches);
    if (workers == 1) {
        for (int b = 0; b < batches; ++b) body(b);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (int b = next++; b < batches; b = next++) {
            try {
                body(b);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = batches;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::uint64_t batch_stream(std::uint64_t tag, std::uint64_t index, int batch) {
    return (tag << 40) ^ (index << 16) ^ static_cast<std::uint64_t>(batch);
}

Estimate batch_mean(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    if (values.empty()) return {};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    if (values.size() < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate batch_ratio(const std::vector<double>& num, const std::vector<double>& den) {
    if (num.size() != den.size() || num.empty()) throw std::invalid_argument("batch size mismatch");
    double sn = 0.0;
    double sd = 0.0;
    for (std::size_t b = 0; b < num.size(); ++b) {
        sn += num[b];
        sd += den[b];
    }
    if (sd == 0.0) return {};
    const double r = sn / sd;
    const auto n = static_cast<double>(num.size());
    if (num.size() < 2) return {r, std::numeric_limits<double>::quiet_NaN()};
    double ss = 0.0;
    for (std::size_t b = 0; b < num.size(); ++b) {
        const double e = num[b] - r * den[b];
        ss += e * e;
    }
    const double mean_den = sd / n;
    return {r, std::sqrt(ss / (n - 1.0) / n) / mean_den};
}

std::vector<std::int64_t> split_count(std::int64_t n, int batches) {
    std::vector<std::int64_t> out(static_cast<std::size_t>(batches), n / batches);
    for (std::int64_t b = 0; b < n % batches; ++b) ++out[static_cast<std::size_t>(b)];
    return out;
}

}  // namespace shewhart
