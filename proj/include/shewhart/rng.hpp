#pragma once

#include <cstdint>
#include <random>

namespace shewhart {

using Rng = std::mt19937_64;

// Deterministic, statistically independent stream derived from a master seed
// (SplitMix64 mixing of the pair). Used to give every Monte Carlo batch its own
// generator so results do not depend on the thread count.
Rng make_stream(std::uint64_t master_seed, std::uint64_t stream_id);

double standard_normal(Rng& rng);
double uniform01(Rng& rng);
bool bernoulli(Rng& rng, double p);

}  // namespace shewhart
