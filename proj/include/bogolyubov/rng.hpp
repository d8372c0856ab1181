// Counter-based normal variates.
//
// Every Gaussian used by the simulators is a pure function of
// (seed, stream, counter, lane), so ensembles are reproducible regardless of
// how paths are scheduled across threads.
#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace bogolyubov {

/// Philox4x32 with 10 rounds (Salmon et al. 2011, Random123 constants).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Two independent N(0,1) variates for one counter block (Box-Muller).
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t counter, std::uint32_t lane = 0);

/// Single N(0,1) variate; consecutive counters share a Philox block.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::int64_t counter,
                       std::uint32_t lane = 0);

/// Uniform in [0,1) keyed the same way.
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter,
                 std::uint32_t lane = 0);

/// SplitMix64 finalizer, used to derive independent seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace bogolyubov
