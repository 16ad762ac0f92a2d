#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>

namespace rdslab {

using Rng = std::mt19937_64;

/// Stateless 64-bit mixer (splitmix64 finalizer).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for an independent stream identified by (master, scenario, replicate).
/// Streams depend only on the triple, never on scheduling order.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t scenario,
                          std::uint64_t replicate) noexcept;

Rng make_stream(std::uint64_t master, std::uint64_t scenario, std::uint64_t replicate);

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index k with cumulative[k-1] <= u * total < cumulative[k], where
/// `cumulative` holds inclusive prefix sums of nonnegative weights.
std::size_t invert_cumulative(std::span<const double> cumulative, double u) noexcept;

double standard_normal(Rng& rng);

/// Runs body(i) for i in [0, count) on `threads` workers. Each index is
/// processed exactly once; results must be written to per-index slots.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace rdslab
