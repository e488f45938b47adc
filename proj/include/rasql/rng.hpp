#pragma once

#include <cstdint>
#include <span>

namespace rasql {

/// Counter-based pseudorandom stream.
///
/// Output k of a stream with key `seed` is `mix(seed * K1 + (k + 1) * K2)`,
/// where `mix` is the SplitMix64 finalizer and K1, K2 are fixed odd
/// constants. Nothing depends on platform RNG implementations, so a
/// (seed, counter) pair names the same 64-bit value everywhere.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) built from the top 53 bits of one draw.
  double uniform();

  /// Draws an index from a probability vector by inverse CDF.
  /// Masses need not be normalized exactly; the draw never lands on a
  /// zero-mass index.
  std::size_t categorical(std::span<const double> probs);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t x);

}  // namespace rasql
