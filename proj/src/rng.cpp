#include "rasql/rng.hpp"

#include <stdexcept>

namespace rasql {

namespace {
constexpr std::uint64_t kSeedStride = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kCounterStride = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return splitmix64_mix(seed_ * kSeedStride + counter_ * kCounterStride);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::categorical(std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
  double total = 0.0;
  for (double p : probs) total += p;
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  if (last_positive == probs.size())
    throw std::invalid_argument("categorical: distribution has no positive mass");
  // u landed in the rounding gap above the final cumulative sum
  return last_positive;
}

}  // namespace rasql
