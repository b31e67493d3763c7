#pragma once

#include <cstdint>
#include <limits>

namespace gtdesign {

/// Counter-based generator: output i is the SplitMix64 finalizer applied to
/// key + (i + 1) * gamma. Streams keyed by different values are independent for
/// practical purposes, and a stream never depends on how many other streams
/// were drawn before it.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Key for the stream addressed by (seed, i, j), e.g. (seed, replication, support point).
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t i, std::uint64_t j = 0);

/// Below this mean count (of the rarer outcome) binomial draws use CDF inversion;
/// above it they sum Bernoulli draws.
inline constexpr double kInversionMeanThreshold = 100.0;

/// Exact Binomial(n, p) draw.
int sample_binomial(int n, double p, StreamRng& rng);

}  // namespace gtdesign
