#include "gtdesign/rng.hpp"

#include <cmath>

namespace gtdesign {

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  std::uint64_t h = StreamRng::mix(seed ^ 0x6a09e667f3bcc908ULL);
  h = StreamRng::mix(h + 0x9e3779b97f4a7c15ULL * (i + 1));
  return StreamRng::mix(h + 0xbb67ae8584caa73bULL * (j + 1));
}

int sample_binomial(int n, double p, StreamRng& rng) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;

  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  int k = 0;
  if (n * q < kInversionMeanThreshold) {
    const double u = rng.uniform();
    double prob = std::exp(n * std::log1p(-q));
    double cdf = prob;
    const double odds = q / (1.0 - q);
    while (u >= cdf && k < n) {
      prob *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
      ++k;
      cdf += prob;
    }
  } else {
    for (int i = 0; i < n; ++i) k += rng.uniform() < q ? 1 : 0;
  }
  return flip ? n - k : k;
}

}  // namespace gtdesign
