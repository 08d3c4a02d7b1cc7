#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace asmd {

// splitmix64: a small counter-style generator with an explicit 64-bit seed.
// Every randomized code path in the library draws from one of these, so a
// run is reproducible from its seed alone.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe under log().
  double next_double_pos() { return 1.0 - next_double(); }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Box-Muller; consumes two draws per call.
  double gaussian(double mean, double stddev) {
    const double u1 = next_double_pos();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(next_double() * static_cast<double>(n)) %
           n;
  }

 private:
  std::uint64_t state_;
};

// Inverse-CDF sampler over a fixed discrete distribution.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const std::vector<double>& probs) {
    if (probs.empty()) throw std::invalid_argument("empty distribution");
    cumulative_.reserve(probs.size());
    double acc = 0.0;
    for (double p : probs) {
      if (p <= 0.0) throw std::invalid_argument("probabilities must be > 0");
      acc += p;
      cumulative_.push_back(acc);
    }
    if (std::fabs(acc - 1.0) > 1e-9)
      throw std::invalid_argument("probabilities must sum to 1");
    cumulative_.back() = 1.0;
  }

  std::size_t sample(SplitMix64& rng) const {
    const double u = rng.next_double();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace asmd
