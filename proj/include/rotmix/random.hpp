#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rotmix/types.hpp"

namespace rotmix {

// Deterministic sampling helpers on top of mt19937_64. Distributions are
// hand-rolled because the std:: distribution adaptors are
// implementation-defined; these produce the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1], safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  // Standard normal via Marsaglia polar.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  // Poisson by inversion (sequential search); fine for desk-scale rates.
  long poisson(double rate) {
    const double target = uniform();
    double p = std::exp(-rate);
    double cdf = p;
    long x = 0;
    while (cdf < target && x < 100000) {
      ++x;
      p *= rate / static_cast<double>(x);
      cdf += p;
    }
    return x;
  }

  // Index sampled from an unnormalized nonnegative weight vector.
  Eigen::Index categorical(const Vec& weights) {
    const double total = weights.sum();
    const double target = uniform() * total;
    double cdf = 0.0;
    for (Eigen::Index j = 0; j + 1 < weights.size(); ++j) {
      cdf += weights[j];
      if (target < cdf) return j;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rotmix
