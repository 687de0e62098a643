#pragma once

#include "dak/rational.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace dak {

// Deterministic generator: every randomized operation takes one of these
// explicitly, so a (scenario, seed) pair reproduces byte-identical runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Unbiased draw from {0, ..., n-1} by rejection.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index on empty range");
    if (n == 1) return 0;
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t u;
    do {
      u = eng_();
    } while (u >= limit);
    return static_cast<std::size_t>(u % n);
  }

  // Uniform rational in [0, 1) with 64 bits of resolution; used against
  // exact cumulative thresholds.
  Rat unit() {
    Int num = eng_();
    Int den = Int(1) << 64;
    return Rat(num, den);
  }

  // Index i with probability weights[i] / sum(weights), exactly, provided
  // the common-denominator total fits in 64 bits (always true for the small
  // instances the exact engines accept).
  std::size_t weighted_index(const std::vector<Rat>& weights) {
    Int common = 1;
    for (const auto& w : weights) {
      Int d = boost::multiprecision::denominator(w);
      common = common / boost::multiprecision::gcd(common, d) * d;
    }
    std::vector<Int> scaled(weights.size());
    Int total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      scaled[i] = boost::multiprecision::numerator(weights[i]) *
                  (common / boost::multiprecision::denominator(weights[i]));
      if (scaled[i] < 0) throw std::invalid_argument("negative weight");
      total += scaled[i];
    }
    if (total == 0) throw std::invalid_argument("all-zero weights");
    if (total > UINT64_MAX) throw std::overflow_error("weight total too large");
    std::uint64_t u = uniform_index(static_cast<std::uint64_t>(total));
    Int cum = 0;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      cum += scaled[i];
      if (Int(u) < cum) return i;
    }
    return weights.size() - 1;  // unreachable
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dak
