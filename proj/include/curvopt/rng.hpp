#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "curvopt/types.hpp"

namespace curvopt {

// mt19937_64 with hand-rolled draws on top. std::uniform_*_distribution is
// implementation-defined, so sampling through it would not reproduce across
// standard libraries; everything here is pinned to the raw 64-bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on {0,...,n-1} by rejection (no modulo bias).
  Index uniform_index(Index n) {
    if (n <= 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return static_cast<Index>(x % un);
  }

  // Standard normal via Marsaglia polar; consumes draws in pairs, caches one.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  void fill_gaussian(Vector& x) {
    for (Index i = 0; i < x.size(); ++i) x[i] = gaussian();
  }

  // Index into a categorical distribution given its inclusive prefix sums.
  // cdf.back() need not be exactly 1; draws are scaled by it.
  Index categorical(const std::vector<double>& cdf) {
    if (cdf.empty()) throw std::invalid_argument("categorical: empty cdf");
    double u = uniform01() * cdf.back();
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<Index>(it - cdf.begin());
  }

  // k distinct indices from {0,...,n-1}, partial Fisher-Yates, output in draw
  // order (not sorted).
  std::vector<Index> subset_without_replacement(Index n, Index k) {
    if (k < 0 || k > n) throw std::invalid_argument("subset_without_replacement: bad k");
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    std::vector<Index> out(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
      Index j = i + uniform_index(n - i);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
    }
    return out;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace curvopt
