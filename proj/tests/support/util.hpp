#pragma once

#include <cstring>

#include "curvopt/types.hpp"

namespace curvopt::testutil {

// Bitwise vector comparison (the determinism tests mean it literally).
inline bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

inline double rel_gap(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace curvopt::testutil
