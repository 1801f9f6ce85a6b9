#pragma once

#include <cstdint>

#include "curvopt/hessian_op.hpp"
#include "curvopt/types.hpp"

namespace curvopt {

struct MinEigEstimate {
  double value = 0.0;  // Rayleigh quotient of `vector` (smallest Ritz value)
  Vector vector;       // unit norm
  Index hvp_count = 0;
};

// Smallest Ritz pair from k steps of Lanczos with full reorthogonalization
// and a seeded random start; restarts on breakdown so invariant subspaces
// (e.g. H = c I) do not stall it. Deterministic given (H, k, seed).
MinEigEstimate estimate_min_eigenvalue(const HessianOperator& H, Index k = 20,
                                       std::uint64_t seed = 9001);

}  // namespace curvopt
