#pragma once

#include "curvopt/types.hpp"

namespace curvopt {

// Exact subproblem solutions by full eigendecomposition + secular root find,
// including the hard case. O(d^3); meant for validation at small d, not for
// the drivers.
struct DenseSolution {
  Vector step;
  double model_value = 0.0;
  double lambda = 0.0;  // multiplier: (H + lambda I) s = -g, lambda >= 0
  bool interior = false;
  bool hard_case = false;
};

DenseSolution dense_reference_tr(const Matrix& H, const Vector& g, double delta);
DenseSolution dense_reference_cubic(const Matrix& H, const Vector& g, double sigma);

}  // namespace curvopt
