#pragma once

#include <vector>

#include "curvopt/types.hpp"

namespace curvopt::detail {

// Symmetric tridiagonal T: diagonal alpha[0..k-1], off-diagonal beta[0..k-2].
// These are the projected solves behind the Krylov subproblem solvers.

// Solve (T + shift I) y = rhs by LDL^T. Returns false when a pivot is
// non-positive, i.e. T + shift I is not positive definite.
bool ldlt_solve_shifted(const std::vector<double>& alpha, const std::vector<double>& beta,
                        double shift, const Vector& rhs, Vector& y);

// Number of eigenvalues of T strictly below t (Sturm pivot count).
int count_eigenvalues_below(const std::vector<double>& alpha,
                            const std::vector<double>& beta, double t);

// Smallest eigenvalue by bisection on the Sturm count.
double min_eigenvalue(const std::vector<double>& alpha, const std::vector<double>& beta);

// y^T T y in O(k).
double quad_form(const std::vector<double>& alpha, const std::vector<double>& beta,
                 const Vector& y);

struct ProjectedResult {
  Vector y;
  double lambda = 0.0;  // multiplier; 0 on interior solutions
  double value = 0.0;   // projected model value at y
  bool interior = false;
  bool neg_curv = false;  // T indefinite
};

// min  gnorm*y_1 + 1/2 y^T T y   s.t. ||y|| <= delta
ProjectedResult solve_projected_tr(const std::vector<double>& alpha,
                                   const std::vector<double>& beta, double gnorm,
                                   double delta);

// min  gnorm*y_1 + 1/2 y^T T y + (sigma/3)||y||^3
ProjectedResult solve_projected_cubic(const std::vector<double>& alpha,
                                      const std::vector<double>& beta, double gnorm,
                                      double sigma);

}  // namespace curvopt::detail
