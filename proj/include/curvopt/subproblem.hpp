#pragma once

#include "curvopt/hessian_op.hpp"
#include "curvopt/types.hpp"

namespace curvopt {

enum class Termination { interior_convergence, boundary_hit, negative_curvature, max_iterations };

const char* to_string(Termination t);

struct SubproblemResult {
  Vector step;
  double model_value = 0.0;  // m(step); <= 0 always
  Termination termination = Termination::interior_convergence;
  Index hvp_count = 0;  // exact number of operator applications
  double lambda = 0.0;  // multiplier (TR boundary / cubic), 0 on interior
};

struct TrOptions {
  // Residual tolerance relative to ||g||: stop once ||r|| <= tol * ||g||.
  double tol = 1e-8;
  // Krylov iteration cap; 0 means dim(H).
  Index max_iter = 0;
  // Steihaug stops at the first boundary crossing, which is inexact whenever
  // the exact solution is not interior. This switches to a Lanczos subspace
  // solve with an exact projected boundary solution (GLTR-style): exact in
  // the Krylov space, so running it dim(H) iterations recovers the global
  // minimizer.
  bool exact_subspace = false;
};

// min  g's + 1/2 s'Hs  s.t. ||s|| <= delta
SubproblemResult solve_tr_subproblem(const HessianOperator& H, const Vector& g,
                                     double delta, const TrOptions& opts = {});

struct CubicOptions {
  // Stop once the model gradient norm ||g + Hs + sigma||s||s|| = beta_k *
  // |y_k| drops to tol * ||g||. tol = 0 runs to the iteration cap.
  double tol = 1e-8;
  Index max_iter = 250;
  bool full_reorth = true;
};

// min  g's + 1/2 s'Hs + (sigma/3)||s||^3  via Lanczos + projected secular solve
SubproblemResult solve_cubic_subproblem(const HessianOperator& H, const Vector& g,
                                        double sigma, const CubicOptions& opts = {});

}  // namespace curvopt
