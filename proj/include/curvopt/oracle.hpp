#pragma once

#include <limits>
#include <stdexcept>

#include "curvopt/batch.hpp"
#include "curvopt/ledger.hpp"
#include "curvopt/types.hpp"

namespace curvopt {

struct LossGrad {
  double loss = 0.0;
  Vector grad;
};

// Finite-sum problem F(x) = (1/n) sum_i f_i(x), evaluated on weighted batches:
// every method computes (1/|B|) sum_k w_k * term(i_k), so the full batch (unit
// weights) yields the plain mean. Ledger charges per call, in units of
// per-sample propagations:
//   loss       |B| forward
//   loss_grad  |B| forward + |B| backward (fused; forward state reused)
//   hvp/ggn_vp |B| forward + |B| backward (extra pair on top of a gradient
//              pass whose intermediates are assumed cached)
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual Index dim() const = 0;
  virtual Index num_samples() const = 0;

  virtual double loss(const Vector& x, const BatchSpec& batch,
                      PropagationLedger& ledger) const = 0;
  virtual LossGrad loss_grad(const Vector& x, const BatchSpec& batch,
                             PropagationLedger& ledger) const = 0;
  virtual Vector hvp(const Vector& x, const Vector& v, const BatchSpec& batch,
                     PropagationLedger& ledger) const = 0;
  virtual Vector ggn_vp(const Vector& x, const Vector& v, const BatchSpec& batch,
                        PropagationLedger& ledger) const = 0;

  // Classification error over this oracle's own samples; charges n forward.
  // NaN when the problem has no notion of a label error.
  virtual double error_rate(const Vector& x, PropagationLedger& ledger) const {
    (void)x;
    ledger.forward += static_cast<std::uint64_t>(num_samples());
    return std::numeric_limits<double>::quiet_NaN();
  }

  // Per-sample curvature magnitudes |f_i''(z_i)| * ||a_i||^2 for non-uniform
  // Hessian sampling; charges n forward. Only meaningful for linear-prediction
  // losses; the default refuses.
  virtual Vector curvature_scores(const Vector& x, PropagationLedger& ledger) const {
    (void)x;
    (void)ledger;
    throw std::logic_error("curvature_scores: not available for this problem");
  }
};

}  // namespace curvopt
