#pragma once

#include "curvopt/oracle.hpp"
#include "curvopt/types.hpp"

namespace curvopt {

// Symmetric linear operator v -> Hv. Krylov solvers see curvature only
// through this interface and count their own applications.
class HessianOperator {
 public:
  virtual ~HessianOperator() = default;
  virtual Index dim() const = 0;
  virtual Vector apply(const Vector& v) const = 0;
};

class DenseOperator final : public HessianOperator {
 public:
  explicit DenseOperator(Matrix H) : H_(std::move(H)) {}
  Index dim() const override { return H_.rows(); }
  Vector apply(const Vector& v) const override { return H_ * v; }
  const Matrix& matrix() const { return H_; }

 private:
  Matrix H_;
};

enum class CurvatureKind { hessian, ggn };

// How batch terms combine into the operator:
//   mean          (1/|B|) sum_k w_k H_{i_k}   -- full batch (w = 1) gives the
//                 curvature of the mean objective F
//   weighted_sum  sum_k w_k H_{i_k}           -- importance-sampled batches,
//                 whose weights 1/(n |S| p_j) already make the sum an
//                 unbiased estimate of the full curvature
enum class BatchCombine { mean, weighted_sum };

// Curvature of a frozen batch at a frozen point. The oracle averages
// internally, so weighted_sum pre-scales the weights by |B|. Ledger charges
// accrue on the ledger passed here (per-call accounting; the drivers keep
// their own normative per-iteration ledger).
class BatchCurvatureOperator final : public HessianOperator {
 public:
  BatchCurvatureOperator(const Oracle& oracle, Vector x, const BatchSpec& batch,
                         CurvatureKind kind, BatchCombine combine,
                         PropagationLedger& ledger)
      : oracle_(oracle),
        x_(std::move(x)),
        batch_(combine == BatchCombine::weighted_sum
                   ? batch.scaled_weights(static_cast<double>(batch.size()))
                   : batch),
        kind_(kind),
        ledger_(ledger) {}

  Index dim() const override { return oracle_.dim(); }

  Vector apply(const Vector& v) const override {
    return kind_ == CurvatureKind::hessian ? oracle_.hvp(x_, v, batch_, ledger_)
                                           : oracle_.ggn_vp(x_, v, batch_, ledger_);
  }

  Index batch_size() const { return batch_.size(); }

 private:
  const Oracle& oracle_;
  Vector x_;
  BatchSpec batch_;
  CurvatureKind kind_;
  PropagationLedger& ledger_;
};

}  // namespace curvopt
