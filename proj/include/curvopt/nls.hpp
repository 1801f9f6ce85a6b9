#pragma once

#include <cmath>
#include <memory>

#include "curvopt/dataset.hpp"
#include "curvopt/oracle.hpp"

namespace curvopt {
namespace nls {

// phi(z) = 1/(1+e^-z), evaluated without overflow on either tail.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Scalar pieces of l(z; y) = (y - phi(z))^2.
inline double loss_term(double z, double y) {
  double r = y - sigmoid(z);
  return r * r;
}
inline double dloss(double z, double y) {
  double s = sigmoid(z);
  return 2.0 * (s - y) * s * (1.0 - s);
}
// l'' = 2 phi'^2 + 2 (phi - y) phi'' with phi' = s(1-s), phi'' = s(1-s)(1-2s).
// Sign-indefinite: the residual term makes the loss non-convex in z.
inline double d2loss(double z, double y) {
  double s = sigmoid(z);
  double sp = s * (1.0 - s);
  return 2.0 * sp * sp + 2.0 * (s - y) * sp * (1.0 - 2.0 * s);
}
// Gauss-Newton scalar: the PSD part 2 phi'^2.
inline double ggn_scalar(double z) {
  double s = sigmoid(z);
  double sp = s * (1.0 - s);
  return 2.0 * sp * sp;
}

// Serial reference kernels: naive in-order loops over batch positions,
// identical weighted-mean semantics as the oracle. Kept for tests and the
// kernel benchmark.
double loss_serial(const SparseDataset& ds, const Vector& x, const BatchSpec& b);
Vector grad_serial(const SparseDataset& ds, const Vector& x, const BatchSpec& b);
Vector hvp_serial(const SparseDataset& ds, const Vector& x, const Vector& v,
                  const BatchSpec& b);
Vector ggn_vp_serial(const SparseDataset& ds, const Vector& x, const Vector& v,
                     const BatchSpec& b);

}  // namespace nls

// F(w) = (1/n) sum_i (y_i - phi(a_i^T w))^2, y in {0,1}.
class NLSOracle final : public Oracle {
 public:
  explicit NLSOracle(std::shared_ptr<const SparseDataset> data);

  Index dim() const override { return data_->d; }
  Index num_samples() const override { return data_->n; }

  double loss(const Vector& x, const BatchSpec& b, PropagationLedger& led) const override;
  LossGrad loss_grad(const Vector& x, const BatchSpec& b, PropagationLedger& led) const override;
  Vector hvp(const Vector& x, const Vector& v, const BatchSpec& b,
             PropagationLedger& led) const override;
  Vector ggn_vp(const Vector& x, const Vector& v, const BatchSpec& b,
                PropagationLedger& led) const override;

  double error_rate(const Vector& x, PropagationLedger& led) const override;
  // |l''(z_i)| * ||a_i||^2 over all samples.
  Vector curvature_scores(const Vector& x, PropagationLedger& led) const override;

  const SparseDataset& data() const { return *data_; }

 private:
  std::shared_ptr<const SparseDataset> data_;
  std::vector<double> row_norms_sq_;
};

}  // namespace curvopt
