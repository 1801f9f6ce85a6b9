#pragma once

#include <memory>
#include <vector>

#include "curvopt/init.hpp"
#include "curvopt/oracle.hpp"
#include "curvopt/rng.hpp"

namespace curvopt {

enum class Activation { logistic, tanh_act, identity };
enum class MlpLoss { squared, sigmoid_cross_entropy, softmax_cross_entropy };

// Feed-forward net: layers = [d0, d1, ..., dL], act[l] applied after layer
// l+1's affine map. Parameters flatten per layer as vec(W_l) column-major
// followed by b_l, layers in order; param_count = sum (d_{l-1}+1) d_l.
struct MlpSpec {
  std::vector<Index> layers;
  std::vector<Activation> act;  // size L
  MlpLoss loss = MlpLoss::softmax_cross_entropy;

  Index depth() const { return static_cast<Index>(layers.size()) - 1; }
  Index param_count() const;
  // Enforces loss/output-activation pairing: softmax_cross_entropy needs an
  // identity output layer (softmax lives in the loss), sigmoid_cross_entropy
  // a logistic one.
  void validate() const;
};

// Dense inputs; classification tasks set `labels` (class ids), reconstruction
// tasks leave labels empty and set `targets` (n x dL). Classification targets
// are one-hot rows derived from labels.
struct DenseData {
  Matrix X;  // n x d0
  std::vector<int> labels;
  Matrix targets;

  Index n() const { return X.rows(); }
};

// Schemes act on the flattened parameter vector as a whole (see init.hpp).
Vector init_params(const MlpSpec& spec, InitScheme scheme, double c, Rng& rng);

namespace mlp {
// Serial reference kernels (in-order loops over batch positions); the oracle
// runs the same per-sample math through the chunked parallel reductions.
double loss_serial(const MlpSpec&, const DenseData&, const Vector& params, const BatchSpec&);
LossGrad loss_grad_serial(const MlpSpec&, const DenseData&, const Vector& params,
                          const BatchSpec&);
Vector hvp_serial(const MlpSpec&, const DenseData&, const Vector& params, const Vector& v,
                  const BatchSpec&);
Vector ggn_vp_serial(const MlpSpec&, const DenseData&, const Vector& params,
                     const Vector& v, const BatchSpec&);
}  // namespace mlp

class MlpOracle final : public Oracle {
 public:
  MlpOracle(MlpSpec spec, std::shared_ptr<const DenseData> data);

  Index dim() const override { return spec_.param_count(); }
  Index num_samples() const override { return data_->n(); }

  double loss(const Vector& x, const BatchSpec& b, PropagationLedger& led) const override;
  LossGrad loss_grad(const Vector& x, const BatchSpec& b,
                     PropagationLedger& led) const override;
  Vector hvp(const Vector& x, const Vector& v, const BatchSpec& b,
             PropagationLedger& led) const override;
  Vector ggn_vp(const Vector& x, const Vector& v, const BatchSpec& b,
                PropagationLedger& led) const override;

  // Classification: argmax mismatch rate; NaN for reconstruction tasks.
  double error_rate(const Vector& x, PropagationLedger& led) const override;

  const MlpSpec& spec() const { return spec_; }

 private:
  MlpSpec spec_;
  std::shared_ptr<const DenseData> data_;
};

}  // namespace curvopt
