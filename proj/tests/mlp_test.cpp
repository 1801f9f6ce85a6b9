#include <cmath>
#include <memory>

#include "curvopt/mlp.hpp"
#include "curvopt/parallel.hpp"
#include "curvopt/rng.hpp"
#include "doctest.h"
#include "support/util.hpp"

using namespace curvopt;
using curvopt::testutil::same_bits;

namespace {

std::shared_ptr<const DenseData> random_classify(Index n, Index d, Index classes,
                                                 std::uint64_t seed) {
  DenseData data;
  data.X = Matrix(n, d);
  Rng rng(seed);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) data.X(i, j) = rng.gaussian();
  data.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    data.labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(classes));
  return std::make_shared<const DenseData>(std::move(data));
}

std::shared_ptr<const DenseData> random_targets(Index n, Index d, Index k, bool unit_box,
                                                std::uint64_t seed) {
  DenseData data;
  data.X = Matrix(n, d);
  data.targets = Matrix(n, k);
  Rng rng(seed);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) data.X(i, j) = rng.gaussian();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < k; ++j)
      data.targets(i, j) = unit_box ? rng.uniform01() : rng.gaussian();
  return std::make_shared<const DenseData>(std::move(data));
}

// Central finite differences of loss and of grad against the analytic pair.
void check_derivatives(const MlpSpec& spec, std::shared_ptr<const DenseData> data,
                       std::uint64_t seed) {
  MlpOracle oracle(spec, data);
  BatchSpec full = BatchSpec::full(oracle.num_samples());
  PropagationLedger led;
  Rng rng(seed);
  Vector x(oracle.dim());
  rng.fill_gaussian(x);
  x *= 0.5;  // keep activations off the saturated tails

  Vector g = oracle.loss_grad(x, full, led).grad;
  const double h = 1e-6;
  for (Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    double fd = (oracle.loss(xp, full, led) - oracle.loss(xm, full, led)) / (2 * h);
    CHECK(std::abs(g(j) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }

  Vector v(x.size());
  rng.fill_gaussian(v);
  Vector hv = oracle.hvp(x, v, full, led);
  const double hh = 1e-5;
  Vector gp = oracle.loss_grad(x + hh * v, full, led).grad;
  Vector gm = oracle.loss_grad(x - hh * v, full, led).grad;
  Vector fd = (gp - gm) / (2 * hh);
  CHECK((hv - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));

  // Hessian symmetry through the R-op: u'Hv == v'Hu
  Vector u(x.size());
  rng.fill_gaussian(u);
  double uhv = u.dot(oracle.hvp(x, v, full, led));
  double vhu = v.dot(oracle.hvp(x, u, full, led));
  CHECK(std::abs(uhv - vhu) <= 1e-11 * std::max(1.0, std::abs(uhv)));

  // GGN is positive semidefinite
  for (int rep = 0; rep < 10; ++rep) {
    Vector w(x.size());
    rng.fill_gaussian(w);
    CHECK(w.dot(oracle.ggn_vp(x, w, full, led)) >= -1e-12);
  }
}

}  // namespace

TEST_CASE("derivatives: softmax cross-entropy with logistic hidden layer") {
  MlpSpec spec;
  spec.layers = {3, 5, 3};
  spec.act = {Activation::logistic, Activation::identity};
  spec.loss = MlpLoss::softmax_cross_entropy;
  check_derivatives(spec, random_classify(12, 3, 3, 101), 11);
}

TEST_CASE("derivatives: softmax cross-entropy with tanh hidden layer, depth 3") {
  MlpSpec spec;
  spec.layers = {2, 3, 3, 2};
  spec.act = {Activation::tanh_act, Activation::tanh_act, Activation::identity};
  spec.loss = MlpLoss::softmax_cross_entropy;
  check_derivatives(spec, random_classify(9, 2, 2, 103), 13);
}

TEST_CASE("derivatives: sigmoid cross-entropy") {
  MlpSpec spec;
  spec.layers = {4, 5, 3};
  spec.act = {Activation::tanh_act, Activation::logistic};
  spec.loss = MlpLoss::sigmoid_cross_entropy;
  check_derivatives(spec, random_targets(10, 4, 3, true, 107), 17);
}

TEST_CASE("derivatives: squared loss, identity output") {
  MlpSpec spec;
  spec.layers = {3, 4, 2};
  spec.act = {Activation::logistic, Activation::identity};
  spec.loss = MlpLoss::squared;
  check_derivatives(spec, random_targets(11, 3, 2, false, 109), 19);
}

TEST_CASE("derivatives: squared loss, logistic output (autoencoder shape)") {
  MlpSpec spec;
  spec.layers = {4, 3, 4};
  spec.act = {Activation::tanh_act, Activation::logistic};
  spec.loss = MlpLoss::squared;
  check_derivatives(spec, random_targets(8, 4, 4, true, 113), 23);
}

TEST_CASE("linear net with squared loss: Hessian equals Gauss-Newton") {
  MlpSpec spec;
  spec.layers = {3, 2};
  spec.act = {Activation::identity};
  spec.loss = MlpLoss::squared;
  auto data = random_targets(15, 3, 2, false, 211);
  MlpOracle oracle(spec, data);
  BatchSpec full = BatchSpec::full(15);
  PropagationLedger led;
  Rng rng(31);
  Vector x(oracle.dim()), v(oracle.dim());
  rng.fill_gaussian(x);
  rng.fill_gaussian(v);
  Vector hv = oracle.hvp(x, v, full, led);
  Vector gv = oracle.ggn_vp(x, v, full, led);
  CHECK((hv - gv).norm() <= 1e-13 * std::max(1.0, hv.norm()));
}

TEST_CASE("cross-entropy at zero parameters is log 2") {
  {
    MlpSpec spec;
    spec.layers = {5, 2};
    spec.act = {Activation::identity};
    spec.loss = MlpLoss::softmax_cross_entropy;
    auto data = random_classify(20, 5, 2, 307);
    MlpOracle oracle(spec, data);
    PropagationLedger led;
    double f = oracle.loss(Vector::Zero(oracle.dim()), BatchSpec::full(20), led);
    CHECK(f == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  {
    MlpSpec spec;
    spec.layers = {3, 1};
    spec.act = {Activation::logistic};
    spec.loss = MlpLoss::sigmoid_cross_entropy;
    auto data = random_targets(10, 3, 1, true, 311);
    MlpOracle oracle(spec, data);
    PropagationLedger led;
    double f = oracle.loss(Vector::Zero(oracle.dim()), BatchSpec::full(10), led);
    CHECK(f == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("spec validation rejects bad loss/activation pairings") {
  MlpSpec spec;
  spec.layers = {3, 2};
  spec.act = {Activation::logistic};
  spec.loss = MlpLoss::softmax_cross_entropy;
  CHECK_THROWS(spec.validate());  // softmax wants identity output
  spec.loss = MlpLoss::sigmoid_cross_entropy;
  CHECK_NOTHROW(spec.validate());
  spec.act = {Activation::identity};
  CHECK_THROWS(spec.validate());  // sigmoid CE wants logistic output
  spec.loss = MlpLoss::squared;
  CHECK_NOTHROW(spec.validate());
  spec.act = {};
  CHECK_THROWS(spec.validate());  // one activation per non-input layer
  spec.layers = {4};
  spec.act = {Activation::identity};
  CHECK_THROWS(spec.validate());
}

TEST_CASE("error rate is the argmax mismatch fraction; NaN for reconstruction") {
  MlpSpec spec;
  spec.layers = {2, 2};
  spec.act = {Activation::identity};
  spec.loss = MlpLoss::softmax_cross_entropy;
  DenseData data;
  data.X = Matrix::Identity(2, 2);
  data.labels = {0, 1};
  MlpOracle oracle(spec, std::make_shared<const DenseData>(data));
  PropagationLedger led;
  // identity weights, zero bias: logits = x, so both rows classified right
  Vector p = Vector::Zero(oracle.dim());
  p(0) = 1.0;  // W(0,0)
  p(3) = 1.0;  // W(1,1) column-major
  CHECK(oracle.error_rate(p, led) == doctest::Approx(0.0));
  data.labels = {1, 0};
  MlpOracle flipped(spec, std::make_shared<const DenseData>(data));
  CHECK(flipped.error_rate(p, led) == doctest::Approx(1.0));

  MlpSpec auto_spec;
  auto_spec.layers = {2, 2};
  auto_spec.act = {Activation::identity};
  auto_spec.loss = MlpLoss::squared;
  auto recon = random_targets(3, 2, 2, false, 401);
  MlpOracle ae(auto_spec, recon);
  CHECK(std::isnan(ae.error_rate(Vector::Zero(ae.dim()), led)));
}

TEST_CASE("init schemes act on the whole flattened vector") {
  MlpSpec spec;
  spec.layers = {4, 3, 2};
  spec.act = {Activation::tanh_act, Activation::identity};
  spec.loss = MlpLoss::softmax_cross_entropy;
  {
    Rng rng(5);
    Vector z = init_params(spec, InitScheme::zeros, 0.0, rng);
    CHECK(z.size() == spec.param_count());
    CHECK(z.norm() == 0.0);
  }
  {
    Rng r1(5), r2(5);
    Vector a = init_params(spec, InitScheme::normal, 0.0, r1);
    Vector b = init_params(spec, InitScheme::normal, 0.0, r2);
    CHECK(same_bits(a, b));  // deterministic in the seed
    Rng r3(6);
    CHECK_FALSE(same_bits(init_params(spec, InitScheme::normal, 0.0, r3), a));
  }
  {
    Rng rng(5);
    Vector u = init_params(spec, InitScheme::normalized, 0.0, rng);
    CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  {
    Rng r1(5), r2(5);
    Vector plain = init_params(spec, InitScheme::normal, 0.0, r1);
    Vector scaled = init_params(spec, InitScheme::scaled, 0.25, r2);
    CHECK((scaled - 0.25 * plain).norm() == 0.0);
  }
}

TEST_CASE("serial kernels agree with the chunked oracle") {
  MlpSpec spec;
  spec.layers = {10, 8, 3};
  spec.act = {Activation::logistic, Activation::identity};
  spec.loss = MlpLoss::softmax_cross_entropy;
  auto data = random_classify(1300, 10, 3, 601);  // several chunks
  MlpOracle oracle(spec, data);
  BatchSpec full = BatchSpec::full(1300);
  PropagationLedger led;
  Rng rng(43);
  Vector x(oracle.dim()), v(oracle.dim());
  rng.fill_gaussian(x);
  rng.fill_gaussian(v);
  x *= 0.3;

  par::set_enabled(true);
  double f_ser = mlp::loss_serial(spec, *data, x, full);
  CHECK(std::abs(oracle.loss(x, full, led) - f_ser) <= 1e-13 * std::max(1.0, std::abs(f_ser)));
  LossGrad lg_ser = mlp::loss_grad_serial(spec, *data, x, full);
  LossGrad lg = oracle.loss_grad(x, full, led);
  CHECK(std::abs(lg.loss - lg_ser.loss) <= 1e-13 * std::max(1.0, std::abs(lg_ser.loss)));
  CHECK((lg.grad - lg_ser.grad).norm() <= 1e-13 * std::max(1.0, lg_ser.grad.norm()));
  CHECK((oracle.hvp(x, v, full, led) - mlp::hvp_serial(spec, *data, x, v, full)).norm() <=
        1e-13 * std::max(1.0, mlp::hvp_serial(spec, *data, x, v, full).norm()));
  CHECK((oracle.ggn_vp(x, v, full, led) - mlp::ggn_vp_serial(spec, *data, x, v, full)).norm() <=
        1e-13 * std::max(1.0, mlp::ggn_vp_serial(spec, *data, x, v, full).norm()));

  par::set_enabled(false);
  Vector grad_off = oracle.loss_grad(x, full, led).grad;
  Vector hvp_off = oracle.hvp(x, v, full, led);
  par::set_enabled(true);
  for (int t : {1, 3}) {
    par::set_threads(t);
    CHECK(same_bits(oracle.loss_grad(x, full, led).grad, grad_off));
    CHECK(same_bits(oracle.hvp(x, v, full, led), hvp_off));
  }
  par::set_threads(0);
}

TEST_CASE("per-call ledger charges") {
  MlpSpec spec;
  spec.layers = {3, 4, 2};
  spec.act = {Activation::logistic, Activation::identity};
  spec.loss = MlpLoss::softmax_cross_entropy;
  auto data = random_classify(6, 3, 2, 701);
  MlpOracle oracle(spec, data);
  PropagationLedger led;
  BatchSpec b = BatchSpec::full(6);
  Vector x = Vector::Zero(oracle.dim()), v = Vector::Ones(oracle.dim());
  (void)oracle.loss(x, b, led);
  CHECK(led.forward == 6);
  CHECK(led.backward == 0);
  (void)oracle.loss_grad(x, b, led);
  CHECK(led.forward == 12);
  CHECK(led.backward == 6);
  (void)oracle.hvp(x, v, b, led);
  CHECK(led.forward == 18);
  CHECK(led.backward == 12);
  (void)oracle.ggn_vp(x, v, b, led);
  CHECK(led.forward == 24);
  CHECK(led.backward == 18);
  (void)oracle.error_rate(x, led);
  CHECK(led.forward == 30);
}
