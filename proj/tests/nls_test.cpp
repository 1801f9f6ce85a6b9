#include <cmath>
#include <memory>

#include "curvopt/nls.hpp"
#include "curvopt/parallel.hpp"
#include "curvopt/rng.hpp"
#include "curvopt/synth.hpp"
#include "doctest.h"
#include "support/util.hpp"

using namespace curvopt;
using curvopt::testutil::same_bits;

namespace {

std::shared_ptr<const SparseDataset> small_problem(Index n, Index d, std::uint64_t seed) {
  SparseDataset ds = synth_spread_rows(n, d, 1.0, seed);  // dense gaussian-ish rows
  Rng rng(seed + 1);
  for (double& y : ds.labels) y = rng.uniform01() < 0.5 ? 0.0 : 1.0;
  return std::make_shared<const SparseDataset>(std::move(ds));
}

Matrix dense_hessian(const SparseDataset& ds, const Vector& x) {
  Matrix H = Matrix::Zero(ds.d, ds.d);
  for (Index i = 0; i < ds.n; ++i) {
    Vector ai = Vector::Zero(ds.d);
    ds.row_axpy(i, 1.0, ai);
    H += nls::d2loss(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)]) * ai *
         ai.transpose();
  }
  return H / static_cast<double>(ds.n);
}

}  // namespace

TEST_CASE("gradient matches central finite differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto ds = small_problem(25, 8, seed);
    NLSOracle oracle(ds);
    BatchSpec full = BatchSpec::full(oracle.num_samples());
    PropagationLedger led;
    Rng rng(seed * 100 + 9);
    Vector x(8);
    rng.fill_gaussian(x);
    Vector g = oracle.loss_grad(x, full, led).grad;
    const double h = 1e-6;
    for (Index j = 0; j < 8; ++j) {
      Vector xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      double fd = (oracle.loss(xp, full, led) - oracle.loss(xm, full, led)) / (2 * h);
      CHECK(std::abs(g(j) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("hvp matches finite differences of the gradient and the dense Hessian") {
  auto ds = small_problem(30, 10, 7);
  NLSOracle oracle(ds);
  BatchSpec full = BatchSpec::full(oracle.num_samples());
  PropagationLedger led;
  Rng rng(71);
  Vector x(10), v(10);
  rng.fill_gaussian(x);
  rng.fill_gaussian(v);

  Vector hv = oracle.hvp(x, v, full, led);
  const double h = 1e-6;
  Vector gp = oracle.loss_grad(x + h * v, full, led).grad;
  Vector gm = oracle.loss_grad(x - h * v, full, led).grad;
  Vector fd = (gp - gm) / (2 * h);
  CHECK((hv - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));

  Matrix H = dense_hessian(*ds, x);
  CHECK((hv - H * v).norm() <= 1e-12 * std::max(1.0, (H * v).norm()));
}

TEST_CASE("ggn is the PSD part and dominates curvature of well-fit residuals") {
  auto ds = small_problem(20, 6, 13);
  NLSOracle oracle(ds);
  BatchSpec full = BatchSpec::full(oracle.num_samples());
  PropagationLedger led;
  Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    Vector x(6), v(6);
    rng.fill_gaussian(x);
    rng.fill_gaussian(v);
    CHECK(v.dot(oracle.ggn_vp(x, v, full, led)) >= -1e-12);  // PSD
  }
  // dense check of the ggn scalar
  Vector x(6), v(6);
  rng.fill_gaussian(x);
  rng.fill_gaussian(v);
  Matrix G = Matrix::Zero(6, 6);
  for (Index i = 0; i < ds->n; ++i) {
    Vector ai = Vector::Zero(6);
    ds->row_axpy(i, 1.0, ai);
    G += nls::ggn_scalar(ds->row_dot(i, x)) * ai * ai.transpose();
  }
  G /= static_cast<double>(ds->n);
  CHECK((oracle.ggn_vp(x, v, full, led) - G * v).norm() <= 1e-12 * (G * v).norm());
}

TEST_CASE("serial kernels agree with the chunked oracle") {
  SynthClassConfig cfg;
  cfg.n_train = 1500;  // several chunks
  cfg.n_test = 1;
  auto ds = std::make_shared<const SparseDataset>(synth_classification(cfg).train);
  NLSOracle oracle(ds);
  BatchSpec full = BatchSpec::full(oracle.num_samples());
  PropagationLedger led;
  Rng rng(3);
  Vector x(ds->d), v(ds->d);
  rng.fill_gaussian(x);
  rng.fill_gaussian(v);
  x /= 4.0;

  par::set_enabled(true);
  double rel = std::abs(oracle.loss(x, full, led) - nls::loss_serial(*ds, x, full));
  CHECK(rel <= 1e-13 * std::max(1.0, std::abs(nls::loss_serial(*ds, x, full))));
  CHECK((oracle.loss_grad(x, full, led).grad - nls::grad_serial(*ds, x, full)).norm() <=
        1e-13 * std::max(1.0, nls::grad_serial(*ds, x, full).norm()));
  CHECK((oracle.hvp(x, v, full, led) - nls::hvp_serial(*ds, x, v, full)).norm() <=
        1e-13 * std::max(1.0, nls::hvp_serial(*ds, x, v, full).norm()));
  CHECK((oracle.ggn_vp(x, v, full, led) - nls::ggn_vp_serial(*ds, x, v, full)).norm() <=
        1e-13);

  // chunked path is bitwise stable across parallel on/off and thread counts
  par::set_enabled(false);
  double loss_off = oracle.loss(x, full, led);
  Vector grad_off = oracle.loss_grad(x, full, led).grad;
  Vector hvp_off = oracle.hvp(x, v, full, led);
  par::set_enabled(true);
  for (int t : {1, 2, 7}) {
    par::set_threads(t);
    CHECK(oracle.loss(x, full, led) == loss_off);
    CHECK(same_bits(oracle.loss_grad(x, full, led).grad, grad_off));
    CHECK(same_bits(oracle.hvp(x, v, full, led), hvp_off));
  }
  par::set_threads(0);
}

TEST_CASE("weighted batches are weighted means") {
  auto ds = small_problem(10, 4, 21);
  NLSOracle oracle(ds);
  PropagationLedger led;
  BatchSpec b;
  b.indices = {3, 3, 7};  // repeats allowed
  b.weights = {2.0, 0.5, 4.0};
  Vector x(4);
  Rng rng(5);
  rng.fill_gaussian(x);
  double expected = 0.0;
  for (Index k = 0; k < 3; ++k) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    expected += b.weights[static_cast<std::size_t>(k)] *
                nls::loss_term(ds->row_dot(i, x), ds->labels[static_cast<std::size_t>(i)]);
  }
  expected /= 3.0;
  CHECK(oracle.loss(x, b, led) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("per-call ledger charges") {
  auto ds = small_problem(10, 4, 33);
  NLSOracle oracle(ds);
  PropagationLedger led;
  BatchSpec b = BatchSpec::full(10);
  Vector x = Vector::Zero(4), v = Vector::Ones(4);
  (void)oracle.loss(x, b, led);
  CHECK(led.forward == 10);
  CHECK(led.backward == 0);
  (void)oracle.loss_grad(x, b, led);
  CHECK(led.forward == 20);
  CHECK(led.backward == 10);
  (void)oracle.hvp(x, v, b, led);
  CHECK(led.forward == 30);
  CHECK(led.backward == 20);
  (void)oracle.error_rate(x, led);
  CHECK(led.forward == 40);
  (void)oracle.curvature_scores(x, led);
  CHECK(led.forward == 50);
  CHECK(led.backward == 20);
}

TEST_CASE("error rate counts thresholded mismatches") {
  SparseDataset ds;
  ds.n = 4;
  ds.d = 1;
  ds.indptr = {0, 1, 2, 3, 4};
  ds.colind = {0, 0, 0, 0};
  ds.values = {1.0, 1.0, -1.0, -1.0};
  ds.labels = {1.0, 0.0, 0.0, 1.0};
  NLSOracle oracle(std::make_shared<const SparseDataset>(std::move(ds)));
  PropagationLedger led;
  Vector w = Vector::Ones(1);
  // z = +1,+1,-1,-1 -> predictions 1,1,0,0 vs labels 1,0,0,1 -> 2 wrong
  CHECK(oracle.error_rate(w, led) == doctest::Approx(0.5));
}

TEST_CASE("labels outside {0,1} are rejected") {
  SparseDataset ds;
  ds.n = 1;
  ds.d = 1;
  ds.indptr = {0, 1};
  ds.colind = {0};
  ds.values = {1.0};
  ds.labels = {2.0};
  CHECK_THROWS(NLSOracle(std::make_shared<const SparseDataset>(std::move(ds))));
}

TEST_CASE("curvature scores are |l''| times the squared row norm") {
  auto ds = small_problem(12, 5, 41);
  NLSOracle oracle(ds);
  PropagationLedger led;
  Rng rng(6);
  Vector x(5);
  rng.fill_gaussian(x);
  Vector s = oracle.curvature_scores(x, led);
  for (Index i = 0; i < 12; ++i) {
    double expect = std::abs(nls::d2loss(ds->row_dot(i, x),
                                         ds->labels[static_cast<std::size_t>(i)])) *
                    ds->row_norm_sq(i);
    CHECK(s(i) == doctest::Approx(expect).epsilon(1e-14));
  }
}
