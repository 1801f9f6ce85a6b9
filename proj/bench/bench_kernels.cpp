#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>

#include "curvopt/batch.hpp"
#include "curvopt/ledger.hpp"
#include "curvopt/mlp.hpp"
#include "curvopt/nls.hpp"
#include "curvopt/parallel.hpp"
#include "curvopt/rng.hpp"
#include "curvopt/synth.hpp"

using namespace curvopt;

namespace {

double best_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

// The serial kernels fold in sample order, the oracle in chunk order, so
// agreement is to rounding; bitwise reproducibility is across thread counts.
void row(const char* name, double serial_ms, double par_ms, double rel) {
  std::printf("%-16s %10.3f ms %10.3f ms   x%5.2f   rel %.2e\n", name, serial_ms,
              par_ms, serial_ms / par_ms, rel);
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}
double rel_diff(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

int main() {
  par::set_enabled(true);
  std::printf("threads in use: %d (chunk %lld)\n", par::threads_in_use(),
              static_cast<long long>(par::kChunk));
  std::printf("%-16s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    SynthClassConfig cfg;
    cfg.n_train = 20'000;
    cfg.n_test = 1;
    SynthPair pair = synth_classification(cfg);
    auto ds = std::make_shared<const SparseDataset>(std::move(pair.train));
    NLSOracle oracle(ds);
    Rng rng(3);
    Vector x = draw_init(oracle.dim(), InitScheme::normalized, 1.0, rng);
    Vector v = draw_init(oracle.dim(), InitScheme::normal, 1.0, rng);
    BatchSpec full = BatchSpec::full(oracle.num_samples());
    PropagationLedger led;

    double s = best_ms([&] { (void)nls::loss_serial(*ds, x, full); }, 5);
    double p = best_ms([&] { (void)oracle.loss(x, full, led); }, 5);
    row("nls loss", s, p, rel_diff(oracle.loss(x, full, led), nls::loss_serial(*ds, x, full)));

    s = best_ms([&] { (void)nls::grad_serial(*ds, x, full); }, 5);
    p = best_ms([&] { (void)oracle.loss_grad(x, full, led); }, 5);
    row("nls grad", s, p,
        rel_diff(oracle.loss_grad(x, full, led).grad, nls::grad_serial(*ds, x, full)));

    s = best_ms([&] { (void)nls::hvp_serial(*ds, x, v, full); }, 5);
    p = best_ms([&] { (void)oracle.hvp(x, v, full, led); }, 5);
    row("nls hvp", s, p,
        rel_diff(oracle.hvp(x, v, full, led), nls::hvp_serial(*ds, x, v, full)));
  }

  {
    SynthClassConfig cfg;
    cfg.n_train = 4'000;
    cfg.n_test = 1;
    SynthPair pair = synth_classification(cfg);
    MlpSpec spec;
    spec.layers = {cfg.d, 32, 2};
    spec.act = {Activation::logistic, Activation::identity};
    spec.loss = MlpLoss::softmax_cross_entropy;
    auto D = std::make_shared<DenseData>();
    D->X = Matrix::Zero(pair.train.n, pair.train.d);
    for (Index i = 0; i < pair.train.n; ++i)
      for (Index q = pair.train.indptr[static_cast<std::size_t>(i)];
           q < pair.train.indptr[static_cast<std::size_t>(i) + 1]; ++q)
        D->X(i, pair.train.colind[static_cast<std::size_t>(q)]) =
            pair.train.values[static_cast<std::size_t>(q)];
    D->labels.resize(static_cast<std::size_t>(pair.train.n));
    for (Index i = 0; i < pair.train.n; ++i)
      D->labels[static_cast<std::size_t>(i)] =
          static_cast<int>(pair.train.labels[static_cast<std::size_t>(i)]);
    MlpOracle oracle(spec, D);
    Rng rng(4);
    Vector x = init_params(spec, InitScheme::scaled, 0.1, rng);
    Vector v = draw_init(oracle.dim(), InitScheme::normal, 1.0, rng);
    BatchSpec full = BatchSpec::full(oracle.num_samples());
    PropagationLedger led;

    double s = best_ms([&] { (void)mlp::loss_grad_serial(spec, *D, x, full); }, 5);
    double p = best_ms([&] { (void)oracle.loss_grad(x, full, led); }, 5);
    row("mlp loss+grad", s, p,
        rel_diff(oracle.loss_grad(x, full, led).grad,
                 mlp::loss_grad_serial(spec, *D, x, full).grad));

    s = best_ms([&] { (void)mlp::hvp_serial(spec, *D, x, v, full); }, 5);
    p = best_ms([&] { (void)oracle.hvp(x, v, full, led); }, 5);
    row("mlp hvp", s, p,
        rel_diff(oracle.hvp(x, v, full, led), mlp::hvp_serial(spec, *D, x, v, full)));

    s = best_ms([&] { (void)mlp::ggn_vp_serial(spec, *D, x, v, full); }, 5);
    p = best_ms([&] { (void)oracle.ggn_vp(x, v, full, led); }, 5);
    row("mlp ggn-vp", s, p,
        rel_diff(oracle.ggn_vp(x, v, full, led), mlp::ggn_vp_serial(spec, *D, x, v, full)));
  }
  return 0;
}
