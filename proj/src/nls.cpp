#include "curvopt/nls.hpp"

#include "curvopt/parallel.hpp"

namespace curvopt {
namespace nls {

double loss_serial(const SparseDataset& ds, const Vector& x, const BatchSpec& b) {
  double acc = 0.0;
  for (Index k = 0; k < b.size(); ++k) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    acc += b.weights[static_cast<std::size_t>(k)] *
           loss_term(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)]);
  }
  return acc / static_cast<double>(b.size());
}

Vector grad_serial(const SparseDataset& ds, const Vector& x, const BatchSpec& b) {
  Vector g = Vector::Zero(ds.d);
  for (Index k = 0; k < b.size(); ++k) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    double c = b.weights[static_cast<std::size_t>(k)] *
               dloss(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)]);
    ds.row_axpy(i, c, g);
  }
  return g / static_cast<double>(b.size());
}

Vector hvp_serial(const SparseDataset& ds, const Vector& x, const Vector& v,
                  const BatchSpec& b) {
  Vector h = Vector::Zero(ds.d);
  for (Index k = 0; k < b.size(); ++k) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    double c = b.weights[static_cast<std::size_t>(k)] *
               d2loss(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)]) *
               ds.row_dot(i, v);
    ds.row_axpy(i, c, h);
  }
  return h / static_cast<double>(b.size());
}

Vector ggn_vp_serial(const SparseDataset& ds, const Vector& x, const Vector& v,
                     const BatchSpec& b) {
  Vector h = Vector::Zero(ds.d);
  for (Index k = 0; k < b.size(); ++k) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    double c = b.weights[static_cast<std::size_t>(k)] * ggn_scalar(ds.row_dot(i, x)) *
               ds.row_dot(i, v);
    ds.row_axpy(i, c, h);
  }
  return h / static_cast<double>(b.size());
}

}  // namespace nls

NLSOracle::NLSOracle(std::shared_ptr<const SparseDataset> data) : data_(std::move(data)) {
  data_->check();
  for (double y : data_->labels)
    if (y != 0.0 && y != 1.0)
      throw std::invalid_argument("NLSOracle: labels must be 0 or 1");
  row_norms_sq_.resize(static_cast<std::size_t>(data_->n));
  for (Index i = 0; i < data_->n; ++i)
    row_norms_sq_[static_cast<std::size_t>(i)] = data_->row_norm_sq(i);
}

double NLSOracle::loss(const Vector& x, const BatchSpec& b, PropagationLedger& led) const {
  b.validate(data_->n);
  led.forward += static_cast<std::uint64_t>(b.size());
  const SparseDataset& ds = *data_;
  double acc = par::sum_chunked(b.size(), [&](Index k) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    return b.weights[static_cast<std::size_t>(k)] *
           nls::loss_term(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)]);
  });
  return acc / static_cast<double>(b.size());
}

LossGrad NLSOracle::loss_grad(const Vector& x, const BatchSpec& b,
                              PropagationLedger& led) const {
  b.validate(data_->n);
  led.forward += static_cast<std::uint64_t>(b.size());
  led.backward += static_cast<std::uint64_t>(b.size());
  const SparseDataset& ds = *data_;
  double inv = 1.0 / static_cast<double>(b.size());
  LossGrad out;
  out.loss = inv * par::sum_chunked(b.size(), [&](Index k) {
               Index i = b.indices[static_cast<std::size_t>(k)];
               return b.weights[static_cast<std::size_t>(k)] *
                      nls::loss_term(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)]);
             });
  out.grad = par::accumulate_chunked(b.size(), ds.d, [&](Index k, Vector& acc) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    double c = b.weights[static_cast<std::size_t>(k)] *
               nls::dloss(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)]);
    ds.row_axpy(i, c, acc);
  });
  out.grad *= inv;
  return out;
}

Vector NLSOracle::hvp(const Vector& x, const Vector& v, const BatchSpec& b,
                      PropagationLedger& led) const {
  b.validate(data_->n);
  led.forward += static_cast<std::uint64_t>(b.size());
  led.backward += static_cast<std::uint64_t>(b.size());
  const SparseDataset& ds = *data_;
  Vector h = par::accumulate_chunked(b.size(), ds.d, [&](Index k, Vector& acc) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    double c = b.weights[static_cast<std::size_t>(k)] *
               nls::d2loss(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)]) *
               ds.row_dot(i, v);
    ds.row_axpy(i, c, acc);
  });
  return h / static_cast<double>(b.size());
}

Vector NLSOracle::ggn_vp(const Vector& x, const Vector& v, const BatchSpec& b,
                         PropagationLedger& led) const {
  b.validate(data_->n);
  led.forward += static_cast<std::uint64_t>(b.size());
  led.backward += static_cast<std::uint64_t>(b.size());
  const SparseDataset& ds = *data_;
  Vector h = par::accumulate_chunked(b.size(), ds.d, [&](Index k, Vector& acc) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    double c = b.weights[static_cast<std::size_t>(k)] * nls::ggn_scalar(ds.row_dot(i, x)) *
               ds.row_dot(i, v);
    ds.row_axpy(i, c, acc);
  });
  return h / static_cast<double>(b.size());
}

double NLSOracle::error_rate(const Vector& x, PropagationLedger& led) const {
  led.forward += static_cast<std::uint64_t>(data_->n);
  const SparseDataset& ds = *data_;
  double wrong = par::sum_chunked(ds.n, [&](Index i) {
    bool pred = ds.row_dot(i, x) >= 0.0;
    bool truth = ds.labels[static_cast<std::size_t>(i)] >= 0.5;
    return pred == truth ? 0.0 : 1.0;
  });
  return wrong / static_cast<double>(ds.n);
}

Vector NLSOracle::curvature_scores(const Vector& x, PropagationLedger& led) const {
  led.forward += static_cast<std::uint64_t>(data_->n);
  const SparseDataset& ds = *data_;
  Vector s(ds.n);
  const bool go = par::enabled() && ds.n > par::kChunk;
  (void)go;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (go)
#endif
  for (Index i = 0; i < ds.n; ++i)
    s[i] = std::abs(nls::d2loss(ds.row_dot(i, x), ds.labels[static_cast<std::size_t>(i)])) *
           row_norms_sq_[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace curvopt
