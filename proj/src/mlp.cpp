#include "curvopt/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "curvopt/parallel.hpp"

namespace curvopt {

Index MlpSpec::param_count() const {
  Index p = 0;
  for (std::size_t l = 1; l < layers.size(); ++l)
    p += layers[l] * (layers[l - 1] + 1);
  return p;
}

void MlpSpec::validate() const {
  if (layers.size() < 2) throw std::invalid_argument("MlpSpec: need at least two layers");
  for (Index w : layers)
    if (w <= 0) throw std::invalid_argument("MlpSpec: layer widths must be positive");
  if (act.size() != layers.size() - 1)
    throw std::invalid_argument("MlpSpec: one activation per non-input layer");
  if (loss == MlpLoss::softmax_cross_entropy && act.back() != Activation::identity)
    throw std::invalid_argument(
        "MlpSpec: softmax_cross_entropy expects an identity output layer");
  if (loss == MlpLoss::sigmoid_cross_entropy && act.back() != Activation::logistic)
    throw std::invalid_argument(
        "MlpSpec: sigmoid_cross_entropy expects a logistic output layer");
}

namespace {

double logistic_fn(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void apply_act(Activation a, const Vector& z, Vector& out) {
  switch (a) {
    case Activation::logistic: out = z.unaryExpr([](double t) { return logistic_fn(t); }); break;
    case Activation::tanh_act: out = z.array().tanh(); break;
    case Activation::identity: out = z; break;
  }
}

// First/second derivatives recovered from the post-activation value.
double act_d(Activation k, double a) {
  switch (k) {
    case Activation::logistic: return a * (1.0 - a);
    case Activation::tanh_act: return 1.0 - a * a;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}
double act_dd(Activation k, double a) {
  switch (k) {
    case Activation::logistic: return a * (1.0 - a) * (1.0 - 2.0 * a);
    case Activation::tanh_act: return -2.0 * a * (1.0 - a * a);
    case Activation::identity: return 0.0;
  }
  return 0.0;
}

using CMap = Eigen::Map<const Matrix>;
using CVec = Eigen::Map<const Vector>;
using MMap = Eigen::Map<Matrix>;
using MVec = Eigen::Map<Vector>;

// Per-sample network evaluation bound to one parameter vector.
struct Net {
  const MlpSpec& spec;
  const DenseData& data;
  const Vector& p;
  Index L;
  std::vector<Index> woff, boff;

  Net(const MlpSpec& s, const DenseData& d, const Vector& params)
      : spec(s), data(d), p(params), L(s.depth()) {
    Index off = 0;
    for (Index l = 0; l < L; ++l) {
      woff.push_back(off);
      off += rows(l) * cols(l);
      boff.push_back(off);
      off += rows(l);
    }
  }

  Index rows(Index l) const { return spec.layers[static_cast<std::size_t>(l + 1)]; }
  Index cols(Index l) const { return spec.layers[static_cast<std::size_t>(l)]; }

  CMap W(Index l) const { return CMap(p.data() + woff[static_cast<std::size_t>(l)], rows(l), cols(l)); }
  CVec b(Index l) const { return CVec(p.data() + boff[static_cast<std::size_t>(l)], rows(l)); }
  static CMap Wof(const Net& net, const Vector& q, Index l) {
    return CMap(q.data() + net.woff[static_cast<std::size_t>(l)], net.rows(l), net.cols(l));
  }
  static CVec bof(const Net& net, const Vector& q, Index l) {
    return CVec(q.data() + net.boff[static_cast<std::size_t>(l)], net.rows(l));
  }
  MMap Wacc(Vector& acc, Index l) const {
    return MMap(acc.data() + woff[static_cast<std::size_t>(l)], rows(l), cols(l));
  }
  MVec bacc(Vector& acc, Index l) const {
    return MVec(acc.data() + boff[static_cast<std::size_t>(l)], rows(l));
  }

  double target(Index i, Index j) const {
    if (!data.labels.empty())
      return data.labels[static_cast<std::size_t>(i)] == static_cast<int>(j) ? 1.0 : 0.0;
    return data.targets(i, j);
  }

  // a[0..L], z[1..L]; z[0] stays empty.
  void forward(Index i, std::vector<Vector>& z, std::vector<Vector>& a) const {
    z.assign(static_cast<std::size_t>(L + 1), Vector());
    a.assign(static_cast<std::size_t>(L + 1), Vector());
    a[0] = data.X.row(i).transpose();
    for (Index l = 0; l < L; ++l) {
      z[static_cast<std::size_t>(l + 1)] = W(l) * a[static_cast<std::size_t>(l)] + b(l);
      apply_act(spec.act[static_cast<std::size_t>(l)], z[static_cast<std::size_t>(l + 1)],
                a[static_cast<std::size_t>(l + 1)]);
    }
  }

  double sample_loss(Index i, const std::vector<Vector>& z,
                     const std::vector<Vector>& a) const {
    const Vector& zL = z[static_cast<std::size_t>(L)];
    const Vector& aL = a[static_cast<std::size_t>(L)];
    const Index m = zL.size();
    switch (spec.loss) {
      case MlpLoss::squared: {
        double s = 0.0;
        for (Index j = 0; j < m; ++j) {
          double r = aL(j) - target(i, j);
          s += r * r;
        }
        return 0.5 * s;
      }
      case MlpLoss::sigmoid_cross_entropy: {
        double s = 0.0;
        for (Index j = 0; j < m; ++j) s += softplus(zL(j)) - target(i, j) * zL(j);
        return s;
      }
      case MlpLoss::softmax_cross_entropy: {
        double zmax = zL.maxCoeff();
        double lse = 0.0;
        for (Index j = 0; j < m; ++j) lse += std::exp(zL(j) - zmax);
        lse = std::log(lse) + zmax;
        double s = lse;
        for (Index j = 0; j < m; ++j) s -= target(i, j) * zL(j);
        return s;
      }
    }
    return 0.0;
  }

  Vector softmax(const Vector& zL) const {
    double zmax = zL.maxCoeff();
    Vector e = (zL.array() - zmax).exp();
    return e / e.sum();
  }

  // dloss/dz at the output layer.
  Vector output_delta(Index i, const std::vector<Vector>& z,
                      const std::vector<Vector>& a) const {
    const Vector& zL = z[static_cast<std::size_t>(L)];
    const Vector& aL = a[static_cast<std::size_t>(L)];
    const Index m = zL.size();
    Vector d(m);
    switch (spec.loss) {
      case MlpLoss::squared: {
        Activation k = spec.act.back();
        for (Index j = 0; j < m; ++j)
          d(j) = (aL(j) - target(i, j)) * act_d(k, aL(j));
        break;
      }
      case MlpLoss::sigmoid_cross_entropy:
        for (Index j = 0; j < m; ++j) d(j) = aL(j) - target(i, j);
        break;
      case MlpLoss::softmax_cross_entropy: {
        Vector pr = softmax(zL);
        for (Index j = 0; j < m; ++j) d(j) = pr(j) - target(i, j);
        break;
      }
    }
    return d;
  }

  // c * (gradient of sample i) added into acc; forward(i, z, a) already done.
  void grad_accum(Index i, double c, Vector& acc, const std::vector<Vector>& z,
                  const std::vector<Vector>& a) const {
    Vector delta = output_delta(i, z, a);
    for (Index l = L - 1; l >= 0; --l) {
      Wacc(acc, l).noalias() += c * delta * a[static_cast<std::size_t>(l)].transpose();
      bacc(acc, l) += c * delta;
      if (l > 0) {
        Vector cv = W(l).transpose() * delta;
        Activation k = spec.act[static_cast<std::size_t>(l - 1)];
        const Vector& al = a[static_cast<std::size_t>(l)];
        delta.resize(al.size());
        for (Index j = 0; j < al.size(); ++j) delta(j) = cv(j) * act_d(k, al(j));
      }
    }
  }

  // R-forward pass against direction v: rz[l], ra[l].
  void r_forward(const Vector& v, const std::vector<Vector>& z, const std::vector<Vector>& a,
                 std::vector<Vector>& rz, std::vector<Vector>& ra) const {
    (void)z;
    rz.assign(static_cast<std::size_t>(L + 1), Vector());
    ra.assign(static_cast<std::size_t>(L + 1), Vector());
    ra[0] = Vector::Zero(a[0].size());
    for (Index l = 0; l < L; ++l) {
      rz[static_cast<std::size_t>(l + 1)] = Wof(*this, v, l) * a[static_cast<std::size_t>(l)] +
                                            W(l) * ra[static_cast<std::size_t>(l)] +
                                            bof(*this, v, l);
      const Vector& al1 = a[static_cast<std::size_t>(l + 1)];
      Activation k = spec.act[static_cast<std::size_t>(l)];
      Vector& r = ra[static_cast<std::size_t>(l + 1)];
      r.resize(al1.size());
      for (Index j = 0; j < al1.size(); ++j)
        r(j) = act_d(k, al1(j)) * rz[static_cast<std::size_t>(l + 1)](j);
    }
  }

  // R{dloss/dz} at the output layer (Hessian of the loss wrt z along rz,
  // plus activation curvature where the loss sits on post-activations).
  Vector output_rdelta(Index i, const std::vector<Vector>& z, const std::vector<Vector>& a,
                       const std::vector<Vector>& rz, const std::vector<Vector>& ra) const {
    const Vector& zL = z[static_cast<std::size_t>(L)];
    const Vector& aL = a[static_cast<std::size_t>(L)];
    const Vector& rzL = rz[static_cast<std::size_t>(L)];
    const Vector& raL = ra[static_cast<std::size_t>(L)];
    const Index m = zL.size();
    Vector rd(m);
    switch (spec.loss) {
      case MlpLoss::squared: {
        Activation k = spec.act.back();
        for (Index j = 0; j < m; ++j)
          rd(j) = raL(j) * act_d(k, aL(j)) +
                  (aL(j) - target(i, j)) * act_dd(k, aL(j)) * rzL(j);
        break;
      }
      case MlpLoss::sigmoid_cross_entropy:
        rd = raL;
        break;
      case MlpLoss::softmax_cross_entropy: {
        Vector pr = softmax(zL);
        double dot = pr.dot(rzL);
        for (Index j = 0; j < m; ++j) rd(j) = pr(j) * rzL(j) - pr(j) * dot;
        break;
      }
    }
    return rd;
  }

  // c * (Hessian of sample i times v) added into acc.
  void hvp_accum(Index i, double c, const Vector& v, Vector& acc, std::vector<Vector>& z,
                 std::vector<Vector>& a, std::vector<Vector>& rz,
                 std::vector<Vector>& ra) const {
    forward(i, z, a);
    r_forward(v, z, a, rz, ra);
    Vector delta = output_delta(i, z, a);
    Vector rdelta = output_rdelta(i, z, a, rz, ra);
    for (Index l = L - 1; l >= 0; --l) {
      const Vector& al = a[static_cast<std::size_t>(l)];
      const Vector& ral = ra[static_cast<std::size_t>(l)];
      Wacc(acc, l).noalias() += c * (rdelta * al.transpose() + delta * ral.transpose());
      bacc(acc, l) += c * rdelta;
      if (l > 0) {
        Vector cv = W(l).transpose() * delta;
        Vector rcv = Wof(*this, v, l).transpose() * delta + W(l).transpose() * rdelta;
        Activation k = spec.act[static_cast<std::size_t>(l - 1)];
        const Vector& alv = a[static_cast<std::size_t>(l)];
        const Vector& rzl = rz[static_cast<std::size_t>(l)];
        delta.resize(alv.size());
        rdelta.resize(alv.size());
        for (Index j = 0; j < alv.size(); ++j) {
          double ad = act_d(k, alv(j));
          delta(j) = cv(j) * ad;
          rdelta(j) = rcv(j) * ad + cv(j) * act_dd(k, alv(j)) * rzl(j);
        }
      }
    }
  }

  // c * (GGN of sample i times v): linearized forward, PSD output curvature,
  // transposed-Jacobian backward (no second-order activation terms).
  void ggn_accum(Index i, double c, const Vector& v, Vector& acc, std::vector<Vector>& z,
                 std::vector<Vector>& a, std::vector<Vector>& rz,
                 std::vector<Vector>& ra) const {
    forward(i, z, a);
    r_forward(v, z, a, rz, ra);
    const Vector& zL = z[static_cast<std::size_t>(L)];
    const Vector& aL = a[static_cast<std::size_t>(L)];
    const Vector& rzL = rz[static_cast<std::size_t>(L)];
    const Index m = zL.size();
    Vector tilde(m);
    switch (spec.loss) {
      case MlpLoss::squared: {
        Activation k = spec.act.back();
        for (Index j = 0; j < m; ++j) {
          double ad = act_d(k, aL(j));
          tilde(j) = ad * ad * rzL(j);
        }
        break;
      }
      case MlpLoss::sigmoid_cross_entropy:
        for (Index j = 0; j < m; ++j) tilde(j) = act_d(Activation::logistic, aL(j)) * rzL(j);
        break;
      case MlpLoss::softmax_cross_entropy: {
        Vector pr = softmax(zL);
        double dot = pr.dot(rzL);
        for (Index j = 0; j < m; ++j) tilde(j) = pr(j) * rzL(j) - pr(j) * dot;
        break;
      }
    }
    for (Index l = L - 1; l >= 0; --l) {
      Wacc(acc, l).noalias() += c * tilde * a[static_cast<std::size_t>(l)].transpose();
      bacc(acc, l) += c * tilde;
      if (l > 0) {
        Vector cv = W(l).transpose() * tilde;
        Activation k = spec.act[static_cast<std::size_t>(l - 1)];
        const Vector& alv = a[static_cast<std::size_t>(l)];
        tilde.resize(alv.size());
        for (Index j = 0; j < alv.size(); ++j) tilde(j) = cv(j) * act_d(k, alv(j));
      }
    }
  }
};

}  // namespace

Vector init_params(const MlpSpec& spec, InitScheme scheme, double c, Rng& rng) {
  spec.validate();
  return draw_init(spec.param_count(), scheme, c, rng);
}

namespace mlp {

double loss_serial(const MlpSpec& spec, const DenseData& D, const Vector& p,
                   const BatchSpec& b) {
  Net net(spec, D, p);
  std::vector<Vector> z, a;
  double acc = 0.0;
  for (Index k = 0; k < b.size(); ++k) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    net.forward(i, z, a);
    acc += b.weights[static_cast<std::size_t>(k)] * net.sample_loss(i, z, a);
  }
  return acc / static_cast<double>(b.size());
}

LossGrad loss_grad_serial(const MlpSpec& spec, const DenseData& D, const Vector& p,
                          const BatchSpec& b) {
  Net net(spec, D, p);
  std::vector<Vector> z, a;
  LossGrad out;
  out.grad = Vector::Zero(spec.param_count());
  double acc = 0.0;
  for (Index k = 0; k < b.size(); ++k) {
    Index i = b.indices[static_cast<std::size_t>(k)];
    double w = b.weights[static_cast<std::size_t>(k)];
    net.forward(i, z, a);
    acc += w * net.sample_loss(i, z, a);
    net.grad_accum(i, w, out.grad, z, a);
  }
  out.loss = acc / static_cast<double>(b.size());
  out.grad /= static_cast<double>(b.size());
  return out;
}

Vector hvp_serial(const MlpSpec& spec, const DenseData& D, const Vector& p, const Vector& v,
                  const BatchSpec& b) {
  Net net(spec, D, p);
  std::vector<Vector> z, a, rz, ra;
  Vector acc = Vector::Zero(spec.param_count());
  for (Index k = 0; k < b.size(); ++k)
    net.hvp_accum(b.indices[static_cast<std::size_t>(k)],
                  b.weights[static_cast<std::size_t>(k)], v, acc, z, a, rz, ra);
  return acc / static_cast<double>(b.size());
}

Vector ggn_vp_serial(const MlpSpec& spec, const DenseData& D, const Vector& p,
                     const Vector& v, const BatchSpec& b) {
  Net net(spec, D, p);
  std::vector<Vector> z, a, rz, ra;
  Vector acc = Vector::Zero(spec.param_count());
  for (Index k = 0; k < b.size(); ++k)
    net.ggn_accum(b.indices[static_cast<std::size_t>(k)],
                  b.weights[static_cast<std::size_t>(k)], v, acc, z, a, rz, ra);
  return acc / static_cast<double>(b.size());
}

}  // namespace mlp

MlpOracle::MlpOracle(MlpSpec spec, std::shared_ptr<const DenseData> data)
    : spec_(std::move(spec)), data_(std::move(data)) {
  spec_.validate();
  if (data_->X.cols() != spec_.layers.front())
    throw std::invalid_argument("MlpOracle: input width mismatch");
  const Index out = spec_.layers.back();
  if (!data_->labels.empty()) {
    if (static_cast<Index>(data_->labels.size()) != data_->n())
      throw std::invalid_argument("MlpOracle: one label per row required");
    for (int c : data_->labels)
      if (c < 0 || c >= out) throw std::invalid_argument("MlpOracle: label out of range");
  } else {
    if (data_->targets.rows() != data_->n() || data_->targets.cols() != out)
      throw std::invalid_argument("MlpOracle: targets must be n x output_width");
  }
}

double MlpOracle::loss(const Vector& x, const BatchSpec& b, PropagationLedger& led) const {
  b.validate(data_->n());
  led.forward += static_cast<std::uint64_t>(b.size());
  Net net(spec_, *data_, x);
  double acc = par::sum_chunked(b.size(), [&](Index k) {
    std::vector<Vector> z, a;
    Index i = b.indices[static_cast<std::size_t>(k)];
    net.forward(i, z, a);
    return b.weights[static_cast<std::size_t>(k)] * net.sample_loss(i, z, a);
  });
  return acc / static_cast<double>(b.size());
}

LossGrad MlpOracle::loss_grad(const Vector& x, const BatchSpec& b,
                              PropagationLedger& led) const {
  b.validate(data_->n());
  led.forward += static_cast<std::uint64_t>(b.size());
  led.backward += static_cast<std::uint64_t>(b.size());
  Net net(spec_, *data_, x);
  const Index P = spec_.param_count();
  // Slot P carries the loss so one fused pass produces both pieces.
  Vector both = par::accumulate_chunked(b.size(), P + 1, [&](Index k, Vector& acc) {
    std::vector<Vector> z, a;
    Index i = b.indices[static_cast<std::size_t>(k)];
    double w = b.weights[static_cast<std::size_t>(k)];
    net.forward(i, z, a);
    acc(P) += w * net.sample_loss(i, z, a);
    net.grad_accum(i, w, acc, z, a);
  });
  LossGrad out;
  out.loss = both(P) / static_cast<double>(b.size());
  out.grad = both.head(P) / static_cast<double>(b.size());
  return out;
}

Vector MlpOracle::hvp(const Vector& x, const Vector& v, const BatchSpec& b,
                      PropagationLedger& led) const {
  b.validate(data_->n());
  led.forward += static_cast<std::uint64_t>(b.size());
  led.backward += static_cast<std::uint64_t>(b.size());
  Net net(spec_, *data_, x);
  Vector acc = par::accumulate_chunked(b.size(), spec_.param_count(), [&](Index k, Vector& slot) {
    std::vector<Vector> z, a, rz, ra;
    net.hvp_accum(b.indices[static_cast<std::size_t>(k)],
                  b.weights[static_cast<std::size_t>(k)], v, slot, z, a, rz, ra);
  });
  return acc / static_cast<double>(b.size());
}

Vector MlpOracle::ggn_vp(const Vector& x, const Vector& v, const BatchSpec& b,
                         PropagationLedger& led) const {
  b.validate(data_->n());
  led.forward += static_cast<std::uint64_t>(b.size());
  led.backward += static_cast<std::uint64_t>(b.size());
  Net net(spec_, *data_, x);
  Vector acc = par::accumulate_chunked(b.size(), spec_.param_count(), [&](Index k, Vector& slot) {
    std::vector<Vector> z, a, rz, ra;
    net.ggn_accum(b.indices[static_cast<std::size_t>(k)],
                  b.weights[static_cast<std::size_t>(k)], v, slot, z, a, rz, ra);
  });
  return acc / static_cast<double>(b.size());
}

double MlpOracle::error_rate(const Vector& x, PropagationLedger& led) const {
  led.forward += static_cast<std::uint64_t>(num_samples());
  if (data_->labels.empty()) return std::numeric_limits<double>::quiet_NaN();
  Net net(spec_, *data_, x);
  double wrong = par::sum_chunked(data_->n(), [&](Index i) {
    std::vector<Vector> z, a;
    net.forward(i, z, a);
    Index best = 0;
    a.back().maxCoeff(&best);
    return best == static_cast<Index>(data_->labels[static_cast<std::size_t>(i)]) ? 0.0 : 1.0;
  });
  return wrong / static_cast<double>(data_->n());
}

}  // namespace curvopt
