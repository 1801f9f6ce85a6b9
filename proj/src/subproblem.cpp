#include "curvopt/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "curvopt/detail/tridiag.hpp"

namespace curvopt {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::interior_convergence: return "interior_convergence";
    case Termination::boundary_hit: return "boundary_hit";
    case Termination::negative_curvature: return "negative_curvature";
    case Termination::max_iterations: return "max_iterations";
  }
  return "?";
}

namespace {

// Positive root of ||s + tau p|| = delta, written to avoid cancellation.
double boundary_tau(const Vector& s, const Vector& p, double delta) {
  double pp = p.squaredNorm();
  double sp = s.dot(p);
  double ss = s.squaredNorm();
  double disc = std::max(sp * sp + pp * (delta * delta - ss), 0.0);
  double root = std::sqrt(disc);
  if (sp <= 0.0) return (root - sp) / pp;
  return (delta * delta - ss) / (sp + root);
}

class Lanczos {
 public:
  Lanczos(const HessianOperator& H, const Vector& g, bool reorth)
      : H_(H), reorth_(reorth), gnorm_(g.norm()) {
    q_.push_back(g / gnorm_);
  }

  // One step: appends alpha_k, and beta_k + q_{k+1} unless the Krylov space
  // became invariant (breakdown). Returns false on breakdown.
  bool step() {
    const Vector& qk = q_.back();
    Vector w = H_.apply(qk);
    ++hvps_;
    double a = qk.dot(w);
    alpha_.push_back(a);
    w -= a * qk;
    if (q_.size() >= 2) w -= beta_.back() * q_[q_.size() - 2];
    if (reorth_) {
      for (int pass = 0; pass < 2; ++pass)
        for (const Vector& qi : q_) w -= qi.dot(w) * qi;
    }
    double b = w.norm();
    scale_ = std::max({scale_, std::abs(a), b});
    if (b <= 1e-13 * std::max(1.0, scale_)) return false;
    beta_.push_back(b);
    q_.push_back(w / b);
    return true;
  }

  Index size() const { return static_cast<Index>(alpha_.size()); }
  Index hvps() const { return hvps_; }
  double gnorm() const { return gnorm_; }
  // T_k arrays for the projected solve (k = size()).
  std::vector<double> alpha_head() const { return alpha_; }
  std::vector<double> beta_head() const {
    if (beta_.size() >= alpha_.size() && !beta_.empty())
      return {beta_.begin(), beta_.end() - 1};
    return beta_;
  }
  // beta_k coupling the space to q_{k+1}; only valid right after a
  // non-breakdown step.
  double last_beta() const { return beta_.back(); }

  Vector lift(const Vector& y) const {
    Vector s = Vector::Zero(q_.front().size());
    for (Index j = 0; j < y.size(); ++j) s += y(j) * q_[static_cast<std::size_t>(j)];
    return s;
  }

 private:
  const HessianOperator& H_;
  bool reorth_;
  double gnorm_;
  double scale_ = 0.0;
  std::vector<double> alpha_, beta_;
  std::vector<Vector> q_;
  Index hvps_ = 0;
};

SubproblemResult steihaug(const HessianOperator& H, const Vector& g, double delta,
                          const TrOptions& opts) {
  const Index d = g.size();
  SubproblemResult R;
  R.step = Vector::Zero(d);
  const double gnorm = g.norm();
  if (gnorm == 0.0) return R;
  const Index cap = opts.max_iter > 0 ? opts.max_iter : d;
  const double rtol = opts.tol * gnorm;

  Vector s = Vector::Zero(d);
  Vector r = g;  // model gradient g + Hs
  Vector p = -g;
  double m = 0.0;
  double rr = r.squaredNorm();
  for (Index k = 0; k < cap; ++k) {
    Vector Hp = H.apply(p);
    ++R.hvp_count;
    double pHp = p.dot(Hp);
    if (pHp <= 0.0) {
      double tau = boundary_tau(s, p, delta);
      m += tau * r.dot(p) + 0.5 * tau * tau * pHp;
      s += tau * p;
      R.step = s;
      R.model_value = m;
      R.termination = Termination::negative_curvature;
      return R;
    }
    double a = rr / pHp;
    if ((s + a * p).norm() >= delta) {
      double tau = boundary_tau(s, p, delta);
      m += tau * r.dot(p) + 0.5 * tau * tau * pHp;
      s += tau * p;
      R.step = s;
      R.model_value = m;
      R.termination = Termination::boundary_hit;
      return R;
    }
    m += a * r.dot(p) + 0.5 * a * a * pHp;
    s += a * p;
    r += a * Hp;
    double rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= rtol) {
      R.step = s;
      R.model_value = m;
      R.termination = Termination::interior_convergence;
      return R;
    }
    p = -r + (rr_next / rr) * p;
    rr = rr_next;
  }
  R.step = s;
  R.model_value = m;
  R.termination = Termination::max_iterations;
  return R;
}

SubproblemResult tr_exact_subspace(const HessianOperator& H, const Vector& g, double delta,
                                   const TrOptions& opts) {
  const Index d = g.size();
  SubproblemResult R;
  R.step = Vector::Zero(d);
  const double gnorm = g.norm();
  if (gnorm == 0.0) return R;
  const Index cap = std::min(opts.max_iter > 0 ? opts.max_iter : d, d);

  Lanczos lz(H, g, /*reorth=*/true);
  detail::ProjectedResult P;
  bool settled = false;  // breakdown or converged: projected solution is final
  while (lz.size() < cap) {
    bool ok = lz.step();
    P = detail::solve_projected_tr(lz.alpha_head(), lz.beta_head(), gnorm, delta);
    if (!ok) {
      settled = true;
      break;
    }
    if (opts.tol > 0.0 &&
        lz.last_beta() * std::abs(P.y(P.y.size() - 1)) <= opts.tol * gnorm) {
      settled = true;
      break;
    }
  }
  R.step = lz.lift(P.y);
  R.model_value = P.value;
  R.lambda = P.lambda;
  R.hvp_count = lz.hvps();
  if (settled || lz.size() >= d) {
    R.termination = P.interior ? Termination::interior_convergence
                  : P.neg_curv ? Termination::negative_curvature
                               : Termination::boundary_hit;
  } else {
    R.termination = Termination::max_iterations;
  }
  return R;
}

}  // namespace

SubproblemResult solve_tr_subproblem(const HessianOperator& H, const Vector& g,
                                     double delta, const TrOptions& opts) {
  if (!(delta > 0.0)) throw std::invalid_argument("solve_tr_subproblem: delta must be > 0");
  return opts.exact_subspace ? tr_exact_subspace(H, g, delta, opts)
                             : steihaug(H, g, delta, opts);
}

SubproblemResult solve_cubic_subproblem(const HessianOperator& H, const Vector& g,
                                        double sigma, const CubicOptions& opts) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("solve_cubic_subproblem: sigma must be > 0");
  const Index d = g.size();
  SubproblemResult R;
  R.step = Vector::Zero(d);
  const double gnorm = g.norm();
  if (gnorm == 0.0) return R;
  const Index cap = opts.max_iter > 0 ? opts.max_iter : 250;

  Lanczos lz(H, g, opts.full_reorth);
  detail::ProjectedResult P;
  bool settled = false;
  while (lz.size() < cap) {
    bool ok = lz.step();
    P = detail::solve_projected_cubic(lz.alpha_head(), lz.beta_head(), gnorm, sigma);
    if (!ok) {
      settled = true;
      break;
    }
    if (opts.tol > 0.0 &&
        lz.last_beta() * std::abs(P.y(P.y.size() - 1)) <= opts.tol * gnorm) {
      settled = true;
      break;
    }
  }
  R.step = lz.lift(P.y);
  R.model_value = P.value;
  R.lambda = P.lambda;
  R.hvp_count = lz.hvps();
  if (settled || lz.size() >= d) {
    R.termination = P.neg_curv ? Termination::negative_curvature
                               : Termination::interior_convergence;
  } else {
    R.termination = Termination::max_iterations;
  }
  return R;
}

}  // namespace curvopt
