#include "curvopt/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "curvopt/min_eig.hpp"
#include "curvopt/rng.hpp"
#include "curvopt/sampling.hpp"
#include "curvopt/subproblem.hpp"

namespace curvopt {

const char* to_string(HessianSource s) {
  switch (s) {
    case HessianSource::full: return "full";
    case HessianSource::uniform: return "uniform";
    case HessianSource::nonuniform: return "nonuniform";
  }
  return "?";
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::budget_exhausted: return "budget_exhausted";
    case RunStatus::max_iterations: return "max_iterations";
    case RunStatus::diverged: return "diverged";
    case RunStatus::aborted: return "aborted";
  }
  return "?";
}

namespace {

// The min-eigenvalue probe is deterministic and independent of the run's
// sampling stream; its products are not part of the iteration charge model.
constexpr std::uint64_t kProbeSeed = 9001;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Radius/regularizer clamps; part of the update rule, so a trace replay must
// apply them too (they only engage on pathological runs).
constexpr double kDeltaMin = 1e-300, kDeltaMax = 1e15;
constexpr double kSigmaMin = 1e-16, kSigmaMax = 1e300;

Index sampled_batch_size(double ratio, Index n) {
  if (!(ratio > 0.0) || ratio > 1.0)
    throw std::invalid_argument("sample_ratio must be in (0, 1]");
  return std::max<Index>(1, static_cast<Index>(std::llround(ratio * static_cast<double>(n))));
}

void fill_errors(const Oracle& oracle, const Oracle* test, bool enabled, const Vector& x,
                 PropagationLedger& eval_led, IterationRecord& rec) {
  if (!enabled || !x.allFinite()) return;
  rec.train_error = oracle.error_rate(x, eval_led);
  if (test) rec.test_error = test->error_rate(x, eval_led);
}

struct SecondOrderParams {
  bool arc = false;
  CurvatureKind curvature = CurvatureKind::hessian;
  AlgorithmKind charge_kind = AlgorithmKind::tr;
  double radius0 = 10.0;  // delta0 (tr/gn) or sigma0 (arc)
  Index solver_cap = 0;
  bool full_reorth = true;
};

RunResult run_second_order(const Oracle& oracle, const SecondOrderCommon& cm,
                           const SecondOrderParams& pp, const Vector& x0,
                           std::uint64_t seed) {
  const Index n = oracle.num_samples();
  const Index d = oracle.dim();
  if (x0.size() != d) throw std::invalid_argument("run: x0 dimension mismatch");
  if (!(cm.eta1 > 0.0 && cm.eta1 <= cm.eta2 && cm.eta2 < 1.0))
    throw std::invalid_argument("run: need 0 < eta1 <= eta2 < 1");
  if (!(cm.gamma1 > 1.0 && cm.gamma2 > 1.0))
    throw std::invalid_argument("run: need gamma1, gamma2 > 1");
  if (!(pp.radius0 > 0.0)) throw std::invalid_argument("run: delta0/sigma0 must be > 0");

  RunResult R;
  R.x = x0;
  Rng rng(seed);
  const BatchSpec full_batch = BatchSpec::full(n);
  SamplingDistribution uni;
  if (cm.hessian == HessianSource::uniform) uni = build_uniform_distribution(n);
  const Index S =
      cm.hessian == HessianSource::full ? n : sampled_batch_size(cm.sample_ratio, n);

  LossGrad fg = oracle.loss_grad(R.x, full_batch, R.actual);
  double radius = pp.radius0;

  for (Index t = 0; t < cm.max_iters; ++t) {
    if (R.normative.total() >= cm.budget) {
      R.status = RunStatus::budget_exhausted;
      break;
    }
    if (!std::isfinite(fg.loss) || !fg.grad.allFinite()) {
      R.status = RunStatus::diverged;
      R.message = "non-finite loss or gradient at the current iterate";
      break;
    }

    std::uint64_t refresh = 0;  // non-uniform score pass, priced as n forward
    BatchSpec batch;
    BatchCombine combine = BatchCombine::mean;
    if (cm.hessian == HessianSource::full) {
      batch = full_batch;
    } else if (cm.hessian == HessianSource::uniform) {
      batch = sample_batch(uni, S, rng);
      combine = BatchCombine::weighted_sum;
    } else {
      SamplingDistribution dist = build_nonuniform_distribution(oracle, R.x, R.actual);
      refresh = static_cast<std::uint64_t>(n);
      batch = sample_batch(dist, S, rng);
      combine = BatchCombine::weighted_sum;
    }
    BatchCurvatureOperator Hop(oracle, R.x, batch, pp.curvature, combine, R.actual);

    const double gn = fg.grad.norm();
    SubproblemResult sub;
    if (gn <= cm.eps_g) {
      MinEigEstimate me = estimate_min_eigenvalue(Hop, cm.lanczos_k, kProbeSeed);
      if (me.value >= -cm.eps_H) {
        R.status = RunStatus::converged;
        break;
      }
      // First-order stationary but curvature says keep going: the Krylov
      // solvers are blind along directions missing from g, so step along the
      // most negative Ritz direction instead.
      Vector w = fg.grad.dot(me.vector) > 0.0 ? Vector(-me.vector) : me.vector;
      double c1 = fg.grad.dot(w);
      if (!pp.arc) {
        sub.step = radius * w;
        sub.model_value = radius * c1 + 0.5 * radius * radius * me.value;
      } else {
        double lam = me.value;
        double tau = (-lam + std::sqrt(lam * lam - 4.0 * radius * c1)) / (2.0 * radius);
        sub.step = tau * w;
        sub.model_value =
            tau * c1 + 0.5 * tau * tau * lam + radius / 3.0 * tau * tau * tau;
      }
      sub.termination = Termination::negative_curvature;
      sub.hvp_count = 0;
    } else if (!pp.arc) {
      TrOptions o;
      o.tol = std::min(0.5, std::sqrt(gn));
      o.max_iter = pp.solver_cap;
      sub = solve_tr_subproblem(Hop, fg.grad, radius, o);
    } else {
      CubicOptions o;
      o.tol = std::min(0.5, std::sqrt(gn));
      o.max_iter = pp.solver_cap;
      o.full_reorth = pp.full_reorth;
      sub = solve_cubic_subproblem(Hop, fg.grad, radius, o);
    }

    const double snorm = sub.step.norm();
    if (!(snorm > 0.0) || !sub.step.allFinite()) {
      std::ostringstream msg;
      msg << "subproblem produced no usable step (termination="
          << to_string(sub.termination) << ", ||g||=" << gn
          << ", radius_or_sigma=" << radius << ")";
      R.status = RunStatus::aborted;
      R.message = msg.str();
      break;
    }

    const double f_trial = oracle.loss(R.x + sub.step, full_batch, R.actual);
    const double denom = -sub.model_value;
    const double rho =
        (denom < 1e-14 || !std::isfinite(f_trial)) ? -kInf : (fg.loss - f_trial) / denom;
    const bool accept = rho >= cm.eta1;

    charge_iteration(R.normative, pp.charge_kind, n, S, sub.hvp_count);
    R.normative.forward += refresh;

    IterationRecord rec;
    rec.iter = t;
    rec.props = R.normative.total();
    rec.rho = rho;
    rec.radius_or_sigma = radius;
    rec.step_norm = snorm;
    rec.accepted = accept ? 1 : 0;
    rec.subproblem_hvps = sub.hvp_count;

    if (!pp.arc) {
      if (rho >= cm.eta2) radius *= cm.gamma2;
      else if (rho >= cm.eta1) radius *= cm.gamma1;
      else radius /= cm.gamma2;
      radius = std::clamp(radius, kDeltaMin, kDeltaMax);
    } else {
      if (rho >= cm.eta2) radius /= cm.gamma2;
      else if (rho >= cm.eta1) radius /= cm.gamma1;
      else radius *= cm.gamma2;
      radius = std::clamp(radius, kSigmaMin, kSigmaMax);
    }

    if (accept) {
      R.x += sub.step;
      fg = oracle.loss_grad(R.x, full_batch, R.actual);
    }
    rec.train_loss = fg.loss;
    fill_errors(oracle, cm.test_oracle, cm.eval_errors, R.x, R.eval, rec);
    R.records.push_back(rec);
  }
  R.final_loss = fg.loss;
  return R;
}

}  // namespace

RunResult run_tr(const Oracle& oracle, const TrustRegionConfig& cfg, const Vector& x0,
                 std::uint64_t seed) {
  SecondOrderParams pp;
  pp.arc = false;
  pp.curvature = CurvatureKind::hessian;
  pp.charge_kind = AlgorithmKind::tr;
  pp.radius0 = cfg.delta0;
  pp.solver_cap = cfg.cg_max_iter;
  return run_second_order(oracle, cfg, pp, x0, seed);
}

RunResult run_gauss_newton(const Oracle& oracle, const TrustRegionConfig& cfg,
                           const Vector& x0, std::uint64_t seed) {
  SecondOrderParams pp;
  pp.arc = false;
  pp.curvature = CurvatureKind::ggn;
  pp.charge_kind = AlgorithmKind::gn;
  pp.radius0 = cfg.delta0;
  pp.solver_cap = cfg.cg_max_iter;
  return run_second_order(oracle, cfg, pp, x0, seed);
}

RunResult run_arc(const Oracle& oracle, const ArcConfig& cfg, const Vector& x0,
                  std::uint64_t seed) {
  SecondOrderParams pp;
  pp.arc = true;
  pp.curvature = CurvatureKind::hessian;
  pp.charge_kind = AlgorithmKind::arc;
  pp.radius0 = cfg.sigma0;
  pp.solver_cap = cfg.lanczos_max_iter;
  pp.full_reorth = cfg.full_reorth;
  return run_second_order(oracle, cfg, pp, x0, seed);
}

RunResult run_sgd_momentum(const Oracle& oracle, const SgdConfig& cfg, const Vector& x0,
                           std::uint64_t seed) {
  const Index n = oracle.num_samples();
  if (x0.size() != oracle.dim()) throw std::invalid_argument("run: x0 dimension mismatch");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("run: alpha must be > 0");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
    throw std::invalid_argument("run: momentum must be in [0, 1)");
  const Index S = sampled_batch_size(cfg.batch_ratio, n);

  RunResult R;
  R.x = x0;
  Rng rng(seed);
  const BatchSpec full_batch = BatchSpec::full(n);

  Index every = cfg.eval_every;
  if (every <= 0) {
    // Space full evaluations so they stay under ~5% of the training budget.
    double iters = static_cast<double>(cfg.budget) / (2.0 * static_cast<double>(S)) + 1.0;
    double per_eval = static_cast<double>(n) +
                      (cfg.eval_errors
                           ? static_cast<double>(n) +
                                 (cfg.test_oracle
                                      ? static_cast<double>(cfg.test_oracle->num_samples())
                                      : 0.0)
                           : 0.0);
    every = std::max<Index>(
        1, static_cast<Index>(std::ceil(iters * per_eval / (0.05 * static_cast<double>(cfg.budget)))));
  }

  Vector v = Vector::Zero(oracle.dim());
  for (Index t = 0; t < cfg.max_iters; ++t) {
    if (R.normative.total() >= cfg.budget) {
      R.status = RunStatus::budget_exhausted;
      break;
    }
    BatchSpec batch;
    batch.indices = rng.subset_without_replacement(n, S);
    batch.weights.assign(static_cast<std::size_t>(S), 1.0);
    LossGrad bg = oracle.loss_grad(R.x, batch, R.actual);
    if (!std::isfinite(bg.loss) || !bg.grad.allFinite()) {
      R.status = RunStatus::diverged;
      R.message = "non-finite batch loss or gradient";
      break;
    }
    v = cfg.momentum * v + bg.grad;
    R.x -= cfg.alpha * v;
    charge_iteration(R.normative, AlgorithmKind::sgd, n, S, 0);

    IterationRecord rec;
    rec.iter = t;
    rec.props = R.normative.total();
    rec.step_norm = cfg.alpha * v.norm();
    if (t % every == 0) {
      rec.train_loss = R.x.allFinite()
                           ? oracle.loss(R.x, full_batch, R.eval)
                           : std::numeric_limits<double>::infinity();
      fill_errors(oracle, cfg.test_oracle, cfg.eval_errors, R.x, R.eval, rec);
    }
    R.records.push_back(rec);
    if (!R.x.allFinite()) {
      R.status = RunStatus::diverged;
      R.message = "iterate left the representable range";
      break;
    }
  }
  // Make sure the last row carries a full evaluation.
  if (!R.records.empty() && std::isnan(R.records.back().train_loss) && R.x.allFinite()) {
    R.records.back().train_loss = oracle.loss(R.x, full_batch, R.eval);
    fill_errors(oracle, cfg.test_oracle, cfg.eval_errors, R.x, R.eval, R.records.back());
  }
  R.final_loss = R.x.allFinite() ? oracle.loss(R.x, full_batch, R.eval)
                                 : std::numeric_limits<double>::infinity();
  return R;
}

RunResult run_lbfgs(const Oracle& oracle, const LbfgsConfig& cfg, const Vector& x0,
                    std::uint64_t seed) {
  (void)seed;  // deterministic; seed kept for interface symmetry
  const Index n = oracle.num_samples();
  if (x0.size() != oracle.dim()) throw std::invalid_argument("run: x0 dimension mismatch");
  if (cfg.history <= 0) throw std::invalid_argument("run: history must be > 0");

  RunResult R;
  R.x = x0;
  const BatchSpec full_batch = BatchSpec::full(n);
  LossGrad fg = oracle.loss_grad(R.x, full_batch, R.actual);

  struct Pair {
    Vector s, y;
    double inv_sy;
  };
  std::deque<Pair> hist;

  for (Index t = 0; t < cfg.max_iters; ++t) {
    if (R.normative.total() >= cfg.budget) {
      R.status = RunStatus::budget_exhausted;
      break;
    }
    if (!std::isfinite(fg.loss) || !fg.grad.allFinite()) {
      R.status = RunStatus::diverged;
      R.message = "non-finite loss or gradient at the current iterate";
      break;
    }
    if (fg.grad.norm() <= cfg.eps_g) {
      R.status = RunStatus::converged;
      break;
    }

    // Two-loop recursion with H0 = gamma I, gamma from the newest pair.
    Vector q = fg.grad;
    std::vector<double> a(hist.size());
    for (std::size_t i = hist.size(); i-- > 0;) {
      a[i] = hist[i].inv_sy * hist[i].s.dot(q);
      q -= a[i] * hist[i].y;
    }
    if (!hist.empty()) {
      const Pair& last = hist.back();
      q *= last.s.dot(last.y) / last.y.dot(last.y);
    }
    for (std::size_t i = 0; i < hist.size(); ++i) {
      double b = hist[i].inv_sy * hist[i].y.dot(q);
      q += (a[i] - b) * hist[i].s;
    }
    Vector dir = -q;
    double gd = fg.grad.dot(dir);
    if (!(gd < 0.0)) {  // stale curvature made it a non-descent direction
      hist.clear();
      dir = -fg.grad;
      gd = -fg.grad.squaredNorm();
    }

    // Armijo backtracking. Trial losses show up in the actual ledger; the
    // charge model prices the iteration at a flat 2n.
    double step = 1.0;
    double f_new = kInf;
    bool ok = false;
    for (Index ls = 0; ls < cfg.ls_max; ++ls) {
      f_new = oracle.loss(R.x + step * dir, full_batch, R.actual);
      if (std::isfinite(f_new) && f_new <= fg.loss + cfg.c1 * step * gd) {
        ok = true;
        break;
      }
      step *= cfg.backtrack;
    }
    charge_iteration(R.normative, AlgorithmKind::lbfgs, n, 0, 0);

    IterationRecord rec;
    rec.iter = t;
    rec.props = R.normative.total();

    if (!ok) {
      rec.train_loss = fg.loss;
      rec.accepted = 0;
      rec.step_norm = 0.0;
      fill_errors(oracle, cfg.test_oracle, cfg.eval_errors, R.x, R.eval, rec);
      R.records.push_back(rec);
      R.status = RunStatus::aborted;
      std::ostringstream msg;
      msg << "line search failed after " << cfg.ls_max << " backtracks at ||g||="
          << fg.grad.norm();
      R.message = msg.str();
      break;
    }

    Vector s = step * dir;
    rec.step_norm = s.norm();
    R.x += s;
    LossGrad fg_new = oracle.loss_grad(R.x, full_batch, R.actual);
    Vector y = fg_new.grad - fg.grad;
    double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      hist.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<Index>(hist.size()) > cfg.history) hist.pop_front();
    }
    fg = fg_new;
    rec.train_loss = fg.loss;
    rec.accepted = 1;
    fill_errors(oracle, cfg.test_oracle, cfg.eval_errors, R.x, R.eval, rec);
    R.records.push_back(rec);
  }
  R.final_loss = fg.loss;
  return R;
}

}  // namespace curvopt
