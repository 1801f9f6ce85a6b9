#include "curvopt/dense_reference.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace curvopt {

namespace {

struct EigView {
  Matrix Q;
  Vector lam;   // ascending
  Vector ghat;  // Q^T g

  // ||s(mu)|| with s(mu) = -(H + mu I)^-1 g, components below `cut` of
  // singularity skipped (pseudo-inverse norm).
  double snorm(double mu, double cut) const {
    double s = 0.0;
    for (Index i = 0; i < lam.size(); ++i) {
      double den = lam(i) + mu;
      if (den > cut) s += ghat(i) * ghat(i) / (den * den);
    }
    return std::sqrt(s);
  }

  Vector coords(double mu, double cut) const {
    Vector y(lam.size());
    for (Index i = 0; i < lam.size(); ++i) {
      double den = lam(i) + mu;
      y(i) = den > cut ? -ghat(i) / den : 0.0;
    }
    return y;
  }
};

EigView decompose(const Matrix& H, const Vector& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense reference: eigendecomposition failed");
  return {es.eigenvectors(), es.eigenvalues(), es.eigenvectors().transpose() * g};
}

double model_tr(const Matrix& H, const Vector& g, const Vector& s) {
  return g.dot(s) + 0.5 * s.dot(H * s);
}

}  // namespace

DenseSolution dense_reference_tr(const Matrix& H, const Vector& g, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("dense_reference_tr: delta must be > 0");
  EigView E = decompose(H, g);
  const double lam_min = E.lam(0);
  const double scale = std::max(std::abs(E.lam(0)), std::abs(E.lam(E.lam.size() - 1)));
  const double cut = 1e-12 * std::max(1.0, scale);
  DenseSolution R;

  if (lam_min > cut) {
    Vector y = E.coords(0.0, 0.0);
    if (y.norm() <= delta) {
      R.step = E.Q * y;
      R.model_value = model_tr(H, g, R.step);
      R.lambda = 0.0;
      R.interior = true;
      return R;
    }
  }

  const double mu_low = std::max(0.0, -lam_min);
  // Hard case: g has (numerically) no component in the lambda_min eigenspace
  // and the pseudo-inverse solution at the pole is already inside the ball.
  bool g_clean = true;
  for (Index i = 0; i < E.lam.size(); ++i)
    if (E.lam(i) + mu_low <= cut && std::abs(E.ghat(i)) > 1e-11 * std::max(1.0, g.norm()))
      g_clean = false;
  if (mu_low > 0.0 && g_clean && E.snorm(mu_low, cut) < delta) {
    Vector y = E.coords(mu_low, cut);
    double tau = std::sqrt(std::max(0.0, delta * delta - y.squaredNorm()));
    R.step = E.Q * y + tau * E.Q.col(0);
    R.model_value = model_tr(H, g, R.step);
    R.lambda = mu_low;
    R.hard_case = true;
    return R;
  }

  double lo = mu_low;
  double hi = std::max(mu_low * (1.0 + 1e-10) + 1e-12, g.norm() / delta - lam_min + 1e-8);
  for (int it = 0; it < 200 && E.snorm(hi, 0.0) >= delta; ++it) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 300 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    if (E.snorm(mid, 0.0) >= delta)
      lo = mid;
    else
      hi = mid;
  }
  Vector y = E.coords(hi, 0.0);
  R.step = E.Q * y;
  R.model_value = model_tr(H, g, R.step);
  R.lambda = hi;
  return R;
}

DenseSolution dense_reference_cubic(const Matrix& H, const Vector& g, double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("dense_reference_cubic: sigma must be > 0");
  EigView E = decompose(H, g);
  const double lam_min = E.lam(0);
  const double scale = std::max(std::abs(E.lam(0)), std::abs(E.lam(E.lam.size() - 1)));
  const double cut = 1e-12 * std::max(1.0, scale);
  DenseSolution R;

  const double mu_low = std::max(0.0, -lam_min);
  bool g_clean = true;
  for (Index i = 0; i < E.lam.size(); ++i)
    if (E.lam(i) + mu_low <= cut && std::abs(E.ghat(i)) > 1e-11 * std::max(1.0, g.norm()))
      g_clean = false;
  if (mu_low > 0.0 && g_clean && E.snorm(mu_low, cut) < mu_low / sigma) {
    Vector y = E.coords(mu_low, cut);
    double target = mu_low / sigma;
    double tau = std::sqrt(std::max(0.0, target * target - y.squaredNorm()));
    R.step = E.Q * y + tau * E.Q.col(0);
    double sn = R.step.norm();
    R.model_value = model_tr(H, g, R.step) + sigma / 3.0 * sn * sn * sn;
    R.lambda = mu_low;
    R.hard_case = true;
    return R;
  }

  double lo = mu_low;
  double hi = std::max(1.0, 2.0 * mu_low + 1.0);
  for (int it = 0; it < 200 && E.snorm(hi, 0.0) >= hi / sigma; ++it) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 300 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    if (E.snorm(mid, 0.0) >= mid / sigma)
      lo = mid;
    else
      hi = mid;
  }
  Vector y = E.coords(hi, 0.0);
  R.step = E.Q * y;
  double sn = R.step.norm();
  R.model_value = model_tr(H, g, R.step) + sigma / 3.0 * sn * sn * sn;
  R.lambda = hi;
  R.interior = lam_min >= 0.0;
  return R;
}

}  // namespace curvopt
