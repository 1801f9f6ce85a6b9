#include "curvopt/detail/tridiag.hpp"

#include <algorithm>
#include <cmath>

namespace curvopt::detail {

bool ldlt_solve_shifted(const std::vector<double>& alpha, const std::vector<double>& beta,
                        double shift, const Vector& rhs, Vector& y) {
  const int k = static_cast<int>(alpha.size());
  y.resize(k);
  std::vector<double> d(static_cast<std::size_t>(k));
  std::vector<double> l(k > 1 ? static_cast<std::size_t>(k - 1) : 0);
  d[0] = alpha[0] + shift;
  if (!(d[0] > 0.0)) return false;
  for (int i = 1; i < k; ++i) {
    l[static_cast<std::size_t>(i - 1)] = beta[static_cast<std::size_t>(i - 1)] / d[static_cast<std::size_t>(i - 1)];
    d[static_cast<std::size_t>(i)] = alpha[static_cast<std::size_t>(i)] + shift -
                                     beta[static_cast<std::size_t>(i - 1)] * l[static_cast<std::size_t>(i - 1)];
    if (!(d[static_cast<std::size_t>(i)] > 0.0)) return false;
  }
  y(0) = rhs(0);
  for (int i = 1; i < k; ++i) y(i) = rhs(i) - l[static_cast<std::size_t>(i - 1)] * y(i - 1);
  for (int i = 0; i < k; ++i) y(i) /= d[static_cast<std::size_t>(i)];
  for (int i = k - 2; i >= 0; --i) y(i) -= l[static_cast<std::size_t>(i)] * y(i + 1);
  return true;
}

int count_eigenvalues_below(const std::vector<double>& alpha,
                            const std::vector<double>& beta, double t) {
  int count = 0;
  double p = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i == 0) {
      p = alpha[0] - t;
    } else {
      // Pivot underflow to 0 would poison the recurrence; nudge onto the
      // negative side (counts the eigenvalue as below t, the safe direction
      // for a lower bound).
      if (p == 0.0) p = -1e-300;
      p = alpha[i] - t - beta[i - 1] * beta[i - 1] / p;
    }
    if (p < 0.0) ++count;
  }
  return count;
}

double min_eigenvalue(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const std::size_t k = alpha.size();
  if (k == 1) return alpha[0];
  double lo = alpha[0], hi = alpha[0];
  for (std::size_t i = 0; i < k; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(beta[i - 1]);
    if (i + 1 < k) r += std::abs(beta[i]);
    lo = std::min(lo, alpha[i] - r);
    hi = std::min(hi, alpha[i]);  // lambda_min <= min_i T_ii
  }
  double margin = 1e-10 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  lo -= margin;
  hi += margin;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (count_eigenvalues_below(alpha, beta, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double quad_form(const std::vector<double>& alpha, const std::vector<double>& beta,
                 const Vector& y) {
  double q = 0.0;
  const int k = static_cast<int>(alpha.size());
  for (int i = 0; i < k; ++i) q += alpha[static_cast<std::size_t>(i)] * y(i) * y(i);
  for (int i = 0; i + 1 < k; ++i) q += 2.0 * beta[static_cast<std::size_t>(i)] * y(i) * y(i + 1);
  return q;
}

namespace {

// Shared secular-equation machinery: bisect lambda between a side where
// (T + lambda I) is not PD or phi(lambda) >= 0 and a side where it is PD and
// phi < 0. phi must be strictly decreasing in lambda on the PD region.
struct Secular {
  const std::vector<double>& alpha;
  const std::vector<double>& beta;
  Vector rhs;
  Vector y;

  bool solve(double lam) { return ldlt_solve_shifted(alpha, beta, lam, rhs, y); }
};

}  // namespace

ProjectedResult solve_projected_tr(const std::vector<double>& alpha,
                                   const std::vector<double>& beta, double gnorm,
                                   double delta) {
  const int k = static_cast<int>(alpha.size());
  ProjectedResult R;
  double lammin = min_eigenvalue(alpha, beta);
  R.neg_curv = lammin < 0.0;
  if (gnorm == 0.0) {
    R.y = Vector::Zero(k);
    R.interior = true;
    return R;
  }
  Secular sec{alpha, beta, Vector::Zero(k), Vector()};
  sec.rhs(0) = -gnorm;

  if (lammin > 0.0 && sec.solve(0.0) && sec.y.norm() <= delta) {
    R.y = sec.y;
    R.lambda = 0.0;
    R.interior = true;
    R.value = gnorm * R.y(0) + 0.5 * quad_form(alpha, beta, R.y);
    return R;
  }

  // Boundary: root of ||y(lambda)|| = delta on (max(0,-lammin), inf). The
  // first component of every eigenvector of an unreduced T is nonzero, so
  // ||y|| blows up at the pole and the root exists (no hard case in the
  // Krylov-projected problem).
  double lo = std::max(0.0, -lammin);
  double hi = std::max(lo * (1.0 + 1e-10) + 1e-12, gnorm / delta - lammin + 1e-8);
  for (int it = 0; it < 200; ++it) {
    if (sec.solve(hi) && sec.y.norm() < delta) break;
    hi = lo + 2.0 * (hi - lo);
  }
  for (int it = 0; it < 300 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    if (sec.solve(mid) && sec.y.norm() < delta)
      hi = mid;
    else
      lo = mid;
  }
  sec.solve(hi);
  R.y = sec.y;
  R.lambda = hi;
  R.interior = false;
  R.value = gnorm * R.y(0) + 0.5 * quad_form(alpha, beta, R.y);
  return R;
}

ProjectedResult solve_projected_cubic(const std::vector<double>& alpha,
                                      const std::vector<double>& beta, double gnorm,
                                      double sigma) {
  const int k = static_cast<int>(alpha.size());
  ProjectedResult R;
  double lammin = min_eigenvalue(alpha, beta);
  R.neg_curv = lammin < 0.0;
  R.interior = lammin >= 0.0;
  if (gnorm == 0.0) {
    R.y = Vector::Zero(k);
    return R;
  }
  Secular sec{alpha, beta, Vector::Zero(k), Vector()};
  sec.rhs(0) = -gnorm;

  // Root of ||y(lambda)|| = lambda/sigma; LHS decreasing, RHS increasing, so
  // the root is unique. Same pole argument as the TR case.
  double lo = std::max(0.0, -lammin);
  double hi = std::max(1.0, 2.0 * lo + 1.0);
  for (int it = 0; it < 200; ++it) {
    if (sec.solve(hi) && sec.y.norm() < hi / sigma) break;
    hi = lo + 2.0 * (hi - lo);
  }
  for (int it = 0; it < 300 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    if (sec.solve(mid) && sec.y.norm() < mid / sigma)
      hi = mid;
    else
      lo = mid;
  }
  sec.solve(hi);
  R.y = sec.y;
  R.lambda = hi;
  double yn = R.y.norm();
  R.value = gnorm * R.y(0) + 0.5 * quad_form(alpha, beta, R.y) + sigma / 3.0 * yn * yn * yn;
  return R;
}

}  // namespace curvopt::detail
