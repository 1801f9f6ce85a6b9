#include "curvopt/min_eig.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "curvopt/detail/tridiag.hpp"
#include "curvopt/rng.hpp"

namespace curvopt {

namespace {

// Fresh unit vector orthogonal to the current basis; nullptr result would
// mean the basis already spans the space (caller checks size first).
Vector fresh_direction(Rng& rng, Index d, const std::vector<Vector>& basis) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Vector v(d);
    rng.fill_gaussian(v);
    for (const Vector& q : basis) v -= q.dot(v) * q;
    double nrm = v.norm();
    if (nrm > 1e-8 * std::sqrt(static_cast<double>(d))) return v / nrm;
  }
  throw std::runtime_error("estimate_min_eigenvalue: could not draw a start vector");
}

}  // namespace

MinEigEstimate estimate_min_eigenvalue(const HessianOperator& H, Index k,
                                       std::uint64_t seed) {
  const Index d = H.dim();
  k = std::min(k <= 0 ? Index{20} : k, d);
  Rng rng(seed);

  std::vector<Vector> q;
  std::vector<double> alpha, beta;  // beta entry 0 between restart blocks
  double scale = 0.0;
  q.push_back(fresh_direction(rng, d, q));
  MinEigEstimate out;
  bool fresh_block = true;

  while (static_cast<Index>(alpha.size()) < k) {
    const Vector& qk = q.back();
    Vector w = H.apply(qk);
    ++out.hvp_count;
    double a = qk.dot(w);
    alpha.push_back(a);
    if (!fresh_block && q.size() >= 2) w -= beta.back() * q[q.size() - 2];
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& qi : q) w -= qi.dot(w) * qi;
    double b = w.norm();
    scale = std::max({scale, std::abs(a), b});
    if (static_cast<Index>(alpha.size()) >= k) break;
    if (b <= 1e-13 * std::max(1.0, scale)) {
      if (static_cast<Index>(q.size()) >= d) break;  // whole space spanned
      beta.push_back(0.0);
      q.push_back(fresh_direction(rng, d, q));
      fresh_block = true;
    } else {
      beta.push_back(b);
      q.push_back(w / b);
      fresh_block = false;
    }
  }

  double lam = detail::min_eigenvalue(alpha, beta);
  // Ritz vector by two rounds of inverse iteration on T - (lam - eps) I.
  const Index m = static_cast<Index>(alpha.size());
  double eps = 1e-10 * std::max(1.0, scale);
  Vector y = Vector::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  for (int it = 0; it < 3; ++it) {
    Vector next;
    if (!detail::ldlt_solve_shifted(alpha, beta, eps - lam, y, next)) {
      eps *= 16.0;
      continue;
    }
    double nrm = next.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
    y = next / nrm;
  }
  out.vector = Vector::Zero(d);
  for (Index j = 0; j < m; ++j) out.vector += y(j) * q[static_cast<std::size_t>(j)];
  out.vector.normalize();
  out.value = detail::quad_form(alpha, beta, y);
  return out;
}

}  // namespace curvopt
