#include "curvopt/sampling.hpp"

#include <stdexcept>

namespace curvopt {

SamplingDistribution build_uniform_distribution(Index n) {
  if (n <= 0) throw std::invalid_argument("build_uniform_distribution: n must be > 0");
  SamplingDistribution d;
  d.kind = SamplingKind::uniform;
  d.n = n;
  d.prob.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
  return d;  // uniform draws use uniform_index, no cdf needed
}

SamplingDistribution build_nonuniform_distribution(const Oracle& oracle, const Vector& x,
                                                   PropagationLedger& ledger) {
  Vector scores = oracle.curvature_scores(x, ledger);
  const Index n = scores.size();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (!(scores(i) >= 0.0))
      throw std::runtime_error("build_nonuniform_distribution: negative or NaN score");
    total += scores(i);
  }
  if (total <= 0.0) return build_uniform_distribution(n);
  SamplingDistribution d;
  d.kind = SamplingKind::nonuniform;
  d.n = n;
  d.prob.resize(static_cast<std::size_t>(n));
  d.cdf.resize(static_cast<std::size_t>(n));
  double run = 0.0;
  for (Index i = 0; i < n; ++i) {
    d.prob[static_cast<std::size_t>(i)] = scores(i) / total;
    run += d.prob[static_cast<std::size_t>(i)];
    d.cdf[static_cast<std::size_t>(i)] = run;
  }
  return d;
}

BatchSpec sample_batch(const SamplingDistribution& dist, Index size, Rng& rng) {
  if (size <= 0) throw std::invalid_argument("sample_batch: size must be > 0");
  if (dist.n <= 0) throw std::invalid_argument("sample_batch: empty distribution");
  BatchSpec b;
  b.indices.resize(static_cast<std::size_t>(size));
  b.weights.resize(static_cast<std::size_t>(size));
  const double n = static_cast<double>(dist.n);
  const double S = static_cast<double>(size);
  for (Index k = 0; k < size; ++k) {
    Index j;
    double w;
    if (dist.kind == SamplingKind::uniform) {
      j = rng.uniform_index(dist.n);
      w = 1.0 / S;  // 1/(n |S| p) at p = 1/n
    } else {
      j = rng.categorical(dist.cdf);
      // lower_bound can land on a zero-mass slot when u hits a flat cdf run;
      // step to the owner of that mass so the importance weight stays finite.
      while (j + 1 < dist.n && dist.prob[static_cast<std::size_t>(j)] == 0.0) ++j;
      w = 1.0 / (n * S * dist.prob[static_cast<std::size_t>(j)]);
    }
    b.indices[static_cast<std::size_t>(k)] = j;
    b.weights[static_cast<std::size_t>(k)] = w;
  }
  return b;
}

}  // namespace curvopt
