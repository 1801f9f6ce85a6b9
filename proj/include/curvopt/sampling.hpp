#pragma once

#include <vector>

#include "curvopt/batch.hpp"
#include "curvopt/oracle.hpp"
#include "curvopt/rng.hpp"

namespace curvopt {

enum class SamplingKind { uniform, nonuniform };

struct SamplingDistribution {
  SamplingKind kind = SamplingKind::uniform;
  Index n = 0;
  std::vector<double> prob;  // per-sample probabilities, sum 1
  std::vector<double> cdf;   // inclusive prefix sums (nonuniform draws)
};

SamplingDistribution build_uniform_distribution(Index n);

// p_i proportional to |f_i''(z_i)| * ||a_i||^2 at the current iterate; the
// score pass charges n forward propagations to the ledger. Falls back to
// uniform when every score is zero.
SamplingDistribution build_nonuniform_distribution(const Oracle& oracle, const Vector& x,
                                                   PropagationLedger& ledger);

// |S| i.i.d. draws with replacement; weights 1/(n |S| p_j), which make
// sum_j w_j H_j an unbiased estimate of (1/n) sum_i H_i whatever the
// distribution. Zero-probability samples are never drawn; for this score
// their curvature is exactly zero, so unbiasedness is unaffected.
BatchSpec sample_batch(const SamplingDistribution& dist, Index size, Rng& rng);

}  // namespace curvopt
