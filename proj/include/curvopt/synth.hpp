#pragma once

#include <cstdint>

#include "curvopt/dataset.hpp"

namespace curvopt {

// Planted-separator binary classification with sparse 0/1 features and a
// skewed feature-frequency profile. Labels are Bernoulli(phi(margin_scale *
// (standardized logit - logit_offset))); the offset skews the class prior to
// roughly one positive in four, census-income style, so the defaults behave
// like the public adult benchmarks rather than a balanced toy.
struct SynthClassConfig {
  Index n_train = 32561;
  Index n_test = 16281;
  Index d = 123;
  Index nnz_per_row = 14;
  double margin_scale = 3.0;
  double logit_offset = 0.65;
  std::uint64_t seed = 1;
};

struct SynthPair {
  SparseDataset train;
  SparseDataset test;
};

SynthPair synth_classification(const SynthClassConfig& cfg);

// Dense rows with norms log-spaced over `decades` orders of magnitude and
// Bernoulli labels; exercises non-uniform Hessian sampling where it matters.
SparseDataset synth_spread_rows(Index n, Index d, double decades, std::uint64_t seed);

}  // namespace curvopt
