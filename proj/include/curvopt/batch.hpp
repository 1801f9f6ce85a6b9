#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "curvopt/types.hpp"

namespace curvopt {

// A multiset of sample indices with per-sample weights. Oracle calls average
// weighted per-sample terms: (1/|B|) sum_k w_k * term(i_k). The full batch
// carries unit weights, so full-batch calls reduce to the plain mean objective.
// Importance-sampled batches (see sampling.hpp) may repeat indices.
struct BatchSpec {
  std::vector<Index> indices;
  std::vector<double> weights;

  Index size() const { return static_cast<Index>(indices.size()); }

  static BatchSpec full(Index n) {
    BatchSpec b;
    b.indices.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) b.indices[static_cast<std::size_t>(i)] = i;
    b.weights.assign(static_cast<std::size_t>(n), 1.0);
    return b;
  }

  // Copy with every weight scaled by c (used to turn the batch mean into a
  // weighted sum: scale by |B|).
  BatchSpec scaled_weights(double c) const {
    BatchSpec b = *this;
    for (double& w : b.weights) w *= c;
    return b;
  }

  void validate(Index n) const {
    if (indices.size() != weights.size())
      throw std::invalid_argument("BatchSpec: indices/weights size mismatch");
    if (indices.empty()) throw std::invalid_argument("BatchSpec: empty batch");
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (indices[k] < 0 || indices[k] >= n)
        throw std::invalid_argument("BatchSpec: index out of range");
      double w = weights[k];
      if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument("BatchSpec: weights must be finite and positive");
    }
  }
};

}  // namespace curvopt
