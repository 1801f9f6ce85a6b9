#pragma once

#include <algorithm>
#include <vector>

#include "curvopt/types.hpp"

namespace curvopt::par {

// Reductions below split [0,n) into fixed chunks of kChunk samples, compute
// chunk partials (possibly in parallel) and fold them in chunk order. The
// result is therefore bitwise identical for any thread count, including 1.
inline constexpr Index kChunk = 512;

bool enabled();
void set_enabled(bool on);
// t <= 0 leaves the OpenMP runtime default in place.
void set_threads(int t);
int threads_in_use();

// sum_i term(i)
template <class TermFn>
double sum_chunked(Index n, TermFn&& term) {
  if (n <= 0) return 0.0;
  const Index nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
  const bool go = enabled() && nchunks > 1;
  (void)go;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (go)
#endif
  for (Index c = 0; c < nchunks; ++c) {
    const Index lo = c * kChunk;
    const Index hi = std::min(n, lo + kChunk);
    double acc = 0.0;
    for (Index i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// acc = sum_i contribution(i); fn(i, slot) adds sample i's term into slot.
// Chunk partials are produced in rounds of kVectorSlots buffers so memory
// stays bounded at kVectorSlots * dim.
inline constexpr Index kVectorSlots = 64;

template <class AccFn>
Vector accumulate_chunked(Index n, Index dim, AccFn&& fn) {
  Vector acc = Vector::Zero(dim);
  if (n <= 0) return acc;
  const Index nchunks = (n + kChunk - 1) / kChunk;
  const Index nslots = std::min(nchunks, kVectorSlots);
  std::vector<Vector> slot(static_cast<std::size_t>(nslots));
  for (auto& s : slot) s = Vector::Zero(dim);
  for (Index round = 0; round * nslots < nchunks; ++round) {
    const Index first = round * nslots;
    const Index used = std::min(nslots, nchunks - first);
    const bool go = enabled() && used > 1;
    (void)go;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (go)
#endif
    for (Index k = 0; k < used; ++k) {
      Vector& s = slot[static_cast<std::size_t>(k)];
      s.setZero();
      const Index c = first + k;
      const Index lo = c * kChunk;
      const Index hi = std::min(n, lo + kChunk);
      for (Index i = lo; i < hi; ++i) fn(i, s);
    }
    for (Index k = 0; k < used; ++k) acc += slot[static_cast<std::size_t>(k)];
  }
  return acc;
}

}  // namespace curvopt::par
