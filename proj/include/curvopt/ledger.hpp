#pragma once

#include <cstdint>
#include <stdexcept>

namespace curvopt {

// Unit of work: one forward or backward pass over one sample. A fused
// loss+gradient evaluation on a batch B costs |B| forward + |B| backward;
// one Hessian- or GGN-vector product on B costs the same again.
struct PropagationLedger {
  std::uint64_t forward = 0;
  std::uint64_t backward = 0;

  std::uint64_t total() const { return forward + backward; }
  void reset() { forward = backward = 0; }
};

enum class AlgorithmKind { tr, arc, gn, lbfgs, sgd };

// Per-iteration propagation charge:
//   tr / arc / gn : 2(n + |S| r)   full gradient + r products on the batch
//   lbfgs         : 2n             full gradient
//   sgd           : 2|S|           batch gradient
// Splits the charge evenly between forward and backward and returns it.
inline std::uint64_t charge_iteration(PropagationLedger& ledger, AlgorithmKind kind,
                                      std::int64_t n, std::int64_t batch_size,
                                      std::int64_t hvp_count) {
  if (n < 0 || batch_size < 0 || hvp_count < 0)
    throw std::invalid_argument("charge_iteration: negative size");
  std::uint64_t half = 0;
  switch (kind) {
    case AlgorithmKind::tr:
    case AlgorithmKind::arc:
    case AlgorithmKind::gn:
      half = std::uint64_t(n) + std::uint64_t(batch_size) * std::uint64_t(hvp_count);
      break;
    case AlgorithmKind::lbfgs:
      half = std::uint64_t(n);
      break;
    case AlgorithmKind::sgd:
      half = std::uint64_t(batch_size);
      break;
  }
  ledger.forward += half;
  ledger.backward += half;
  return 2 * half;
}

}  // namespace curvopt
