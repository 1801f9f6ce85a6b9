#pragma once

#include <stdexcept>
#include <vector>

#include "curvopt/types.hpp"

namespace curvopt {

// CSR-ish sparse design matrix plus one label per row.
struct SparseDataset {
  Index n = 0;
  Index d = 0;
  std::vector<Index> indptr;   // n+1 offsets into colind/values
  std::vector<Index> colind;   // column ids, strictly increasing within a row
  std::vector<double> values;
  std::vector<double> labels;  // n

  void check() const {
    if (indptr.size() != static_cast<std::size_t>(n) + 1 ||
        labels.size() != static_cast<std::size_t>(n) ||
        colind.size() != values.size() ||
        indptr.empty() || indptr.front() != 0 ||
        indptr.back() != static_cast<Index>(colind.size()))
      throw std::invalid_argument("SparseDataset: inconsistent arrays");
    for (Index i = 0; i < n; ++i) {
      Index prev = -1;
      for (Index p = indptr[i]; p < indptr[i + 1]; ++p) {
        Index j = colind[static_cast<std::size_t>(p)];
        if (j <= prev || j >= d)
          throw std::invalid_argument("SparseDataset: bad column index");
        prev = j;
      }
    }
  }

  double row_dot(Index i, const Vector& x) const {
    double z = 0.0;
    for (Index p = indptr[i]; p < indptr[i + 1]; ++p)
      z += values[static_cast<std::size_t>(p)] * x[colind[static_cast<std::size_t>(p)]];
    return z;
  }

  // out += c * a_i
  void row_axpy(Index i, double c, Vector& out) const {
    for (Index p = indptr[i]; p < indptr[i + 1]; ++p)
      out[colind[static_cast<std::size_t>(p)]] += c * values[static_cast<std::size_t>(p)];
  }

  double row_norm_sq(Index i) const {
    double s = 0.0;
    for (Index p = indptr[i]; p < indptr[i + 1]; ++p) {
      double v = values[static_cast<std::size_t>(p)];
      s += v * v;
    }
    return s;
  }
};

}  // namespace curvopt
