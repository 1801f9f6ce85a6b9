#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "curvopt/dataset.hpp"
#include "curvopt/rng.hpp"

namespace curvopt {

// LIBSVM text: one sample per line, "label idx:val idx:val ...", indices
// 1-based and strictly increasing. expected_dim pins the width (error if a
// row exceeds it); 0 infers the width from the data.
SparseDataset parse_libsvm(std::istream& in, Index expected_dim = 0);
// Reads plain or gzip-compressed files (sniffed by zlib).
SparseDataset load_libsvm(const std::string& path, Index expected_dim = 0);
void write_libsvm(const SparseDataset& ds, std::ostream& out);
void write_libsvm_file(const SparseDataset& ds, const std::string& path, bool gzip = false);

enum class LabelRule {
  none,       // keep as-is (multi-class ids; validated non-negative integers)
  zero_one,   // already {0,1}
  plus_minus, // -1 -> 0, +1 -> 1
  even_odd,   // even digit -> 1, odd -> 0
};

LabelRule parse_label_rule(const std::string& name);
// Throws naming the offending value when a label does not fit the rule.
void binarize_labels(SparseDataset& ds, LabelRule rule);

SparseDataset take_rows(const SparseDataset& ds, const std::vector<Index>& rows);

// Deterministic split: a seeded permutation, first round(fraction*n) rows to
// the test side, both sides in ascending original order.
std::pair<SparseDataset, SparseDataset> train_test_split(const SparseDataset& ds,
                                                         double test_fraction,
                                                         std::uint64_t seed);

}  // namespace curvopt
