#include <cmath>

#include "curvopt/synth.hpp"
#include "doctest.h"

using namespace curvopt;

TEST_CASE("synthetic classification pair: shapes, determinism, signal") {
  SynthClassConfig cfg;
  cfg.n_train = 3000;
  cfg.n_test = 800;
  SynthPair a = synth_classification(cfg);
  SynthPair b = synth_classification(cfg);
  CHECK(a.train.n == 3000);
  CHECK(a.test.n == 800);
  CHECK(a.train.d == 123);
  a.train.check();
  a.test.check();
  CHECK(a.train.values == b.train.values);
  CHECK(a.train.labels == b.train.labels);
  CHECK(a.test.colind == b.test.colind);

  // every row has exactly nnz_per_row ones
  for (Index i = 0; i < a.train.n; ++i)
    CHECK(a.train.indptr[static_cast<std::size_t>(i) + 1] -
              a.train.indptr[static_cast<std::size_t>(i)] ==
          cfg.nnz_per_row);

  // labels are 0/1 and both classes occur in reasonable proportion
  double pos = 0.0;
  for (double y : a.train.labels) {
    CHECK((y == 0.0 || y == 1.0));
    pos += y;
  }
  pos /= static_cast<double>(a.train.n);
  CHECK(pos > 0.2);
  CHECK(pos < 0.8);

  SynthClassConfig other = cfg;
  other.seed = 2;
  SynthPair c = synth_classification(other);
  CHECK(a.train.labels != c.train.labels);
}

TEST_CASE("spread rows span the requested norm decades") {
  SparseDataset ds = synth_spread_rows(20, 6, 3.0, 5);
  ds.check();
  CHECK(ds.n == 20);
  double lo = std::sqrt(ds.row_norm_sq(0));
  double hi = std::sqrt(ds.row_norm_sq(19));
  CHECK(hi / lo == doctest::Approx(1e3).epsilon(1e-9));
  for (Index i = 0; i + 1 < ds.n; ++i)
    CHECK(ds.row_norm_sq(i) < ds.row_norm_sq(i + 1));
}
