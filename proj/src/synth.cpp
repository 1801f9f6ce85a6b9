#include "curvopt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "curvopt/data_io.hpp"
#include "curvopt/nls.hpp"
#include "curvopt/rng.hpp"

namespace curvopt {

SynthPair synth_classification(const SynthClassConfig& cfg) {
  if (cfg.n_train <= 0 || cfg.n_test <= 0 || cfg.d <= 0 ||
      cfg.nnz_per_row <= 0 || cfg.nnz_per_row > cfg.d)
    throw std::invalid_argument("synth_classification: bad sizes");

  Rng rng(cfg.seed);
  const Index total = cfg.n_train + cfg.n_test;

  // Draw order: planted weights, then every row's support, then all labels.
  Vector wstar(cfg.d);
  rng.fill_gaussian(wstar);

  std::vector<double> cdf(static_cast<std::size_t>(cfg.d));
  double run = 0.0;
  for (Index j = 0; j < cfg.d; ++j) {
    run += 1.0 / static_cast<double>(j + 5);  // skewed frequencies, a la one-hot codes
    cdf[static_cast<std::size_t>(j)] = run;
  }

  SparseDataset all;
  all.d = cfg.d;
  all.n = total;
  all.indptr.push_back(0);
  std::vector<double> z(static_cast<std::size_t>(total));
  std::vector<char> used(static_cast<std::size_t>(cfg.d), 0);
  for (Index i = 0; i < total; ++i) {
    std::vector<Index> support;
    support.reserve(static_cast<std::size_t>(cfg.nnz_per_row));
    while (static_cast<Index>(support.size()) < cfg.nnz_per_row) {
      Index j = rng.categorical(cdf);
      if (!used[static_cast<std::size_t>(j)]) {
        used[static_cast<std::size_t>(j)] = 1;
        support.push_back(j);
      }
    }
    std::sort(support.begin(), support.end());
    double zi = 0.0;
    for (Index j : support) {
      used[static_cast<std::size_t>(j)] = 0;
      all.colind.push_back(j);
      all.values.push_back(1.0);
      zi += wstar(j);
    }
    all.indptr.push_back(static_cast<Index>(all.colind.size()));
    z[static_cast<std::size_t>(i)] = zi;
  }

  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(total);
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / static_cast<double>(total));
  if (!(sd > 0.0)) sd = 1.0;

  all.labels.resize(static_cast<std::size_t>(total));
  for (Index i = 0; i < total; ++i) {
    double p = nls::sigmoid(
        cfg.margin_scale * ((z[static_cast<std::size_t>(i)] - mean) / sd - cfg.logit_offset));
    all.labels[static_cast<std::size_t>(i)] = rng.uniform01() < p ? 1.0 : 0.0;
  }
  all.check();

  std::vector<Index> head(static_cast<std::size_t>(cfg.n_train));
  std::vector<Index> tail(static_cast<std::size_t>(cfg.n_test));
  for (Index i = 0; i < cfg.n_train; ++i) head[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < cfg.n_test; ++i) tail[static_cast<std::size_t>(i)] = cfg.n_train + i;
  return {take_rows(all, head), take_rows(all, tail)};
}

SparseDataset synth_spread_rows(Index n, Index d, double decades, std::uint64_t seed) {
  if (n < 2 || d <= 0) throw std::invalid_argument("synth_spread_rows: bad sizes");
  Rng rng(seed);
  SparseDataset ds;
  ds.n = n;
  ds.d = d;
  ds.indptr.push_back(0);
  for (Index i = 0; i < n; ++i) {
    Vector dir(d);
    rng.fill_gaussian(dir);
    dir.normalize();
    double expo = -0.5 * decades + decades * static_cast<double>(i) / static_cast<double>(n - 1);
    double nrm = std::pow(10.0, expo);
    for (Index j = 0; j < d; ++j) {
      ds.colind.push_back(j);
      ds.values.push_back(nrm * dir(j));
    }
    ds.indptr.push_back(static_cast<Index>(ds.colind.size()));
  }
  for (Index i = 0; i < n; ++i) ds.labels.push_back(rng.uniform01() < 0.5 ? 1.0 : 0.0);
  ds.check();
  return ds;
}

}  // namespace curvopt
