#include "curvopt/data_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace curvopt {

namespace {

[[noreturn]] void parse_fail(Index line, const std::string& what) {
  std::ostringstream msg;
  msg << "libsvm parse error at line " << line << ": " << what;
  throw std::runtime_error(msg.str());
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, Index expected_dim) {
  SparseDataset ds;
  ds.indptr.push_back(0);
  std::string line;
  Index lineno = 0;
  Index maxcol = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char* s = line.c_str();
    while (*s == ' ' || *s == '\t') ++s;
    if (*s == '\0') continue;  // blank line

    char* q = nullptr;
    double label = std::strtod(s, &q);
    if (q == s) parse_fail(lineno, "malformed label");
    s = q;

    Index prev = -1;
    Index count = 0;
    for (;;) {
      while (*s == ' ' || *s == '\t') ++s;
      if (*s == '\0') break;
      errno = 0;
      long idx = std::strtol(s, &q, 10);
      if (q == s || *q != ':') parse_fail(lineno, "malformed feature token");
      if (errno == ERANGE || idx < 1) parse_fail(lineno, "feature index must be >= 1");
      s = q + 1;
      double val = std::strtod(s, &q);
      if (q == s) parse_fail(lineno, "malformed feature value");
      s = q;
      Index col = static_cast<Index>(idx) - 1;
      if (col <= prev) parse_fail(lineno, "feature indices must be strictly increasing");
      prev = col;
      maxcol = std::max(maxcol, col);
      ds.colind.push_back(col);
      ds.values.push_back(val);
      ++count;
    }
    ds.labels.push_back(label);
    ds.indptr.push_back(ds.indptr.back() + count);
    ++ds.n;
  }
  if (expected_dim > 0 && maxcol + 1 > expected_dim) {
    std::ostringstream msg;
    msg << "libsvm: feature index " << maxcol + 1 << " exceeds expected dimension "
        << expected_dim;
    throw std::runtime_error(msg.str());
  }
  ds.d = expected_dim > 0 ? expected_dim : maxcol + 1;
  ds.check();
  return ds;
}

SparseDataset load_libsvm(const std::string& path, Index expected_dim) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string content;
  char buf[1 << 16];
  int r;
  while ((r = gzread(f, buf, sizeof buf)) > 0) content.append(buf, static_cast<std::size_t>(r));
  if (r < 0) {
    int e = 0;
    std::string msg = gzerror(f, &e);
    gzclose(f);
    throw std::runtime_error("gzip read failed for " + path + ": " + msg);
  }
  gzclose(f);
  std::istringstream in(content);
  return parse_libsvm(in, expected_dim);
}

void write_libsvm(const SparseDataset& ds, std::ostream& out) {
  char num[40];
  for (Index i = 0; i < ds.n; ++i) {
    std::snprintf(num, sizeof num, "%.17g", ds.labels[static_cast<std::size_t>(i)]);
    out << num;
    for (Index p = ds.indptr[static_cast<std::size_t>(i)];
         p < ds.indptr[static_cast<std::size_t>(i + 1)]; ++p) {
      std::snprintf(num, sizeof num, "%.17g", ds.values[static_cast<std::size_t>(p)]);
      out << ' ' << ds.colind[static_cast<std::size_t>(p)] + 1 << ':' << num;
    }
    out << '\n';
  }
}

void write_libsvm_file(const SparseDataset& ds, const std::string& path, bool gzip) {
  std::ostringstream buf;
  write_libsvm(ds, buf);
  const std::string text = buf.str();
  if (gzip) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::size_t off = 0;
    while (off < text.size()) {
      unsigned chunk = static_cast<unsigned>(
          std::min<std::size_t>(text.size() - off, 1u << 29));
      if (gzwrite(f, text.data() + off, chunk) != static_cast<int>(chunk)) {
        gzclose(f);
        throw std::runtime_error("gzip write failed for " + path);
      }
      off += chunk;
    }
    if (gzclose(f) != Z_OK) throw std::runtime_error("gzip close failed for " + path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

LabelRule parse_label_rule(const std::string& name) {
  if (name == "none") return LabelRule::none;
  if (name == "zero_one") return LabelRule::zero_one;
  if (name == "plus_minus") return LabelRule::plus_minus;
  if (name == "even_odd") return LabelRule::even_odd;
  throw std::invalid_argument("unknown label rule: " + name);
}

void binarize_labels(SparseDataset& ds, LabelRule rule) {
  for (Index i = 0; i < ds.n; ++i) {
    double& y = ds.labels[static_cast<std::size_t>(i)];
    auto fail = [&] {
      std::ostringstream msg;
      msg << "label " << y << " (row " << i + 1 << ") does not fit the label rule";
      throw std::runtime_error(msg.str());
    };
    switch (rule) {
      case LabelRule::none:
        if (y < 0.0 || y != std::floor(y)) fail();
        break;
      case LabelRule::zero_one:
        if (y != 0.0 && y != 1.0) fail();
        break;
      case LabelRule::plus_minus:
        if (y == -1.0) y = 0.0;
        else if (y == 1.0) y = 1.0;
        else fail();
        break;
      case LabelRule::even_odd:
        if (y != std::floor(y)) fail();
        y = std::fmod(std::abs(y), 2.0) == 0.0 ? 1.0 : 0.0;
        break;
    }
  }
}

SparseDataset take_rows(const SparseDataset& ds, const std::vector<Index>& rows) {
  SparseDataset out;
  out.d = ds.d;
  out.indptr.push_back(0);
  for (Index i : rows) {
    if (i < 0 || i >= ds.n) throw std::out_of_range("take_rows: row out of range");
    for (Index p = ds.indptr[static_cast<std::size_t>(i)];
         p < ds.indptr[static_cast<std::size_t>(i + 1)]; ++p) {
      out.colind.push_back(ds.colind[static_cast<std::size_t>(p)]);
      out.values.push_back(ds.values[static_cast<std::size_t>(p)]);
    }
    out.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
    out.indptr.push_back(static_cast<Index>(out.colind.size()));
    ++out.n;
  }
  return out;
}

std::pair<SparseDataset, SparseDataset> train_test_split(const SparseDataset& ds,
                                                         double test_fraction,
                                                         std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("train_test_split: fraction must be in (0,1)");
  Rng rng(seed);
  std::vector<Index> perm = rng.subset_without_replacement(ds.n, ds.n);
  Index n_test = std::max<Index>(1, static_cast<Index>(std::llround(
                                        test_fraction * static_cast<double>(ds.n))));
  if (n_test >= ds.n) n_test = ds.n - 1;
  std::vector<Index> test_rows(perm.begin(), perm.begin() + n_test);
  std::vector<Index> train_rows(perm.begin() + n_test, perm.end());
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

}  // namespace curvopt
