#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "curvopt/optimizers.hpp"

namespace curvopt {

// Column order is part of the file contract; replay tooling depends on it.
inline constexpr const char* kTraceHeader =
    "iter,props,train_loss,train_err,test_err,rho,radius_or_sigma,step_norm,"
    "accepted,subproblem_hvps";

using MetaList = std::vector<std::pair<std::string, std::string>>;

struct Trace {
  MetaList meta;  // every "# key = value" line, in file order
  std::vector<IterationRecord> records;
  std::string status;  // convenience copy of meta["status"]

  const std::string* find_meta(const std::string& key) const;
};

// %.17g, so doubles round-trip bit-exactly through the file.
std::string format_double(double v);

// One CSV row in header order, no trailing newline (shared with sweep summaries).
std::string record_row(const IterationRecord& r);

// Meta block, header, one row per record, then "# status" (and "# message"
// when non-empty). No timestamps: identical runs produce identical bytes.
void write_trace(std::ostream& out, const MetaList& meta, const RunResult& result);
void write_trace_file(const std::string& path, const MetaList& meta, const RunResult& result);

Trace read_trace(std::istream& in);
Trace read_trace_file(const std::string& path);

}  // namespace curvopt
