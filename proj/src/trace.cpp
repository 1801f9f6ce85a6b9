#include "curvopt/trace.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace curvopt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Empty cell = "not applicable" (NaN / -1 in the record).
std::string cell(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

double parse_cell(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error("read_trace: bad numeric cell '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::string* Trace::find_meta(const std::string& key) const {
  for (const auto& kv : meta)
    if (kv.first == key) return &kv.second;
  return nullptr;
}

std::string record_row(const IterationRecord& r) {
  std::string s;
  s += std::to_string(r.iter);
  s += ',';
  s += std::to_string(r.props);
  s += ',';
  s += cell(r.train_loss);
  s += ',';
  s += cell(r.train_error);
  s += ',';
  s += cell(r.test_error);
  s += ',';
  s += cell(r.rho);
  s += ',';
  s += cell(r.radius_or_sigma);
  s += ',';
  s += cell(r.step_norm);
  s += ',';
  if (r.accepted >= 0) s += std::to_string(r.accepted);
  s += ',';
  if (r.subproblem_hvps >= 0) s += std::to_string(r.subproblem_hvps);
  return s;
}

void write_trace(std::ostream& out, const MetaList& meta, const RunResult& result) {
  for (const auto& kv : meta) out << "# " << kv.first << " = " << kv.second << "\n";
  out << kTraceHeader << "\n";
  for (const IterationRecord& r : result.records) out << record_row(r) << "\n";
  out << "# status = " << to_string(result.status) << "\n";
  if (!result.message.empty()) out << "# message = " << result.message << "\n";
}

void write_trace_file(const std::string& path, const MetaList& meta, const RunResult& result) {
  std::ofstream out(path, std::ios::binary);  // binary: no CRLF surprises
  if (!out) throw std::runtime_error("write_trace_file: cannot open " + path);
  write_trace(out, meta, result);
  out.flush();
  if (!out) throw std::runtime_error("write_trace_file: write failed for " + path);
}

Trace read_trace(std::istream& in) {
  Trace t;
  bool saw_header = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      std::string body = trim(line.substr(1));
      std::size_t eq = body.find('=');
      if (eq == std::string::npos) continue;  // tolerate free-form comments
      t.meta.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
      continue;
    }
    if (!saw_header) {
      if (trim(line) != kTraceHeader)
        throw std::runtime_error("read_trace: unexpected header '" + line + "'");
      saw_header = true;
      continue;
    }
    std::vector<std::string> f = split_csv(line);
    if (f.size() != 10)
      throw std::runtime_error("read_trace: expected 10 cells, got " +
                               std::to_string(f.size()));
    IterationRecord r;
    r.iter = static_cast<Index>(std::stoll(f[0]));
    r.props = static_cast<std::uint64_t>(std::stoull(f[1]));
    r.train_loss = parse_cell(f[2]);
    r.train_error = parse_cell(f[3]);
    r.test_error = parse_cell(f[4]);
    r.rho = parse_cell(f[5]);
    r.radius_or_sigma = parse_cell(f[6]);
    r.step_norm = parse_cell(f[7]);
    r.accepted = f[8].empty() ? -1 : std::stoi(f[8]);
    r.subproblem_hvps = f[9].empty() ? Index{-1} : static_cast<Index>(std::stoll(f[9]));
    t.records.push_back(r);
  }
  if (!saw_header) throw std::runtime_error("read_trace: missing header row");
  if (const std::string* s = t.find_meta("status")) t.status = *s;
  return t;
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_trace_file: cannot open " + path);
  return read_trace(in);
}

}  // namespace curvopt
