#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "curvopt/config.hpp"
#include "curvopt/optimizers.hpp"

namespace curvopt {

struct RunOutcome {
  std::string run_id;
  std::string trace_path;  // empty when the run failed before writing
  RunStatus status = RunStatus::aborted;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t props = 0;
  std::string error;  // non-empty when this run itself failed
};

// Resolves and validates the config (every problem reported in one throw),
// builds the problem, runs the selected driver, and writes <out>/<run_id>.csv.
// Same config + same seed produce byte-identical trace files.
RunOutcome run_experiment(const ConfigMap& cfg);

// Expands `sweep.<key> = v1, v2, ...` axes into a cartesian product and runs
// each combination; per-run failures are recorded and the sweep continues.
// Writes every trace plus <out>/summary.csv in long format keyed (run_id, iter).
std::vector<RunOutcome> run_sweep(const ConfigMap& cfg, std::ostream* log = nullptr);

}  // namespace curvopt
