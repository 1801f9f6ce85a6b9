#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvopt/hessian_op.hpp"
#include "curvopt/ledger.hpp"
#include "curvopt/oracle.hpp"
#include "curvopt/types.hpp"

namespace curvopt {

enum class HessianSource { full, uniform, nonuniform };
enum class RunStatus { converged, budget_exhausted, max_iterations, diverged, aborted };

const char* to_string(HessianSource s);
const char* to_string(RunStatus s);

// One trace row. NaN / -1 mean "not applicable" and print as empty cells.
struct IterationRecord {
  Index iter = 0;
  std::uint64_t props = 0;  // cumulative normative propagations after this iteration
  double train_loss = std::numeric_limits<double>::quiet_NaN();
  double train_error = std::numeric_limits<double>::quiet_NaN();
  double test_error = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();  // -inf on guarded/failed ratios
  double radius_or_sigma = std::numeric_limits<double>::quiet_NaN();  // value used this iteration
  double step_norm = std::numeric_limits<double>::quiet_NaN();
  int accepted = -1;
  Index subproblem_hvps = -1;
};

struct RunResult {
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::max_iterations;
  std::string message;  // diagnostics for aborted/diverged runs
  Vector x;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  // The budget ledger: exactly the per-iteration charge model, advanced once
  // per iteration. Oracle-call and evaluation costs are tracked separately so
  // tests can audit each without conflating them.
  PropagationLedger normative;
  PropagationLedger actual;
  PropagationLedger eval;
};

struct SecondOrderCommon {
  double eta1 = 1e-4;
  double eta2 = 0.8;
  double gamma1 = 1.2;
  double gamma2 = 2.0;
  double eps_g = 1e-5;
  double eps_H = 1e-4;
  HessianSource hessian = HessianSource::full;
  double sample_ratio = 0.01;  // |S| = max(1, round(ratio * n)) for sampled sources
  std::uint64_t budget = 10'000'000;
  Index max_iters = 2'000'000;
  Index lanczos_k = 20;  // min-eigenvalue probe size
  const Oracle* test_oracle = nullptr;
  bool eval_errors = true;
};

struct TrustRegionConfig : SecondOrderCommon {
  double delta0 = 10.0;
  Index cg_max_iter = 0;  // 0 -> dim
};

struct ArcConfig : SecondOrderCommon {
  double sigma0 = 1e-4;
  Index lanczos_max_iter = 250;
  bool full_reorth = true;
};

struct SgdConfig {
  double alpha = 0.05;
  double momentum = 0.9;
  double batch_ratio = 0.01;  // |S| = max(1, round(ratio * n)), drawn without replacement
  std::uint64_t budget = 10'000'000;
  Index max_iters = 2'000'000;
  Index eval_every = 0;  // 0 -> spaced so evaluation stays under ~5% of budget
  const Oracle* test_oracle = nullptr;
  bool eval_errors = true;
};

struct LbfgsConfig {
  Index history = 100;
  double c1 = 1e-4;        // Armijo slope fraction
  double backtrack = 0.5;  // step shrink factor
  Index ls_max = 50;       // line-search trials per iteration
  double eps_g = 1e-5;
  std::uint64_t budget = 10'000'000;
  Index max_iters = 2'000'000;
  const Oracle* test_oracle = nullptr;
  bool eval_errors = true;
};

RunResult run_tr(const Oracle& oracle, const TrustRegionConfig& cfg, const Vector& x0,
                 std::uint64_t seed);
RunResult run_arc(const Oracle& oracle, const ArcConfig& cfg, const Vector& x0,
                  std::uint64_t seed);
// Trust-region outer loop on the Gauss-Newton (GGN) operator.
RunResult run_gauss_newton(const Oracle& oracle, const TrustRegionConfig& cfg,
                           const Vector& x0, std::uint64_t seed);
RunResult run_sgd_momentum(const Oracle& oracle, const SgdConfig& cfg, const Vector& x0,
                           std::uint64_t seed);
RunResult run_lbfgs(const Oracle& oracle, const LbfgsConfig& cfg, const Vector& x0,
                    std::uint64_t seed);

}  // namespace curvopt
