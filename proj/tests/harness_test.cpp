#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "curvopt/data_io.hpp"
#include "curvopt/harness.hpp"
#include "curvopt/synth.hpp"
#include "curvopt/trace.hpp"
#include "doctest.h"

using namespace curvopt;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path p;
  explicit TmpDir(const char* name) : p(fs::path("harness_tmp") / name) {
    fs::remove_all(p);
    fs::create_directories(p);
  }
  ~TmpDir() {
    std::error_code ec;
    fs::remove_all(p, ec);
  }
  std::string str(const std::string& f) const { return (p / f).string(); }
};

std::string make_train_file(const TmpDir& t, Index n, std::uint64_t seed) {
  SynthClassConfig cfg;
  cfg.n_train = n;
  cfg.n_test = 1;
  cfg.seed = seed;
  std::string path = t.str("train.libsvm");
  write_libsvm_file(synth_classification(cfg).train, path);
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validation reports every problem at once") {
  ConfigMap cfg = ConfigMap::parse_string(
      "problem = nls\n"
      "algorithm = warp\n"
      "sample_ratio = 7\n"
      "banana = 1\n"
      "seed = -3\n");
  try {
    run_experiment(cfg);
    FAIL("expected a validation error");
  } catch (const std::exception& e) {
    std::string msg = e.what();
    CHECK(msg.find("invalid configuration") != std::string::npos);
    CHECK(msg.find("algorithm") != std::string::npos);
    CHECK(msg.find("sample_ratio") != std::string::npos);
    CHECK(msg.find("banana") != std::string::npos);
    CHECK(msg.find("data.train") != std::string::npos);
    CHECK(msg.find("seed") != std::string::npos);
  }
}

TEST_CASE("a run writes a parseable trace that echoes its configuration") {
  TmpDir tmp("single");
  std::string train = make_train_file(tmp, 800, 3);
  ConfigMap cfg;
  cfg.set("problem", "nls");
  cfg.set("data.train", train);
  cfg.set("algorithm", "tr");
  cfg.set("hessian", "uniform");
  cfg.set("sample_ratio", "0.05");
  cfg.set("budget", "30000");
  cfg.set("seed", "3");
  cfg.set("out", tmp.str("runs"));

  RunOutcome out = run_experiment(cfg);
  CHECK(out.run_id == "tr_nls_s3");
  CHECK(out.error.empty());
  CHECK(out.status == RunStatus::budget_exhausted);
  REQUIRE(fs::exists(out.trace_path));

  Trace tr = read_trace_file(out.trace_path);
  REQUIRE(!tr.records.empty());
  CHECK(tr.status == "budget_exhausted");
  CHECK(tr.records.back().props == out.props);
  CHECK(out.props >= 30000);
  auto meta = [&](const char* k) {
    const std::string* v = tr.find_meta(k);
    REQUIRE(v != nullptr);
    return *v;
  };
  CHECK(meta("algorithm") == "tr");
  CHECK(meta("problem") == "nls");
  CHECK(meta("hessian") == "uniform");
  CHECK(meta("sample_ratio") == format_double(0.05));
  CHECK(meta("seed") == "3");
  CHECK(meta("budget") == "30000");
  CHECK(meta("run_id") == "tr_nls_s3");
  // train error gets evaluated by default; no test set was given
  CHECK(std::isfinite(tr.records.back().train_error));
  CHECK(std::isnan(tr.records.back().test_error));
}

TEST_CASE("same config and seed produce byte-identical traces") {
  TmpDir tmp("rerun");
  std::string train = make_train_file(tmp, 600, 5);
  ConfigMap cfg;
  cfg.set("problem", "nls");
  cfg.set("data.train", train);
  cfg.set("algorithm", "arc");
  cfg.set("hessian", "uniform");
  cfg.set("sample_ratio", "0.02");
  cfg.set("budget", "20000");
  cfg.set("seed", "9");

  cfg.set("out", tmp.str("a"));
  RunOutcome first = run_experiment(cfg);
  cfg.set("out", tmp.str("b"));
  RunOutcome second = run_experiment(cfg);
  REQUIRE(first.error.empty());
  REQUIRE(second.error.empty());
  CHECK(first.trace_path != second.trace_path);
  CHECK(slurp(first.trace_path) == slurp(second.trace_path));
}

TEST_CASE("train/test splits report test error from the held-out rows") {
  TmpDir tmp("split");
  std::string train = make_train_file(tmp, 1000, 7);
  ConfigMap cfg;
  cfg.set("problem", "nls");
  cfg.set("data.train", train);
  cfg.set("data.test_fraction", "0.25");
  cfg.set("budget", "20000");
  cfg.set("out", tmp.str("runs"));
  RunOutcome out = run_experiment(cfg);
  REQUIRE(out.error.empty());
  Trace tr = read_trace_file(out.trace_path);
  REQUIRE(!tr.records.empty());
  CHECK(std::isfinite(tr.records.back().test_error));
  CHECK(tr.records.back().test_error >= 0.0);
  CHECK(tr.records.back().test_error <= 1.0);
}

TEST_CASE("the mlp problem runs end to end from a libsvm file") {
  TmpDir tmp("mlp");
  std::string train = make_train_file(tmp, 300, 11);
  ConfigMap cfg;
  cfg.set("problem", "mlp_classify");
  cfg.set("data.train", train);
  cfg.set("mlp.hidden", "6");
  cfg.set("algorithm", "tr");
  cfg.set("hessian", "uniform");
  cfg.set("sample_ratio", "0.1");
  cfg.set("budget", "15000");
  cfg.set("out", tmp.str("runs"));
  RunOutcome out = run_experiment(cfg);
  REQUIRE(out.error.empty());
  CHECK(out.status == RunStatus::budget_exhausted);
  Trace tr = read_trace_file(out.trace_path);
  const std::string* cls = tr.find_meta("mlp.classes");
  REQUIRE(cls != nullptr);
  CHECK(*cls == "2");
  REQUIRE(!tr.records.empty());
  CHECK(std::isfinite(tr.records.back().train_loss));
}

TEST_CASE("non-uniform sampling is rejected for the mlp problem") {
  TmpDir tmp("mlpnonuni");
  std::string train = make_train_file(tmp, 100, 13);
  ConfigMap cfg;
  cfg.set("problem", "mlp_classify");
  cfg.set("data.train", train);
  cfg.set("hessian", "nonuniform");
  cfg.set("out", tmp.str("runs"));
  try {
    run_experiment(cfg);
    FAIL("expected a validation error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("nonuniform") != std::string::npos);
  }
}

TEST_CASE("sweep.* keys are rejected under run") {
  TmpDir tmp("sweepunderrun");
  std::string train = make_train_file(tmp, 100, 15);
  ConfigMap cfg;
  cfg.set("problem", "nls");
  cfg.set("data.train", train);
  cfg.set("sweep.delta0", "1, 10");
  try {
    run_experiment(cfg);
    FAIL("expected a validation error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("sweep.") != std::string::npos);
  }
}

TEST_CASE("a sweep expands the cartesian product and keeps going on failures") {
  TmpDir tmp("sweep");
  std::string train = make_train_file(tmp, 500, 17);
  ConfigMap cfg;
  cfg.set("problem", "nls");
  cfg.set("data.train", train);
  cfg.set("budget", "15000");
  cfg.set("out", tmp.str("runs"));
  cfg.set("sweep.delta0", "0.1, 10");
  cfg.set("sweep.seed", "1, 2");

  std::ostringstream log;
  std::vector<RunOutcome> outs = run_sweep(cfg, &log);
  REQUIRE(outs.size() == 4);
  // file order: delta0 is the outer axis, seed the inner one
  CHECK(outs[0].run_id == "run_delta0-0.1_seed-1");
  CHECK(outs[1].run_id == "run_delta0-0.1_seed-2");
  CHECK(outs[2].run_id == "run_delta0-10_seed-1");
  CHECK(outs[3].run_id == "run_delta0-10_seed-2");
  for (const auto& o : outs) {
    CHECK(o.error.empty());
    CHECK(fs::exists(o.trace_path));
  }

  std::string summary = slurp(tmp.str("runs") + "/summary.csv");
  std::string expect_header = std::string("run_id,") + kTraceHeader + "\n";
  CHECK(summary.substr(0, expect_header.size()) == expect_header);
  for (const auto& o : outs)
    CHECK(summary.find(o.run_id + ",") != std::string::npos);
  CHECK(summary.find("# failed") == std::string::npos);
  CHECK(log.str().find("run_delta0-10_seed-2") != std::string::npos);

  // now poison one axis value: that combination fails, the rest still run
  ConfigMap bad;
  bad.set("problem", "nls");
  bad.set("data.train", train);
  bad.set("budget", "15000");
  bad.set("out", tmp.str("runs2"));
  bad.set("sweep.algorithm", "tr, warp");
  std::vector<RunOutcome> mixed = run_sweep(bad, nullptr);
  REQUIRE(mixed.size() == 2);
  CHECK(mixed[0].error.empty());
  CHECK(!mixed[1].error.empty());
  std::string summary2 = slurp(tmp.str("runs2") + "/summary.csv");
  CHECK(summary2.find("# failed run_algorithm-warp") != std::string::npos);
}

TEST_CASE("duplicate sweep ids are rejected before any run starts") {
  TmpDir tmp("sweepdup");
  std::string train = make_train_file(tmp, 100, 19);
  ConfigMap cfg;
  cfg.set("problem", "nls");
  cfg.set("data.train", train);
  cfg.set("out", tmp.str("runs"));
  cfg.set("sweep.seed", "1, 1");
  CHECK_THROWS(run_sweep(cfg, nullptr));
  CHECK_FALSE(fs::exists(tmp.str("runs") + "/summary.csv"));
}
