#include "curvopt/harness.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <stdexcept>
#include <utility>

#include "curvopt/data_io.hpp"
#include "curvopt/init.hpp"
#include "curvopt/mlp.hpp"
#include "curvopt/nls.hpp"
#include "curvopt/trace.hpp"
#include "curvopt/version.hpp"

namespace curvopt {
namespace {

// Every key the run grammar recognizes; anything else is a typo. Keys for a
// different algorithm/problem than the selected one are legal and ignored, so
// one file can serve a whole sweep.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> k = {
      "problem", "data.train", "data.test", "data.test_fraction", "data.split_seed",
      "data.labels", "data.dim",
      "mlp.hidden", "mlp.classes", "mlp.activation", "mlp.loss",
      "algorithm", "hessian", "sample_ratio",
      "delta0", "cg_max_iter", "sigma0", "lanczos_max_iter", "full_reorth",
      "alpha", "momentum", "batch_ratio",
      "history", "c1", "backtrack", "ls_max",
      "eta1", "eta2", "gamma1", "gamma2", "eps_g", "eps_H", "lanczos_k",
      "max_iters", "eval_every", "eval_errors",
      "init", "seed", "budget", "out", "run_id",
  };
  return k;
}

struct Resolved {
  std::string problem, algorithm, hessian_str, init_str, label_str;
  std::string train_path, test_path, out_dir, run_id;
  double test_fraction = 0.0;
  std::uint64_t split_seed = 77, seed = 1, budget = 10'000'000;
  Index data_dim = 0;
  LabelRule labels = LabelRule::zero_one;
  HessianSource hessian = HessianSource::full;
  double sample_ratio = 0.01;
  InitScheme init = InitScheme::zeros;
  double init_c = 1.0;
  double delta0 = 10.0, sigma0 = 1e-4, alpha = 0.05, momentum = 0.9, batch_ratio = 0.01;
  double eta1 = 1e-4, eta2 = 0.8, gamma1 = 1.2, gamma2 = 2.0, eps_g = 1e-5, eps_H = 1e-4;
  double c1 = 1e-4, backtrack = 0.5;
  Index cg_max_iter = 0, lanczos_max_iter = 250, lanczos_k = 20, history = 100,
        ls_max = 50, max_iters = 2'000'000, eval_every = 0;
  bool full_reorth = true, eval_errors = true;
  std::vector<Index> hidden;
  Index classes = 0;  // 0 -> inferred from the training labels
  Activation act = Activation::logistic;
  std::string act_str = "logistic", loss_str;
  MlpLoss loss = MlpLoss::softmax_cross_entropy;

  bool is_mlp() const { return problem.rfind("mlp_", 0) == 0; }
  bool second_order() const {
    return algorithm == "tr" || algorithm == "arc" || algorithm == "gn";
  }
};

bool file_readable(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  return f.good();
}

bool id_ok(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.' && c != '+')
      return false;
  return true;
}

std::string join_errors(const std::vector<std::string>& errors) {
  std::string all = "invalid configuration (" + std::to_string(errors.size()) +
                    " problem" + (errors.size() == 1 ? "" : "s") + "):";
  for (const std::string& e : errors) all += "\n  - " + e;
  return all;
}

Resolved resolve(const ConfigMap& cfg) {
  std::vector<std::string> errors;
  auto bad = [&](const std::string& m) { errors.push_back(m); };
  // One malformed value should not hide the rest: record and fall back.
  auto getd = [&](const char* k, double def) {
    try {
      return cfg.get_double(k, def);
    } catch (const std::exception& e) {
      bad(e.what());
      return def;
    }
  };
  auto geti = [&](const char* k, Index def) {
    try {
      return cfg.get_index(k, def);
    } catch (const std::exception& e) {
      bad(e.what());
      return def;
    }
  };
  auto getu = [&](const char* k, std::uint64_t def) {
    try {
      return cfg.get_u64(k, def);
    } catch (const std::exception& e) {
      bad(e.what());
      return def;
    }
  };
  auto getb = [&](const char* k, bool def) {
    try {
      return cfg.get_bool(k, def);
    } catch (const std::exception& e) {
      bad(e.what());
      return def;
    }
  };

  Resolved r;
  for (const auto& kv : cfg.entries()) {
    if (kv.first.rfind("sweep.", 0) == 0)
      bad("'" + kv.first + "': sweep.* keys are only used by 'curvopt sweep'");
    else if (!known_keys().count(kv.first))
      bad("unknown config key '" + kv.first + "'");
  }

  r.problem = cfg.get_string("problem", "");
  if (r.problem != "nls" && r.problem != "mlp_classify" && r.problem != "mlp_autoencode")
    bad("problem: expected nls|mlp_classify|mlp_autoencode, got '" + r.problem + "'");
  r.algorithm = cfg.get_string("algorithm", "tr");
  if (r.algorithm != "tr" && r.algorithm != "arc" && r.algorithm != "sgd" &&
      r.algorithm != "lbfgs" && r.algorithm != "gn")
    bad("algorithm: expected tr|arc|sgd|lbfgs|gn, got '" + r.algorithm + "'");

  r.hessian_str = cfg.get_string("hessian", "full");
  if (r.hessian_str == "full") r.hessian = HessianSource::full;
  else if (r.hessian_str == "uniform") r.hessian = HessianSource::uniform;
  else if (r.hessian_str == "nonuniform") r.hessian = HessianSource::nonuniform;
  else bad("hessian: expected full|uniform|nonuniform, got '" + r.hessian_str + "'");
  if (r.hessian == HessianSource::nonuniform && r.is_mlp())
    bad("hessian: nonuniform needs per-sample curvature scores, available for nls only");

  r.sample_ratio = getd("sample_ratio", 0.01);
  if (!(r.sample_ratio > 0.0 && r.sample_ratio <= 1.0))
    bad("sample_ratio: want a value in (0,1]");

  r.train_path = cfg.get_string("data.train", "");
  if (r.train_path.empty()) bad("data.train: required");
  else if (!file_readable(r.train_path)) bad("data.train: cannot open '" + r.train_path + "'");
  r.test_path = cfg.get_string("data.test", "");
  if (!r.test_path.empty() && !file_readable(r.test_path))
    bad("data.test: cannot open '" + r.test_path + "'");
  r.test_fraction = getd("data.test_fraction", 0.0);
  if (!(r.test_fraction >= 0.0 && r.test_fraction < 1.0))
    bad("data.test_fraction: want a value in [0,1)");
  if (!r.test_path.empty() && r.test_fraction > 0.0)
    bad("data.test and data.test_fraction are mutually exclusive");
  r.split_seed = getu("data.split_seed", 77);
  r.data_dim = geti("data.dim", 0);
  if (r.data_dim < 0) bad("data.dim: want >= 0 (0 infers the width)");
  r.label_str = cfg.get_string("data.labels", "zero_one");
  try {
    r.labels = parse_label_rule(r.label_str);
  } catch (const std::exception& e) {
    bad(e.what());
  }

  if (r.is_mlp()) {
    std::vector<std::string> hs =
        cfg.has("mlp.hidden") ? cfg.get_list("mlp.hidden") : std::vector<std::string>{"16"};
    if (hs.empty()) bad("mlp.hidden: want a comma list of positive widths");
    for (const std::string& h : hs) {
      char* end = nullptr;
      long v = std::strtol(h.c_str(), &end, 10);
      if (end == h.c_str() || *end != '\0' || v < 1)
        bad("mlp.hidden: bad width '" + h + "'");
      else
        r.hidden.push_back(static_cast<Index>(v));
    }
    r.classes = geti("mlp.classes", 0);
    if (r.classes < 0 || r.classes == 1) bad("mlp.classes: want >= 2 (or omit to infer)");
    r.act_str = cfg.get_string("mlp.activation", "logistic");
    if (r.act_str == "logistic") r.act = Activation::logistic;
    else if (r.act_str == "tanh") r.act = Activation::tanh_act;
    else if (r.act_str == "identity") r.act = Activation::identity;
    else bad("mlp.activation: expected logistic|tanh|identity, got '" + r.act_str + "'");
    r.loss_str = cfg.get_string("mlp.loss",
                                r.problem == "mlp_autoencode" ? "squared" : "softmax_ce");
    if (r.loss_str == "squared") r.loss = MlpLoss::squared;
    else if (r.loss_str == "sigmoid_ce") r.loss = MlpLoss::sigmoid_cross_entropy;
    else if (r.loss_str == "softmax_ce") r.loss = MlpLoss::softmax_cross_entropy;
    else bad("mlp.loss: expected squared|sigmoid_ce|softmax_ce, got '" + r.loss_str + "'");
    if (r.problem == "mlp_autoencode" && r.loss == MlpLoss::softmax_cross_entropy)
      bad("mlp.loss: softmax_ce is a classification loss");
  }

  r.delta0 = getd("delta0", 10.0);
  if (!(r.delta0 > 0.0)) bad("delta0: want > 0");
  r.sigma0 = getd("sigma0", 1e-4);
  if (!(r.sigma0 > 0.0)) bad("sigma0: want > 0");
  r.alpha = getd("alpha", 0.05);
  if (!(r.alpha > 0.0)) bad("alpha: want > 0");
  r.momentum = getd("momentum", 0.9);
  if (!(r.momentum >= 0.0 && r.momentum < 1.0)) bad("momentum: want a value in [0,1)");
  r.batch_ratio = getd("batch_ratio", 0.01);
  if (!(r.batch_ratio > 0.0 && r.batch_ratio <= 1.0)) bad("batch_ratio: want a value in (0,1]");
  r.eta1 = getd("eta1", 1e-4);
  r.eta2 = getd("eta2", 0.8);
  if (!(r.eta1 > 0.0 && r.eta1 <= r.eta2 && r.eta2 < 1.0))
    bad("eta1/eta2: want 0 < eta1 <= eta2 < 1");
  r.gamma1 = getd("gamma1", 1.2);
  r.gamma2 = getd("gamma2", 2.0);
  if (!(r.gamma1 > 1.0 && r.gamma1 <= r.gamma2)) bad("gamma1/gamma2: want 1 < gamma1 <= gamma2");
  r.eps_g = getd("eps_g", 1e-5);
  if (!(r.eps_g > 0.0)) bad("eps_g: want > 0");
  r.eps_H = getd("eps_H", 1e-4);
  if (!(r.eps_H > 0.0)) bad("eps_H: want > 0");
  r.c1 = getd("c1", 1e-4);
  if (!(r.c1 > 0.0 && r.c1 < 1.0)) bad("c1: want a value in (0,1)");
  r.backtrack = getd("backtrack", 0.5);
  if (!(r.backtrack > 0.0 && r.backtrack < 1.0)) bad("backtrack: want a value in (0,1)");
  r.history = geti("history", 100);
  if (r.history < 1) bad("history: want >= 1");
  r.ls_max = geti("ls_max", 50);
  if (r.ls_max < 1) bad("ls_max: want >= 1");
  r.cg_max_iter = geti("cg_max_iter", 0);
  if (r.cg_max_iter < 0) bad("cg_max_iter: want >= 0 (0 uses the dimension)");
  r.lanczos_max_iter = geti("lanczos_max_iter", 250);
  if (r.lanczos_max_iter < 1) bad("lanczos_max_iter: want >= 1");
  r.lanczos_k = geti("lanczos_k", 20);
  if (r.lanczos_k < 1) bad("lanczos_k: want >= 1");
  r.max_iters = geti("max_iters", 2'000'000);
  if (r.max_iters < 1) bad("max_iters: want >= 1");
  r.eval_every = geti("eval_every", 0);
  if (r.eval_every < 0) bad("eval_every: want >= 0 (0 picks a cadence under 5% of budget)");
  r.full_reorth = getb("full_reorth", true);
  r.eval_errors = getb("eval_errors", true);
  r.budget = getu("budget", 10'000'000);
  if (r.budget == 0) bad("budget: want > 0");
  r.seed = getu("seed", 1);
  r.init_str = cfg.get_string("init", "zeros");
  try {
    std::tie(r.init, r.init_c) = parse_init_scheme(r.init_str);
  } catch (const std::exception& e) {
    bad(e.what());
  }
  r.out_dir = cfg.get_string("out", "runs");
  r.run_id = cfg.get_string("run_id", "");
  if (r.run_id.empty())
    r.run_id = r.algorithm + "_" + (r.problem.empty() ? "p" : r.problem) + "_s" +
               std::to_string(r.seed);
  else if (!id_ok(r.run_id))
    bad("run_id: only [A-Za-z0-9_.+-] characters are allowed");

  if (!errors.empty()) throw std::runtime_error(join_errors(errors));
  return r;
}

struct Built {
  std::unique_ptr<Oracle> train;
  std::unique_ptr<Oracle> test;
};

std::shared_ptr<DenseData> densify(const SparseDataset& ds, const Resolved& r,
                                   Index classes, const char* side) {
  auto D = std::make_shared<DenseData>();
  D->X = Matrix::Zero(ds.n, ds.d);
  for (Index i = 0; i < ds.n; ++i)
    for (Index p = ds.indptr[static_cast<std::size_t>(i)];
         p < ds.indptr[static_cast<std::size_t>(i) + 1]; ++p)
      D->X(i, ds.colind[static_cast<std::size_t>(p)]) = ds.values[static_cast<std::size_t>(p)];
  if (r.problem == "mlp_classify") {
    D->labels.resize(static_cast<std::size_t>(ds.n));
    for (Index i = 0; i < ds.n; ++i) {
      double y = ds.labels[static_cast<std::size_t>(i)];
      long long k = std::llround(y);
      if (static_cast<double>(k) != y || k < 0 || k >= classes)
        throw std::runtime_error(std::string(side) + " label " + std::to_string(y) +
                                 " at row " + std::to_string(i) +
                                 " is not a class id below " + std::to_string(classes));
      D->labels[static_cast<std::size_t>(i)] = static_cast<int>(k);
    }
  } else {
    D->targets = D->X;
    if (r.loss == MlpLoss::sigmoid_cross_entropy &&
        (D->X.minCoeff() < 0.0 || D->X.maxCoeff() > 1.0))
      throw std::runtime_error("mlp.loss sigmoid_ce needs reconstruction targets in [0,1]");
  }
  return D;
}

Built build_problem(Resolved& r) {
  SparseDataset train_ds = load_libsvm(r.train_path, r.data_dim);
  SparseDataset test_ds;
  bool have_test = false;
  if (!r.test_path.empty()) {
    test_ds = load_libsvm(r.test_path, r.data_dim);
    Index d = std::max(train_ds.d, test_ds.d);
    train_ds.d = test_ds.d = d;  // widening a CSR matrix is free
    have_test = true;
  } else if (r.test_fraction > 0.0) {
    auto parts = train_test_split(train_ds, r.test_fraction, r.split_seed);
    train_ds = std::move(parts.first);
    test_ds = std::move(parts.second);
    have_test = true;
  }
  binarize_labels(train_ds, r.labels);
  if (have_test) binarize_labels(test_ds, r.labels);

  Built b;
  if (r.problem == "nls") {
    b.train = std::make_unique<NLSOracle>(
        std::make_shared<const SparseDataset>(std::move(train_ds)));
    if (have_test)
      b.test = std::make_unique<NLSOracle>(
          std::make_shared<const SparseDataset>(std::move(test_ds)));
    return b;
  }

  Index classes = r.classes;
  if (r.problem == "mlp_classify" && classes == 0) {
    double top = -1.0;
    for (double y : train_ds.labels) top = std::max(top, y);
    classes = static_cast<Index>(std::llround(top)) + 1;
    if (classes < 2)
      throw std::runtime_error("mlp.classes: training labels span fewer than 2 classes");
    r.classes = classes;  // echoed so the trace records the inferred value
  }

  MlpSpec spec;
  spec.layers.push_back(train_ds.d);
  for (Index h : r.hidden) spec.layers.push_back(h);
  spec.layers.push_back(r.problem == "mlp_classify" ? classes : train_ds.d);
  for (std::size_t l = 0; l < r.hidden.size(); ++l) spec.act.push_back(r.act);
  spec.act.push_back(r.loss == MlpLoss::sigmoid_cross_entropy ? Activation::logistic
                                                              : Activation::identity);
  spec.loss = r.loss;
  spec.validate();

  b.train = std::make_unique<MlpOracle>(spec, densify(train_ds, r, classes, "train"));
  if (have_test)
    b.test = std::make_unique<MlpOracle>(spec, densify(test_ds, r, classes, "test"));
  return b;
}

void fill_common(SecondOrderCommon& c, const Resolved& r, const Oracle* test) {
  c.eta1 = r.eta1;
  c.eta2 = r.eta2;
  c.gamma1 = r.gamma1;
  c.gamma2 = r.gamma2;
  c.eps_g = r.eps_g;
  c.eps_H = r.eps_H;
  c.hessian = r.hessian;
  c.sample_ratio = r.sample_ratio;
  c.budget = r.budget;
  c.max_iters = r.max_iters;
  c.lanczos_k = r.lanczos_k;
  c.test_oracle = test;
  c.eval_errors = r.eval_errors;
}

MetaList build_meta(const Resolved& r) {
  MetaList meta;
  auto add = [&](const std::string& k, const std::string& v) { meta.emplace_back(k, v); };
  auto fd = [](double v) { return format_double(v); };
  add("version", kVersion);
  add("run_id", r.run_id);
  add("problem", r.problem);
  add("data.train", r.train_path);
  if (!r.test_path.empty()) add("data.test", r.test_path);
  if (r.test_fraction > 0.0) {
    add("data.test_fraction", fd(r.test_fraction));
    add("data.split_seed", std::to_string(r.split_seed));
  }
  add("data.labels", r.label_str);
  if (r.data_dim > 0) add("data.dim", std::to_string(r.data_dim));
  if (r.is_mlp()) {
    std::string hs;
    for (Index h : r.hidden) {
      if (!hs.empty()) hs += ",";
      hs += std::to_string(h);
    }
    add("mlp.hidden", hs);
    if (r.problem == "mlp_classify") add("mlp.classes", std::to_string(r.classes));
    add("mlp.activation", r.act_str);
    add("mlp.loss", r.loss_str);
  }
  add("algorithm", r.algorithm);
  if (r.second_order()) {
    add("hessian", r.hessian_str);
    if (r.hessian != HessianSource::full) add("sample_ratio", fd(r.sample_ratio));
    add("eta1", fd(r.eta1));
    add("eta2", fd(r.eta2));
    add("gamma1", fd(r.gamma1));
    add("gamma2", fd(r.gamma2));
    add("eps_g", fd(r.eps_g));
    add("eps_H", fd(r.eps_H));
    add("lanczos_k", std::to_string(r.lanczos_k));
    if (r.algorithm == "arc") {
      add("sigma0", fd(r.sigma0));
      add("lanczos_max_iter", std::to_string(r.lanczos_max_iter));
      add("full_reorth", r.full_reorth ? "true" : "false");
    } else {
      add("delta0", fd(r.delta0));
      add("cg_max_iter", std::to_string(r.cg_max_iter));
    }
  } else if (r.algorithm == "sgd") {
    add("alpha", fd(r.alpha));
    add("momentum", fd(r.momentum));
    add("batch_ratio", fd(r.batch_ratio));
    add("eval_every", std::to_string(r.eval_every));
  } else {
    add("history", std::to_string(r.history));
    add("c1", fd(r.c1));
    add("backtrack", fd(r.backtrack));
    add("ls_max", std::to_string(r.ls_max));
    add("eps_g", fd(r.eps_g));
  }
  add("init", r.init_str);
  add("seed", std::to_string(r.seed));
  add("budget", std::to_string(r.budget));
  add("max_iters", std::to_string(r.max_iters));
  add("eval_errors", r.eval_errors ? "true" : "false");
  return meta;
}

RunOutcome run_one(const ConfigMap& cfg, RunResult* captured) {
  Resolved r = resolve(cfg);
  Built built = build_problem(r);

  // Init draws come from a stream decoupled from the driver's seed use.
  Rng init_rng(r.seed ^ 0x5DEECE66DULL);
  Vector x0 = draw_init(built.train->dim(), r.init, r.init_c, init_rng);

  RunResult res;
  if (r.algorithm == "tr" || r.algorithm == "gn") {
    TrustRegionConfig c;
    fill_common(c, r, built.test.get());
    c.delta0 = r.delta0;
    c.cg_max_iter = r.cg_max_iter;
    res = r.algorithm == "tr" ? run_tr(*built.train, c, x0, r.seed)
                              : run_gauss_newton(*built.train, c, x0, r.seed);
  } else if (r.algorithm == "arc") {
    ArcConfig c;
    fill_common(c, r, built.test.get());
    c.sigma0 = r.sigma0;
    c.lanczos_max_iter = r.lanczos_max_iter;
    c.full_reorth = r.full_reorth;
    res = run_arc(*built.train, c, x0, r.seed);
  } else if (r.algorithm == "sgd") {
    SgdConfig c;
    c.alpha = r.alpha;
    c.momentum = r.momentum;
    c.batch_ratio = r.batch_ratio;
    c.budget = r.budget;
    c.max_iters = r.max_iters;
    c.eval_every = r.eval_every;
    c.test_oracle = built.test.get();
    c.eval_errors = r.eval_errors;
    res = run_sgd_momentum(*built.train, c, x0, r.seed);
  } else {
    LbfgsConfig c;
    c.history = r.history;
    c.c1 = r.c1;
    c.backtrack = r.backtrack;
    c.ls_max = r.ls_max;
    c.eps_g = r.eps_g;
    c.budget = r.budget;
    c.max_iters = r.max_iters;
    c.test_oracle = built.test.get();
    c.eval_errors = r.eval_errors;
    res = run_lbfgs(*built.train, c, x0, r.seed);
  }

  std::filesystem::create_directories(r.out_dir);
  std::string path = r.out_dir + "/" + r.run_id + ".csv";
  write_trace_file(path, build_meta(r), res);

  RunOutcome out;
  out.run_id = r.run_id;
  out.trace_path = path;
  out.status = res.status;
  out.final_loss = res.final_loss;
  out.props = res.normative.total();
  if (captured) *captured = std::move(res);
  return out;
}

std::string sanitize_token(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-')
               ? c
               : '-';
  return out;
}

std::string flatten(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == '\n' || c == '\r') c = ';';
  return out;
}

}  // namespace

RunOutcome run_experiment(const ConfigMap& cfg) { return run_one(cfg, nullptr); }

std::vector<RunOutcome> run_sweep(const ConfigMap& cfg, std::ostream* log) {
  struct Axis {
    std::string key;
    std::vector<std::string> values;
  };
  std::vector<Axis> axes;
  ConfigMap base;
  std::vector<std::string> errors;
  for (const auto& kv : cfg.entries()) {
    if (kv.first.rfind("sweep.", 0) == 0) {
      Axis ax;
      ax.key = kv.first.substr(6);
      ax.values = cfg.get_list(kv.first);
      if (!known_keys().count(ax.key))
        errors.push_back("'" + kv.first + "': unknown swept key");
      else if (ax.key == "out" || ax.key == "run_id")
        errors.push_back("'" + kv.first + "': cannot sweep " + ax.key);
      else
        axes.push_back(std::move(ax));
    } else {
      base.set(kv.first, kv.second);
    }
  }
  if (!errors.empty()) throw std::runtime_error(join_errors(errors));

  const std::string out_dir = base.get_string("out", "runs");
  const std::string base_id = base.get_string("run_id", "run");

  // Cartesian product in file order, last axis fastest. Any empty axis means
  // an empty sweep, which is still a success (header-only summary).
  std::vector<std::pair<ConfigMap, std::string>> combos;
  bool empty_axis = false;
  for (const Axis& ax : axes)
    if (ax.values.empty()) empty_axis = true;
  if (!empty_axis) {
    std::vector<std::size_t> idx(axes.size(), 0);
    bool more = true;
    while (more) {
      ConfigMap c = base;
      std::string id = base_id;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        const std::string& v = axes[a].values[idx[a]];
        c.set(axes[a].key, v);
        id += "_" + sanitize_token(axes[a].key) + "-" + sanitize_token(v);
      }
      if (!axes.empty()) c.set("run_id", id);
      combos.emplace_back(std::move(c), id);
      more = false;
      for (std::size_t a = axes.size(); a-- > 0;) {  // odometer, last axis fastest
        if (++idx[a] < axes[a].values.size()) {
          more = true;
          break;
        }
        idx[a] = 0;
      }
    }
  }

  {
    std::set<std::string> seen;
    std::vector<std::string> dups;
    for (const auto& combo : combos)
      if (!seen.insert(combo.second).second) dups.push_back("duplicate run id '" + combo.second + "'");
    if (!dups.empty()) throw std::runtime_error(join_errors(dups));
  }

  std::filesystem::create_directories(out_dir);
  std::vector<RunOutcome> outcomes;
  std::string rows;
  std::string failures;
  for (const auto& combo : combos) {
    RunResult rr;
    RunOutcome out;
    try {
      out = run_one(combo.first, &rr);
      for (const IterationRecord& rec : rr.records)
        rows += out.run_id + "," + record_row(rec) + "\n";
    } catch (const std::exception& e) {
      out.run_id = combo.second;
      out.status = RunStatus::aborted;
      out.error = e.what();
      failures += "# failed " + out.run_id + " = " + flatten(out.error) + "\n";
    }
    if (log) {
      *log << out.run_id << ": "
           << (out.error.empty() ? to_string(out.status) : "error") << ", props="
           << out.props << ", final_loss=" << format_double(out.final_loss);
      if (!out.error.empty()) *log << ", " << flatten(out.error);
      *log << "\n";
    }
    outcomes.push_back(std::move(out));
  }

  std::string spath = out_dir + "/summary.csv";
  std::ofstream s(spath, std::ios::binary);
  if (!s) throw std::runtime_error("cannot open " + spath);
  s << "run_id," << kTraceHeader << "\n" << rows << failures;
  return outcomes;
}

}  // namespace curvopt
