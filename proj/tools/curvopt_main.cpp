#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "curvopt/harness.hpp"
#include "curvopt/trace.hpp"
#include "curvopt/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"matrix-free second-order optimization experiments"};
  app.set_version_flag("--version", curvopt::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  // Flags carry the raw text into the config layer so values round-trip
  // exactly; the harness owns all range checks and reports them together.
  std::string algorithm, hessian, sample_ratio, delta0, sigma0, alpha, init, seed,
      budget, out_dir;

  CLI::App* run = app.add_subcommand("run", "execute one experiment, write its trace");
  run->add_option("--config", config_path, "key = value experiment file")->required();
  CLI::Option* o_alg = run->add_option("--algorithm", algorithm)
                           ->check(CLI::IsMember({"tr", "arc", "sgd", "lbfgs", "gn"}));
  CLI::Option* o_hes = run->add_option("--hessian", hessian)
                           ->check(CLI::IsMember({"full", "uniform", "nonuniform"}));
  CLI::Option* o_rat = run->add_option("--sample-ratio", sample_ratio)->check(CLI::Number);
  CLI::Option* o_del = run->add_option("--delta0", delta0)->check(CLI::Number);
  CLI::Option* o_sig = run->add_option("--sigma0", sigma0)->check(CLI::Number);
  CLI::Option* o_alp = run->add_option("--alpha", alpha)->check(CLI::Number);
  o_del->excludes(o_sig)->excludes(o_alp);
  o_sig->excludes(o_alp);
  CLI::Option* o_ini = run->add_option("--init", init, "zeros|normal|normalized|scaled:C");
  CLI::Option* o_sed = run->add_option("--seed", seed)->check(CLI::Number);
  CLI::Option* o_bud = run->add_option("--budget", budget, "propagation budget")
                           ->check(CLI::Number);
  CLI::Option* o_out = run->add_option("--out", out_dir, "trace directory");

  CLI::App* sweep = app.add_subcommand("sweep", "expand sweep.* axes, run the grid");
  std::string sweep_config;
  sweep->add_option("--config", sweep_config, "experiment file with sweep.* axes")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      curvopt::ConfigMap cfg = curvopt::ConfigMap::parse_file(config_path);
      if (o_alg->count()) cfg.set("algorithm", algorithm);
      if (o_hes->count()) cfg.set("hessian", hessian);
      if (o_rat->count()) cfg.set("sample_ratio", sample_ratio);
      if (o_del->count()) cfg.set("delta0", delta0);
      if (o_sig->count()) cfg.set("sigma0", sigma0);
      if (o_alp->count()) cfg.set("alpha", alpha);
      if (o_ini->count()) cfg.set("init", init);
      if (o_sed->count()) cfg.set("seed", seed);
      if (o_bud->count()) cfg.set("budget", budget);
      if (o_out->count()) cfg.set("out", out_dir);
      curvopt::RunOutcome r = curvopt::run_experiment(cfg);
      std::cout << r.run_id << ": " << curvopt::to_string(r.status)
                << ", props=" << r.props
                << ", final_loss=" << curvopt::format_double(r.final_loss) << "\n"
                << "wrote " << r.trace_path << "\n";
    } else {
      curvopt::ConfigMap cfg = curvopt::ConfigMap::parse_file(sweep_config);
      std::vector<curvopt::RunOutcome> rs = curvopt::run_sweep(cfg, &std::cout);
      std::size_t failed = 0;
      for (const curvopt::RunOutcome& r : rs)
        if (!r.error.empty()) ++failed;
      std::cout << rs.size() << " run" << (rs.size() == 1 ? "" : "s") << ", " << failed
                << " failed\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
