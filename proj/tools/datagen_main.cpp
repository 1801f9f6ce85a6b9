#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "curvopt/data_io.hpp"
#include "curvopt/synth.hpp"
#include "curvopt/version.hpp"

// Emits the synthetic classification pair used by the desk-scale experiments
// as LIBSVM files, so every run stays file-based and reproducible.
int main(int argc, char** argv) {
  CLI::App app{"write synthetic LIBSVM train/test files"};
  app.set_version_flag("--version", curvopt::kVersion);

  curvopt::SynthClassConfig cfg;
  std::string out_dir = "data";
  std::string stem = "synth";
  bool gz = false;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--stem", stem, "file stem (<stem>_train.libsvm, <stem>_test.libsvm)");
  app.add_option("--n-train", cfg.n_train)->check(CLI::PositiveNumber);
  app.add_option("--n-test", cfg.n_test)->check(CLI::PositiveNumber);
  app.add_option("--dim", cfg.d)->check(CLI::PositiveNumber);
  app.add_option("--nnz", cfg.nnz_per_row, "nonzeros per row")->check(CLI::PositiveNumber);
  app.add_option("--margin-scale", cfg.margin_scale)->check(CLI::PositiveNumber);
  app.add_option("--logit-offset", cfg.logit_offset,
                 "class-prior shift (0 = balanced; default skews to ~1 positive in 4)");
  app.add_option("--seed", cfg.seed);
  app.add_flag("--gzip", gz, "compress the outputs (.gz suffix)");

  CLI11_PARSE(app, argc, argv);

  try {
    curvopt::SynthPair pair = curvopt::synth_classification(cfg);
    std::filesystem::create_directories(out_dir);
    const std::string ext = gz ? ".libsvm.gz" : ".libsvm";
    const std::string train_path = out_dir + "/" + stem + "_train" + ext;
    const std::string test_path = out_dir + "/" + stem + "_test" + ext;
    curvopt::write_libsvm_file(pair.train, train_path, gz);
    curvopt::write_libsvm_file(pair.test, test_path, gz);
    std::cout << "wrote " << train_path << " (" << pair.train.n << " x " << pair.train.d
              << ")\nwrote " << test_path << " (" << pair.test.n << " x " << pair.test.d
              << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
