// Command-line front end: sweep, single, bench, validate.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sparsesync/experiment_config.hpp"
#include "sparsesync/report.hpp"

using namespace sparsesync;

namespace {

std::optional<ExperimentConfig> load_or_report(const std::string& path) {
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint CFO/SFO/STE and sparse channel estimation for MIMO-OFDM"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = -1;

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo SNR sweep; writes CSV artifacts");
  sweep->add_option("config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "output directory (overrides config and $SPARSESYNC_OUTPUT_DIR)");
  sweep->add_option("--workers", workers, "worker threads (0 = all cores)");
  std::optional<int> trials;
  sweep->add_option("--trials", trials, "override trial count");

  double snr = 0.0;
  std::uint64_t seed = 1;
  bool noiseless = false;
  auto* single = app.add_subcommand("single", "run one trial and print the estimates");
  single->add_option("config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  single->add_option("--snr", snr, "SNR in dB")->required();
  single->add_option("--seed", seed, "trial seed")->required();
  single->add_flag("--noiseless", noiseless, "synthesize without noise");
  single->add_option("--workers", workers, "worker threads for the grid search (0 = all cores)");

  int reps = 20;
  auto* bench = app.add_subcommand("bench", "time SP vs LS channel estimation across channel sizes");
  bench->add_option("config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  bench->add_option("--reps", reps, "timed repetitions per configuration")->check(CLI::PositiveNumber);
  bench->add_option("--out", out_dir, "output directory");

  auto* validate = app.add_subcommand("validate", "parse and validate a config, echoing resolved values");
  validate->add_option("config", config_path, "experiment config file")->required();

  CLI11_PARSE(app, argc, argv);

  auto cfg = load_or_report(config_path);
  if (!cfg) return 1;
  if (workers >= 0) cfg->sweep.workers = workers;
  if (!out_dir.empty()) cfg->output_dir = out_dir;

  if (*validate) {
    std::cout << write_config(*cfg);
    std::cout << "# output directory: " << resolve_output_dir(*cfg) << "\n";
    return 0;
  }
  if (*sweep) {
    if (trials) cfg->sweep.trials = *trials;
    try {
      validate_config(*cfg, config_path);
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    return run_sweep(*cfg, resolve_output_dir(*cfg), std::cout);
  }
  if (*single) {
    if (noiseless) cfg->sweep.noiseless = true;
    return run_single(*cfg, snr, seed, std::cout);
  }
  return run_bench(*cfg, reps, resolve_output_dir(*cfg), std::cout);
}
