#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sparsesync/report.hpp"

using namespace sparsesync;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c = parse_config(
      "eps_grid = -0.01, 0.01, 0.01\n"
      "eta_grid = -1e-4, 1e-4, 1e-4\n"
      "snr_db = 10, 30\n"
      "trials = 2\n"
      "workers = 1\n");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sparsesync-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("csv headers") {
  const std::vector<ChannelEstimator> both{ChannelEstimator::least_squares, ChannelEstimator::subspace_pursuit};
  CHECK(csv_header("mse_cfo.csv", both) == "snr_db,mlsp,mlls,crlb,trials");
  CHECK(csv_header("mse_sfo.csv", both) == "snr_db,mlsp,mlls,crlb,trials");
  CHECK(csv_header("mse_channel.csv", both) == "snr_db,mlsp,mlls,crlb_trace,trials");
  CHECK(csv_header("ptf.csv", both) == "snr_db,mlsp,mlls,trials");
  CHECK(csv_header("mse_cfo.csv", {ChannelEstimator::subspace_pursuit}) == "snr_db,mlsp,crlb,trials");
  CHECK_THROWS(csv_header("other.csv", both));
}

TEST_CASE("csv rows") {
  SweepSettings s;
  s.estimators = {ChannelEstimator::subspace_pursuit};
  SweepSummary summary;
  SweepRow row;
  row.snr_db = 20.0;
  row.trials = 4;
  row.mlsp = EstimatorStats{};
  row.mlsp->mse_eps = 1.25e-5;
  row.mlsp->ptf = 0.25;
  row.crlb_eps = 3.0e-7;
  row.crlb_h = std::nan("");
  summary.rows.push_back(row);
  CHECK(csv_contents("mse_cfo.csv", summary, s) == "snr_db,mlsp,crlb,trials\n20,1.250000000e-05,3.000000000e-07,4\n");
  CHECK(csv_contents("ptf.csv", summary, s) == "snr_db,mlsp,trials\n20,2.500000000e-01,4\n");
  CHECK(csv_contents("mse_channel.csv", summary, s) == "snr_db,mlsp,crlb_trace,trials\n20,0.000000000e+00,,4\n");
}

TEST_CASE("sweep artifacts are complete and reproducible") {
  const ExperimentConfig c = tiny_config();
  const fs::path a = scratch("a"), b = scratch("b");
  std::ostringstream log;
  REQUIRE(run_sweep(c, a.string(), log) == 0);
  REQUIRE(run_sweep(c, b.string(), log) == 0);
  for (const std::string& f : kSweepCsvFiles) {
    const std::string text = slurp(a / f);
    CHECK(text == slurp(b / f));
    CHECK(text.find('\r') == std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.rfind(csv_header(f, c.sweep.estimators) + "\n", 0) == 0);
  }
  const std::string meta = slurp(a / "meta.txt");
  CHECK(meta.find("trials = 2") != std::string::npos);
  CHECK(meta.find("master_seed = 1") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("single noiseless on-grid trial recovers the truth") {
  ExperimentConfig c = tiny_config();
  c.sweep.noiseless = true;
  std::ostringstream out;
  REQUIRE(run_single(c, 20.0, 5, out) == 0);
  const std::string text = out.str();
  CHECK(text.find("warning: MLLS is under-determined: M*N_R = 90 < 104") != std::string::npos);

  SweepSettings s = c.sweep;
  s.master_seed = 5;
  const TrialRecord r = run_trial(s, 0, 20.0);
  CHECK(r.mlsp->result.epsilon_hat == r.truth.epsilon);
  CHECK(r.mlsp->result.eta_hat == r.truth.eta);
  CHECK(r.mlsp->result.theta_hat == r.truth.theta);

  c.sweep.samples_per_rx = 60;
  std::ostringstream quiet;
  c.sweep.estimators = {ChannelEstimator::subspace_pursuit};
  REQUIRE(run_single(c, 20.0, 5, quiet) == 0);
  CHECK(quiet.str().find("warning") == std::string::npos);
}

TEST_CASE("unwritable output directory is an error") {
  const fs::path blocker = scratch("blocker");
  { std::ofstream(blocker) << "x"; }
  std::ostringstream log;
  ExperimentConfig c = tiny_config();
  c.sweep.trials = 1;
  c.sweep.snr_db = {10.0};
  CHECK(run_sweep(c, (blocker / "sub").string(), log) != 0);
  CHECK(log.str().find("error:") != std::string::npos);
  fs::remove_all(blocker);
}

TEST_CASE("bench configurations double the channel length") {
  const auto cfgs = bench_configs(SystemConfig{});
  REQUIRE(cfgs.size() == 3);
  CHECK(cfgs[0].channel_size() == 52);
  CHECK(cfgs[1].channel_size() == 104);
  CHECK(cfgs[2].channel_size() == 208);
  for (const SystemConfig& c : cfgs) CHECK_NOTHROW(c.validate());
}
