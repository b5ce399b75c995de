// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Run a single criterion with `acceptance <n>`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "sparsesync/evaluation.hpp"
#include "sparsesync/report.hpp"
#include "sparsesync/seeding.hpp"
#include "sparsesync/sparse_recovery.hpp"

using namespace sparsesync;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kModelRelTol = 1e-9;
constexpr double kModelSeconds = 10.0;
constexpr double kSpSupportRate = 0.95;
constexpr double kSpRelTol = 1e-8;
constexpr double kSpSeconds = 120.0;
constexpr double kExactChannelRelTol = 1e-6;
constexpr double kMllsFailRelErr = 0.1;
constexpr double kMllsFailRate = 0.90;
constexpr double kCrlbFloorFactor = 0.5;
constexpr double kGapMinDb = 6.0;
constexpr double kGapMaxDb = 24.0;
constexpr double kLsMinRatio = 4.0;
constexpr double kSpMaxRatio = 3.0;

constexpr std::uint64_t kSweepSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_error(const CVector& est, const CVector& truth) { return (est - truth).norm() / truth.norm(); }

// 1. A1 h == A2 h_theta.
Outcome model_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> eps(-0.5, 0.5), eta(-5e-3, 5e-3);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    SystemConfig c;
    c.n_subcarriers = std::uniform_int_distribution<int>(16, 128)(rng);
    c.n_tx = std::uniform_int_distribution<int>(1, 2)(rng);
    c.n_rx = std::uniform_int_distribution<int>(1, 2)(rng);
    c.channel_length = std::uniform_int_distribution<int>(2, c.n_subcarriers / 4)(rng);
    c.theta_max = std::uniform_int_distribution<int>(0, 6)(rng);
    c.sparsity = std::uniform_int_distribution<int>(1, c.channel_length)(rng);
    c.cp_len = c.channel_length + c.theta_max + 1;
    const PilotBlock pilots = PilotBlock::qpsk(c.n_subcarriers, c.n_tx, rng());
    const SparseChannel h = generate_channel(c, rng());
    const ImpairmentParams p{eps(rng), eta(rng), std::uniform_int_distribution<int>(0, c.theta_max)(rng)};
    const CVector lhs = assemble_a1(c, pilots, p) * h.taps;
    const CVector rhs = assemble_a2(c, pilots, p.epsilon, p.eta) * embed_ste(h, p.theta, c).taps;
    worst = std::max(worst, (lhs - rhs).norm() / lhs.norm());
  }
  const double secs = seconds_since(t0);
  return {worst <= kModelRelTol && secs < kModelSeconds,
          "max rel diff " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// 2. Subspace pursuit against exhaustive support search.
Outcome sp_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  int matched = 0;
  double worst = 0.0;
  const int instances = 200;
  for (int i = 0; i < instances; ++i) {
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    const oracle::Planted inst = oracle::planted_instance(20, 40, k, rng());
    const CMatrix& a = inst.a;
    const CVector r = a * inst.x;

    const PursuitResult sp = subspace_pursuit(a, r, k);
    const oracle::SupportSearch best = oracle::exhaustive_support(a, r, k);
    std::vector<Index> got(sp.support.begin(), sp.support.end());
    std::sort(got.begin(), got.end());
    if (got == best.support) {
      ++matched;
      CVector full = CVector::Zero(40);
      for (int j = 0; j < k; ++j) full(best.support[std::size_t(j)]) = best.coeffs(j);
      worst = std::max(worst, rel_error(sp.h_hat, full));
    }
  }
  const double secs = seconds_since(t0);
  const double rate = double(matched) / instances;
  return {rate >= kSpSupportRate && worst <= kSpRelTol && secs < kSpSeconds,
          "support match " + std::to_string(matched) + "/200, max rel err " + fmt("%.2e", worst) + ", " +
              fmt("%.1f", secs) + " s"};
}

struct NoiselessCase {
  SystemConfig cfg;
  PilotBlock pilots;
  SparseChannel h;
  ImpairmentParams truth;
  GridSpec grid;
};

// Default system, truth snapped to the centre of an 11 x 11 grid around the
// reference offsets.
NoiselessCase noiseless_case(std::uint64_t seed) {
  NoiselessCase c{SystemConfig{}, PilotBlock::qpsk(128, 2, derive_seed(seed, {1})), {}, {}, {}};
  c.grid = {{kReferenceImpairments.epsilon - 0.05, kReferenceImpairments.epsilon + 0.05, 0.01},
            {kReferenceImpairments.eta - 5e-4, kReferenceImpairments.eta + 5e-4, 1e-4},
            {0, c.cfg.theta_max, 1}};
  c.truth = {c.grid.eps.value(5), c.grid.eta.value(5), kReferenceImpairments.theta};
  c.h = generate_channel(c.cfg, derive_seed(seed, {2}), SupportMode::anchored);
  return c;
}

// 3. Noiseless recovery.
Outcome noiseless_recovery() {
  int sp_exact = 0, ls_fail = 0, ls75_exact = 0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const NoiselessCase c = noiseless_case(std::uint64_t(s));
    const CVector r = assemble_a1(c.cfg, c.pilots, c.truth) * c.h.taps;
    const MeasurementSelection sel45 = select_samples(c.cfg, 45, derive_seed(std::uint64_t(s), {3}));
    const CVector r45 = row_subsample(r, sel45);

    const EstimationResult sp = mlsp(r45, sel45, c.grid, c.cfg, c.pilots);
    if (sp.epsilon_hat == c.truth.epsilon && sp.eta_hat == c.truth.eta && sp.theta_hat == c.truth.theta &&
        rel_error(sp.h_hat, c.h.taps) <= kExactChannelRelTol)
      ++sp_exact;
    const EstimationResult ls = mlls(r45, sel45, c.grid, c.cfg, c.pilots);
    if (rel_error(ls.h_hat, c.h.taps) > kMllsFailRelErr) ++ls_fail;

    const MeasurementSelection sel75 = select_samples(c.cfg, 75, derive_seed(std::uint64_t(s), {4}));
    const EstimationResult ls75 = mlls(row_subsample(r, sel75), sel75, c.grid, c.cfg, c.pilots);
    if (ls75.epsilon_hat == c.truth.epsilon && ls75.eta_hat == c.truth.eta && ls75.theta_hat == c.truth.theta &&
        rel_error(ls75.h_hat, c.h.taps) <= kExactChannelRelTol)
      ++ls75_exact;
  }
  return {sp_exact == seeds && ls_fail >= kMllsFailRate * seeds && ls75_exact == seeds,
          "MLSP M=45 exact " + std::to_string(sp_exact) + "/50, MLLS M=45 rel err > 0.1 in " +
              std::to_string(ls_fail) + "/50, MLLS M=75 exact " + std::to_string(ls75_exact) + "/50"};
}

SweepSettings sweep_settings(int trials) {
  SweepSettings s;
  s.grids = {{-0.05, 0.05, 0.01}, {-5e-4, 5e-4, 1e-4}, {0, 5, 1}};
  s.snr_db = {0.0, 10.0, 20.0, 30.0};
  s.trials = trials;
  s.samples_per_rx = 45;
  s.truth_mode = TruthMode::random;
  s.master_seed = kSweepSeed;
  s.workers = 0;
  return s;
}

const SweepSummary& shared_sweep() {
  static const SweepSummary summary = [] {
    const auto t0 = std::chrono::steady_clock::now();
    SweepSummary s = monte_carlo_sweep(sweep_settings(200));
    std::printf("  (sweep: 4 SNR points x 200 trials in %.0f s)\n", seconds_since(t0));
    for (const SweepRow& r : s.rows)
      std::printf("  snr %4.0f: mse_eps %.3e/%.3e crlb %.3e | mse_eta %.3e/%.3e crlb %.3e | mse_h %.3e/%.3e | "
                  "ptf %.3f/%.3f\n",
                  r.snr_db, r.mlsp->mse_eps, r.mlls->mse_eps, r.crlb_eps, r.mlsp->mse_eta, r.mlls->mse_eta,
                  r.crlb_eta, r.mlsp->mse_h, r.mlls->mse_h, r.mlsp->ptf, r.mlls->ptf);
    std::fflush(stdout);
    return s;
  }();
  return summary;
}

// Consecutive SNR points with a pooled one-standard-error allowance.
bool decreasing(const std::vector<double>& m, const std::vector<double>& se) {
  for (std::size_t i = 0; i + 1 < m.size(); ++i)
    if (m[i + 1] > m[i] + std::hypot(se[i], se[i + 1])) return false;
  return true;
}

// 4. MSE trends over SNR, on the first 100 trials. Trial draws depend only
// on the trial index, so this is the 100-trial sweep.
Outcome mse_trends() {
  const SweepSummary& full = shared_sweep();
  std::vector<SweepRow> rows;
  for (const auto& recs : full.records)
    rows.push_back(aggregate(std::vector<TrialRecord>(recs.begin(), recs.begin() + 100), 2));
  std::vector<double> e, ese, n, nse, h, hse, l, lse;
  for (const SweepRow& r : rows) {
    if (!r.mlsp || !r.mlls || r.mlsp->failed || r.mlls->failed) return {false, "estimator failures in sweep"};
    e.push_back(r.mlsp->mse_eps);
    ese.push_back(r.mlsp->se_eps);
    n.push_back(r.mlsp->mse_eta);
    nse.push_back(r.mlsp->se_eta);
    h.push_back(r.mlsp->mse_h);
    hse.push_back(r.mlsp->se_h);
  }
  std::string ls_detail;
  for (std::size_t i = 1; i < rows.size(); ++i) {  // 10 dB onwards
    l.push_back(rows[i].mlls->mse_h);
    lse.push_back(rows[i].mlls->se_h);
    ls_detail += (i > 1 ? ", " : " (") + fmt("%.2f", l.back()) + " +- " + fmt("%.2f", lse.back());
  }
  ls_detail += ")";
  bool ls_ok = true;
  for (std::size_t i = 0; i + 1 < l.size(); ++i)
    if (l[i + 1] < l[i] - std::hypot(lse[i], lse[i + 1])) ls_ok = false;
  const bool de = decreasing(e, ese), dn = decreasing(n, nse), dh = decreasing(h, hse);
  return {de && dn && dh && ls_ok, std::string("MLSP eps ") + (de ? "ok" : "bad") + ", eta " + (dn ? "ok" : "bad") +
                                       ", channel " + (dh ? "ok" : "bad") + "; MLLS channel beyond 10 dB " +
                                       (ls_ok ? "ok" : "bad") + ls_detail + "; 100 trials"};
}

// 5. Timing failure probability.
Outcome timing_failures() {
  const SweepSummary& s = shared_sweep();
  bool ok = true;
  std::string detail;
  for (const SweepRow& r : s.rows) {
    if (r.snr_db < 20.0) continue;
    ok = ok && r.mlsp->ptf <= r.mlls->ptf;
    detail += fmt("%.0f dB: ", r.snr_db) + fmt("%.3f", r.mlsp->ptf) + " vs " + fmt("%.3f", r.mlls->ptf) + "; ";
  }
  return {ok, detail + "200 trials"};
}

// 6. MLSP against the CRLB.
Outcome crlb_gap() {
  const SweepSummary& s = shared_sweep();
  bool ok = true;
  std::string detail;
  for (const SweepRow& r : s.rows) {
    if (r.snr_db < 20.0) continue;
    ok = ok && r.mlsp->mse_eps > kCrlbFloorFactor * r.crlb_eps && r.mlsp->mse_eta > kCrlbFloorFactor * r.crlb_eta;
    if (r.snr_db == 30.0) {
      const double ge = 10.0 * std::log10(r.mlsp->mse_eps / r.crlb_eps);
      const double gn = 10.0 * std::log10(r.mlsp->mse_eta / r.crlb_eta);
      ok = ok && ge >= kGapMinDb && ge <= kGapMaxDb && gn >= kGapMinDb && gn <= kGapMaxDb;
      detail = "30 dB gap eps " + fmt("%.1f", ge) + " dB, eta " + fmt("%.1f", gn) + " dB";
    }
  }
  return {ok, detail};
}

// 7. Complexity trend.
Outcome complexity() {
  const auto rows = complexity_trend(bench_configs(SystemConfig{}), 30, 45);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double ls = rows[i + 1].ls_seconds / rows[i].ls_seconds;
    const double sp = rows[i + 1].sp_seconds / rows[i].sp_seconds;
    ok = ok && ls >= kLsMinRatio && sp <= kSpMaxRatio;
    detail += std::to_string(rows[i].dimension) + "->" + std::to_string(rows[i + 1].dimension) + ": LS x" +
              fmt("%.2f", ls) + ", SP x" + fmt("%.2f", sp) + "; ";
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. Byte-identical artifacts for 1 and 4 workers.
Outcome determinism() {
  ExperimentConfig cfg;
  cfg.sweep = sweep_settings(6);
  const fs::path base = fs::temp_directory_path() / "sparsesync-acceptance";
  fs::remove_all(base);
  std::ostringstream log;
  std::vector<std::string> runs;
  for (int workers : {1, 4}) {
    cfg.sweep.workers = workers;
    const fs::path dir = base / std::to_string(workers);
    if (run_sweep(cfg, dir.string(), log) != 0) return {false, log.str()};
    std::string all;
    for (const std::string& f : kSweepCsvFiles) all += slurp(dir / f);
    runs.push_back(all);
  }
  fs::remove_all(base);
  return {runs[0] == runs[1] && !runs[0].empty(), runs[0] == runs[1] ? "CSVs identical" : "CSVs differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"model consistency", model_consistency},
      {"subspace pursuit vs exhaustive oracle", sp_oracle},
      {"noiseless recovery", noiseless_recovery},
      {"MSE trends over SNR", mse_trends},
      {"timing failure MLSP <= MLLS", timing_failures},
      {"MLSP vs CRLB", crlb_gap},
      {"complexity trend", complexity},
      {"determinism across workers", determinism},
  };
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!which.empty() && std::find(which.begin(), which.end(), int(i) + 1) == which.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
