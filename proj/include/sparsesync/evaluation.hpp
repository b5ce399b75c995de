#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsesync/joint_estimator.hpp"
#include "sparsesync/signal_model.hpp"

namespace sparsesync {

// Mean squared error over trials; vector errors are summed over components.
double mse(const std::vector<double>& estimates, const std::vector<double>& truths);
double mse(const std::vector<double>& estimates, double truth);
double mse(const std::vector<CVector>& estimates, const std::vector<CVector>& truths);
double mse(const std::vector<CVector>& estimates, const CVector& truth);

/// Fraction of trials with |theta_hat - theta| >= p.
double timing_failure_prob(const std::vector<int>& theta_hats, int theta_true, int p);
double timing_failure_prob(const std::vector<int>& theta_hats, const std::vector<int>& truths, int p);

struct CrlbOptions {
  double eps_step = 1e-6;
  double eta_step = 1e-8;
  /// Treat (eps, eta, theta) as known; only the channel block is bounded.
  bool known_sync = false;
};

struct CrlbResult {
  double crlb_eps = 0.0;  // NaN when known_sync
  double crlb_eta = 0.0;  // NaN when known_sync
  double trace_crlb_h = 0.0;
};

class SingularFisherError : public std::runtime_error {
 public:
  SingularFisherError(const std::string& direction)
      : std::runtime_error("Fisher information is singular along " + direction), direction_(direction) {}
  const std::string& direction() const { return direction_; }

 private:
  std::string direction_;
};

/// Gaussian-model bound for the full received vector r = A1 h + w over the
/// real parameters (eps, eta, Re h_S, Im h_S), S the channel support.
/// d mu / d(eps, eta) by central differences, d mu / d h exactly.
CrlbResult numerical_crlb(const SystemConfig& cfg, const PilotBlock& pilots, const ImpairmentParams& params,
                          const SparseChannel& h, double sigma_sq, const CrlbOptions& opts = {});

enum class TruthMode { on_grid, reference, random };
enum class PilotMode { fixed, per_trial };
enum class SelectionMode { per_trial, fixed };

inline constexpr ImpairmentParams kReferenceImpairments{0.102, 1.01e-4, 2};

struct SweepSettings {
  SystemConfig system;
  GridSpec grids;
  std::vector<double> snr_db;
  int trials = 100;
  int samples_per_rx = 45;
  std::vector<ChannelEstimator> estimators{ChannelEstimator::subspace_pursuit, ChannelEstimator::least_squares};
  TruthMode truth_mode = TruthMode::on_grid;
  PilotMode pilot_mode = PilotMode::fixed;
  SelectionMode selection_mode = SelectionMode::per_trial;
  SupportMode channel_support = SupportMode::anchored;
  bool noiseless = false;
  int timing_p = 2;
  std::uint64_t master_seed = 1;
  int workers = 0;

  /// Offset added to signed theta values so the estimator window starts at 0.
  int theta_shift() const { return grids.theta.min < 0 ? -grids.theta.min : 0; }
  bool runs(ChannelEstimator e) const;
  void validate() const;
};

struct EstimatorOutcome {
  bool ok = false;
  std::string error;
  EstimationResult result;
  double wall_seconds = 0.0;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  int trial = 0;
  double snr_db = 0.0;
  double sigma_sq = 0.0;
  ImpairmentParams truth;  // signed theta, as configured
  CVector h_true;
  std::optional<EstimatorOutcome> mlsp;
  std::optional<EstimatorOutcome> mlls;
  std::optional<CrlbResult> crlb;

  const std::optional<EstimatorOutcome>& outcome(ChannelEstimator e) const {
    return e == ChannelEstimator::subspace_pursuit ? mlsp : mlls;
  }
  std::optional<EstimatorOutcome>& outcome(ChannelEstimator e) {
    return e == ChannelEstimator::subspace_pursuit ? mlsp : mlls;
  }
};

struct EstimatorStats {
  int succeeded = 0;
  int failed = 0;
  double mse_eps = 0.0;
  double mse_eta = 0.0;
  double mse_theta = 0.0;
  double mse_h = 0.0;
  double ptf = 0.0;
  // Standard errors of the MSE means.
  double se_eps = 0.0;
  double se_eta = 0.0;
  double se_h = 0.0;
  double mean_wall_seconds = 0.0;
};

struct SweepRow {
  double snr_db = 0.0;
  int trials = 0;
  std::optional<EstimatorStats> mlsp;
  std::optional<EstimatorStats> mlls;
  double crlb_eps = 0.0;
  double crlb_eta = 0.0;
  double crlb_h = 0.0;
  int crlb_count = 0;

  const std::optional<EstimatorStats>& stats(ChannelEstimator e) const {
    return e == ChannelEstimator::subspace_pursuit ? mlsp : mlls;
  }
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  std::vector<std::vector<TrialRecord>> records;  // [snr][trial]
};

/// Reduces the records of one SNR point in trial order.
SweepRow aggregate(const std::vector<TrialRecord>& records, int timing_p);

/// Runs every trial at every SNR. Trial draws depend only on (master_seed,
/// trial) so SNR points share channels and noise shapes; results are
/// independent of the worker count.
SweepSummary monte_carlo_sweep(const SweepSettings& settings);

/// One trial at one SNR; the building block of the sweep.
TrialRecord run_trial(const SweepSettings& settings, int trial, double snr_db, int estimator_workers = 1);

struct ComplexityRow {
  int dimension = 0;  // L_m N_T N_R
  int sparsity = 0;   // K per pair
  double sp_seconds = 0.0;
  double ls_seconds = 0.0;
};

/// Mean wall time of one channel-estimation call per method. SP runs on
/// sp_samples_per_rx samples per antenna; LS runs on the smallest determined
/// system, L_m N_T samples per antenna (capped at N).
std::vector<ComplexityRow> complexity_trend(const std::vector<SystemConfig>& cfg_list, int reps,
                                            int sp_samples_per_rx, std::uint64_t seed = 7);

const char* truth_mode_name(TruthMode m);
const char* pilot_mode_name(PilotMode m);
const char* selection_mode_name(SelectionMode m);
const char* support_mode_name(SupportMode m);

}  // namespace sparsesync
