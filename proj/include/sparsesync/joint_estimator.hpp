#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsesync/signal_model.hpp"
#include "sparsesync/sparse_recovery.hpp"

namespace sparsesync {

/// Inclusive real grid min, min + step, ..., with floor((max - min) / step) + 1 points.
struct RealAxis {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::size_t count() const;
  /// min + i * step; nested grids with step / 2 reproduce every point bit-exactly.
  double value(std::size_t i) const { return min + static_cast<double>(i) * step; }
  void validate(const std::string& name) const;

  bool operator==(const RealAxis&) const = default;
};

struct IntAxis {
  int min = 0;
  int max = 0;
  int step = 1;

  std::size_t count() const { return static_cast<std::size_t>((max - min) / step) + 1; }
  int value(std::size_t i) const { return min + static_cast<int>(i) * step; }
  void validate(const std::string& name) const;

  bool operator==(const IntAxis&) const = default;
};

struct GridSpec {
  RealAxis eps;
  RealAxis eta;
  IntAxis theta;

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

struct EstimationResult {
  double epsilon_hat = 0.0;
  double eta_hat = 0.0;
  int theta_hat = 0;
  CVector h_hat;
  double min_cost_j1 = 0.0;
  double min_cost_j2 = 0.0;
  std::size_t j1_evals = 0;
  std::size_t j2_evals = 0;
  /// Grid points whose channel sub-solve failed (cost recorded as +inf).
  std::size_t failed_points = 0;
  /// J1 over (eps, eta), eps-major; J2 over theta. Empty unless requested.
  std::vector<double> j1_costs;
  std::vector<double> j2_costs;
};

enum class ChannelEstimator { subspace_pursuit, least_squares };

struct EstimatorOptions {
  int workers = 1;
  int max_iter = 0;  // SP iteration cap; 0 selects K_total + 10
  double rank_tol = kDefaultRankTol;
  bool keep_cost_tables = true;
};

/// Raised when every grid point of a stage failed.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (r - A h)^H (r - A h).
double residual_cost(const CMatrix& a, const CVector& h, const CVector& r);

/// Two-stage grid search: (eps, eta) by J1 on the embedded model, then theta
/// by J2 at the selected (eps, eta). The per-point channel estimate comes from
/// `method`.
EstimationResult joint_estimate(ChannelEstimator method, const CVector& r_u, const MeasurementSelection& sel,
                                const GridSpec& grids, const SystemConfig& cfg, const PilotBlock& pilots,
                                const EstimatorOptions& opts = {});

inline EstimationResult mlsp(const CVector& r_u, const MeasurementSelection& sel, const GridSpec& grids,
                             const SystemConfig& cfg, const PilotBlock& pilots, const EstimatorOptions& opts = {}) {
  return joint_estimate(ChannelEstimator::subspace_pursuit, r_u, sel, grids, cfg, pilots, opts);
}

inline EstimationResult mlls(const CVector& r_u, const MeasurementSelection& sel, const GridSpec& grids,
                             const SystemConfig& cfg, const PilotBlock& pilots, const EstimatorOptions& opts = {}) {
  return joint_estimate(ChannelEstimator::least_squares, r_u, sel, grids, cfg, pilots, opts);
}

/// Channel estimate used at one grid point.
CVector estimate_channel(ChannelEstimator method, const CMatrix& a, const CVector& r, Index k_total,
                         const EstimatorOptions& opts);

const char* estimator_name(ChannelEstimator method);

}  // namespace sparsesync
