#pragma once

#include <vector>

#include "sparsesync/signal_model.hpp"

namespace sparsesync {

inline constexpr double kDefaultRankTol = 1e-10;

/// Column-normalized copy of A with input * diag(scaling) == normalized.
struct NormalizedMatrix {
  CMatrix normalized;
  Eigen::VectorXd scaling;
};

/// Throws ModelError on a zero column.
NormalizedMatrix normalize_columns(const CMatrix& a);

struct LeastSquaresSolution {
  CVector x;
  Index rank = 0;
  bool rank_deficient = false;
};

/// Minimum-norm least-squares solution of A x ~= r. Directions whose pivot in
/// the rank-revealing decomposition falls below rank_tol times the largest
/// pivot are dropped.
LeastSquaresSolution least_squares(const CMatrix& a, const CVector& r,
                                   double rank_tol = kDefaultRankTol);

/// Snapshot of one pursuit iteration.
struct PursuitState {
  int iteration = 0;
  std::vector<Index> support;
  CVector residual;
  double residual_norm = 0.0;
};

struct PursuitResult {
  std::vector<Index> support;  // ascending
  CVector h_hat;               // in the scale of the caller's A, zero off-support
  int iterations = 0;          // accepted iterations
  /// |e_0|, |e_1|, ... including the final rejected iterate when one occurred.
  std::vector<double> residual_history;
  bool sparse_budget_exceeds_half_rows = false;
};

/// Subspace pursuit over the column-normalized A. max_iter <= 0 selects
/// k_total + 10.
PursuitResult subspace_pursuit(const CMatrix& a, const CVector& r, Index k_total, int max_iter = 0,
                               double rank_tol = kDefaultRankTol);

/// Indices of the `count` largest values, ties broken toward the lower index,
/// returned in selection order.
std::vector<Index> largest_indices(const Eigen::VectorXd& magnitudes, Index count);

}  // namespace sparsesync
