#include "sparsesync/sparse_recovery.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace sparsesync {

namespace {

CMatrix columns(const CMatrix& a, const std::vector<Index>& idx) {
  CMatrix out(a.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = a.col(idx[j]);
  return out;
}

struct Fit {
  CVector coeffs;
  CVector residual;
  double residual_norm;
};

Fit fit_on(const CMatrix& a, const std::vector<Index>& support, const CVector& r, double rank_tol) {
  if (support.empty()) return Fit{CVector(), r, r.norm()};
  const CMatrix sub = columns(a, support);
  CVector coeffs = least_squares(sub, r, rank_tol).x;
  CVector residual = r - sub * coeffs;
  const double norm = residual.norm();
  return Fit{std::move(coeffs), std::move(residual), norm};
}

}  // namespace

NormalizedMatrix normalize_columns(const CMatrix& a) {
  NormalizedMatrix out{a, Eigen::VectorXd(a.cols())};
  for (Index j = 0; j < a.cols(); ++j) {
    const double norm = a.col(j).norm();
    if (!(norm > 0.0)) throw ModelError("cannot normalize zero column " + std::to_string(j));
    out.scaling(j) = 1.0 / norm;
    out.normalized.col(j) *= out.scaling(j);
  }
  return out;
}

LeastSquaresSolution least_squares(const CMatrix& a, const CVector& r, double rank_tol) {
  if (a.rows() != r.size())
    throw ModelError("least squares: A has " + std::to_string(a.rows()) + " rows, r has " + std::to_string(r.size()));
  if (a.cols() == 0) return LeastSquaresSolution{CVector(), 0, false};

  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
  cod.setThreshold(rank_tol);
  cod.compute(a);
  LeastSquaresSolution out;
  out.rank = cod.rank();
  out.rank_deficient = out.rank < std::min(a.rows(), a.cols());
  if (out.rank == 0) {
    out.x = CVector::Zero(a.cols());
  } else {
    out.x = cod.solve(r);
  }
  return out;
}

std::vector<Index> largest_indices(const Eigen::VectorXd& magnitudes, Index count) {
  std::vector<Index> order(static_cast<std::size_t>(magnitudes.size()));
  std::iota(order.begin(), order.end(), Index{0});
  count = std::min<Index>(count, magnitudes.size());
  std::partial_sort(order.begin(), order.begin() + count, order.end(), [&](Index lhs, Index rhs) {
    if (magnitudes(lhs) != magnitudes(rhs)) return magnitudes(lhs) > magnitudes(rhs);
    return lhs < rhs;
  });
  order.resize(static_cast<std::size_t>(count));
  return order;
}

PursuitResult subspace_pursuit(const CMatrix& a, const CVector& r, Index k_total, int max_iter, double rank_tol) {
  if (a.rows() != r.size()) throw ModelError("subspace pursuit: rows(A) != len(r)");
  if (k_total < 1 || k_total > a.cols())
    throw ModelError("subspace pursuit: sparsity " + std::to_string(k_total) + " outside [1, " +
                     std::to_string(a.cols()) + "]");
  if (max_iter <= 0) max_iter = static_cast<int>(k_total) + 10;

  const NormalizedMatrix norm = normalize_columns(a);
  const CMatrix& an = norm.normalized;

  PursuitResult out;
  out.sparse_budget_exceeds_half_rows = 2 * k_total > a.rows();

  PursuitState state{0, {}, r, r.norm()};
  out.residual_history.push_back(state.residual_norm);

  for (int k = 1; k <= max_iter; ++k) {
    // Expand by the K strongest correlations with the residual.
    const Eigen::VectorXd correlation = (an.adjoint() * state.residual).cwiseAbs();
    std::vector<Index> merged = state.support;
    for (Index j : largest_indices(correlation, k_total)) {
      if (std::find(merged.begin(), merged.end(), j) == merged.end()) merged.push_back(j);
    }
    std::sort(merged.begin(), merged.end());

    // Refit on the merged set and keep the K largest coefficients.
    const CVector v = least_squares(columns(an, merged), r, rank_tol).x;
    std::vector<Index> support;
    for (Index local : largest_indices(v.cwiseAbs(), k_total)) support.push_back(merged[static_cast<std::size_t>(local)]);
    std::sort(support.begin(), support.end());

    Fit fit = fit_on(an, support, r, rank_tol);
    out.residual_history.push_back(fit.residual_norm);
    if (fit.residual_norm >= state.residual_norm) break;
    state = PursuitState{k, std::move(support), std::move(fit.residual), fit.residual_norm};
  }

  out.iterations = state.iteration;
  out.support = state.support;
  out.h_hat = CVector::Zero(a.cols());
  if (!out.support.empty()) {
    const CVector coeffs = least_squares(columns(an, out.support), r, rank_tol).x;
    for (std::size_t j = 0; j < out.support.size(); ++j) {
      const Index col = out.support[j];
      out.h_hat(col) = coeffs(static_cast<Index>(j)) * norm.scaling(col);
    }
  }
  return out;
}

}  // namespace sparsesync
