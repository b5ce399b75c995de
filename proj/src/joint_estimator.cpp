#include "sparsesync/joint_estimator.hpp"

#include <cmath>
#include <limits>

#include "sparsesync/parallel.hpp"

namespace sparsesync {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PointEval {
  double cost = kInf;
  CVector h;
  bool failed = false;
};

template <typename BuildMatrix>
PointEval evaluate_point(ChannelEstimator method, const CVector& r_u, Index k_total,
                         const EstimatorOptions& opts, BuildMatrix&& build) {
  PointEval out;
  try {
    const CMatrix a = build();
    out.h = estimate_channel(method, a, r_u, k_total, opts);
    out.cost = residual_cost(a, out.h, r_u);
    if (!std::isfinite(out.cost)) {
      out.cost = kInf;
      out.failed = true;
    }
  } catch (const std::exception&) {
    out.cost = kInf;
    out.failed = true;
  }
  return out;
}

// First minimum in index order.
std::size_t argmin(const std::vector<double>& costs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < costs.size(); ++i)
    if (costs[i] < costs[best]) best = i;
  return best;
}

}  // namespace

std::size_t RealAxis::count() const {
  // Tolerate representation error in (max - min) / step, e.g. 0.8 / 0.01.
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

void RealAxis::validate(const std::string& name) const {
  if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step))
    throw ModelError(name + " grid has non-finite bounds");
  if (min > max) throw ModelError(name + " grid: min <= max violated");
  if (!(step > 0.0)) throw ModelError(name + " grid: step > 0 violated");
}

void IntAxis::validate(const std::string& name) const {
  if (min > max) throw ModelError(name + " grid: min <= max violated");
  if (step <= 0) throw ModelError(name + " grid: step > 0 violated");
}

void GridSpec::validate() const {
  eps.validate("epsilon");
  eta.validate("eta");
  theta.validate("theta");
}

const char* estimator_name(ChannelEstimator method) {
  return method == ChannelEstimator::subspace_pursuit ? "mlsp" : "mlls";
}

double residual_cost(const CMatrix& a, const CVector& h, const CVector& r) {
  if (a.cols() != h.size() || a.rows() != r.size())
    throw ModelError("residual cost: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     ", h has " + std::to_string(h.size()) + ", r has " + std::to_string(r.size()));
  return (r - a * h).squaredNorm();
}

CVector estimate_channel(ChannelEstimator method, const CMatrix& a, const CVector& r, Index k_total,
                         const EstimatorOptions& opts) {
  if (method == ChannelEstimator::subspace_pursuit)
    return subspace_pursuit(a, r, k_total, opts.max_iter, opts.rank_tol).h_hat;
  return least_squares(a, r, opts.rank_tol).x;
}

EstimationResult joint_estimate(ChannelEstimator method, const CVector& r_u, const MeasurementSelection& sel,
                                const GridSpec& grids, const SystemConfig& cfg, const PilotBlock& pilots,
                                const EstimatorOptions& opts) {
  cfg.validate();
  grids.validate();
  if (grids.theta.min < 0 || grids.theta.max > cfg.theta_max)
    throw ModelError("theta grid must lie within [0, theta_max=" + std::to_string(cfg.theta_max) + "]");
  if (r_u.size() != sel.size())
    throw ModelError("observation length " + std::to_string(r_u.size()) + " does not match selection size " +
                     std::to_string(sel.size()));

  const SubsampledModel model(cfg, pilots);
  const Index k_total = cfg.total_sparsity();
  const std::size_t n_eps = grids.eps.count();
  const std::size_t n_eta = grids.eta.count();
  const std::size_t n_theta = grids.theta.count();

  EstimationResult out;

  // Stage 1: (eps, eta) on the STE-embedded model.
  std::vector<double> j1(n_eps * n_eta, kInf);
  std::vector<unsigned char> j1_failed(j1.size(), 0);
  parallel_for(j1.size(), opts.workers, [&](std::size_t idx) {
    const double eps = grids.eps.value(idx / n_eta);
    const double eta = grids.eta.value(idx % n_eta);
    const PointEval e = evaluate_point(method, r_u, k_total, opts, [&] { return model.a2_rows(eps, eta, sel); });
    j1[idx] = e.cost;
    j1_failed[idx] = e.failed ? 1 : 0;
  });
  const std::size_t best1 = argmin(j1);
  if (!std::isfinite(j1[best1])) throw EstimationError("every (epsilon, eta) grid point failed");
  out.epsilon_hat = grids.eps.value(best1 / n_eta);
  out.eta_hat = grids.eta.value(best1 % n_eta);
  out.min_cost_j1 = j1[best1];
  out.j1_evals = j1.size();

  // Stage 2: theta at the selected (eps, eta).
  std::vector<double> j2(n_theta, kInf);
  std::vector<CVector> h2(n_theta);
  std::vector<unsigned char> j2_failed(n_theta, 0);
  parallel_for(n_theta, opts.workers, [&](std::size_t idx) {
    const ImpairmentParams params{out.epsilon_hat, out.eta_hat, grids.theta.value(idx)};
    PointEval e = evaluate_point(method, r_u, k_total, opts, [&] { return model.a1_rows(params, sel); });
    j2[idx] = e.cost;
    h2[idx] = std::move(e.h);
    j2_failed[idx] = e.failed ? 1 : 0;
  });
  const std::size_t best2 = argmin(j2);
  if (!std::isfinite(j2[best2])) throw EstimationError("every theta grid point failed");
  out.theta_hat = grids.theta.value(best2);
  out.h_hat = std::move(h2[best2]);
  out.min_cost_j2 = j2[best2];
  out.j2_evals = n_theta;

  for (unsigned char f : j1_failed) out.failed_points += f;
  for (unsigned char f : j2_failed) out.failed_points += f;
  if (opts.keep_cost_tables) {
    out.j1_costs = std::move(j1);
    out.j2_costs = std::move(j2);
  }
  return out;
}

}  // namespace sparsesync
