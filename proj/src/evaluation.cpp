#include "sparsesync/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "sparsesync/parallel.hpp"
#include "sparsesync/seeding.hpp"

namespace sparsesync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags for derive_seed.
enum Stream : std::uint64_t { kPilots = 1, kTruth = 2, kChannel = 3, kSelection = 4, kNoise = 5 };

template <typename T>
void require_nonempty(const std::vector<T>& v, const char* what) {
  if (v.empty()) throw ModelError(std::string(what) + ": empty trial list");
}

struct MeanAndError {
  double mean = kNaN;
  double standard_error = kNaN;
};

MeanAndError mean_and_error(const std::vector<double>& samples) {
  if (samples.empty()) return {};
  double sum = 0.0;
  for (double s : samples) sum += s;
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;
  if (samples.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ImpairmentParams draw_truth(const SweepSettings& s, int trial) {
  if (s.truth_mode == TruthMode::reference) return kReferenceImpairments;
  std::mt19937_64 rng(derive_seed(s.master_seed, {static_cast<std::uint64_t>(trial), kTruth}));
  auto pick = [&](std::size_t count) {
    return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
  };
  ImpairmentParams p;
  if (s.truth_mode == TruthMode::on_grid) {
    p.epsilon = s.grids.eps.value(pick(s.grids.eps.count()));
    p.eta = s.grids.eta.value(pick(s.grids.eta.count()));
  } else {
    p.epsilon = std::uniform_real_distribution<double>(s.grids.eps.min, s.grids.eps.max)(rng);
    p.eta = std::uniform_real_distribution<double>(s.grids.eta.min, s.grids.eta.max)(rng);
  }
  p.theta = s.grids.theta.value(pick(s.grids.theta.count()));
  return p;
}

}  // namespace

double mse(const std::vector<double>& estimates, const std::vector<double>& truths) {
  require_nonempty(estimates, "mse");
  if (estimates.size() != truths.size()) throw ModelError("mse: estimate and truth counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) sum += (estimates[i] - truths[i]) * (estimates[i] - truths[i]);
  return sum / static_cast<double>(estimates.size());
}

double mse(const std::vector<double>& estimates, double truth) {
  return mse(estimates, std::vector<double>(estimates.size(), truth));
}

double mse(const std::vector<CVector>& estimates, const std::vector<CVector>& truths) {
  require_nonempty(estimates, "mse");
  if (estimates.size() != truths.size()) throw ModelError("mse: estimate and truth counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (estimates[i].size() != truths[i].size()) throw ModelError("mse: vector shapes differ");
    sum += (estimates[i] - truths[i]).squaredNorm();
  }
  return sum / static_cast<double>(estimates.size());
}

double mse(const std::vector<CVector>& estimates, const CVector& truth) {
  return mse(estimates, std::vector<CVector>(estimates.size(), truth));
}

double timing_failure_prob(const std::vector<int>& theta_hats, const std::vector<int>& truths, int p) {
  require_nonempty(theta_hats, "timing_failure_prob");
  if (theta_hats.size() != truths.size()) throw ModelError("timing_failure_prob: estimate and truth counts differ");
  if (p < 1) throw ModelError("timing_failure_prob: p must be positive");
  std::size_t failures = 0;
  for (std::size_t i = 0; i < theta_hats.size(); ++i)
    if (std::abs(theta_hats[i] - truths[i]) >= p) ++failures;
  return static_cast<double>(failures) / static_cast<double>(theta_hats.size());
}

double timing_failure_prob(const std::vector<int>& theta_hats, int theta_true, int p) {
  return timing_failure_prob(theta_hats, std::vector<int>(theta_hats.size(), theta_true), p);
}

CrlbResult numerical_crlb(const SystemConfig& cfg, const PilotBlock& pilots, const ImpairmentParams& params,
                          const SparseChannel& h, double sigma_sq, const CrlbOptions& opts) {
  if (!(sigma_sq > 0.0)) throw ModelError("numerical_crlb: sigma_sq must be positive");
  if (!(opts.eps_step > 0.0) || !(opts.eta_step > 0.0)) throw ModelError("numerical_crlb: steps must be positive");

  const CMatrix a1 = assemble_a1(cfg, pilots, params);
  if (h.taps.size() != a1.cols()) throw ModelError("numerical_crlb: channel length does not match config");

  std::vector<Index> support;
  for (std::size_t p = 0; p < h.supports.size(); ++p)
    for (int tap : h.supports[p]) support.push_back(static_cast<Index>(p) * cfg.channel_length + tap);
  const Index n_sync = opts.known_sync ? 0 : 2;
  const Index n_sup = static_cast<Index>(support.size());
  const Index dim = n_sync + 2 * n_sup;
  if (dim == 0) throw ModelError("numerical_crlb: no parameters to bound");

  std::vector<std::string> names;
  CMatrix jac(a1.rows(), dim);
  if (!opts.known_sync) {
    auto mean_at = [&](double eps, double eta) {
      return CVector(assemble_a1(cfg, pilots, {eps, eta, params.theta}) * h.taps);
    };
    jac.col(0) = (mean_at(params.epsilon + opts.eps_step, params.eta) -
                  mean_at(params.epsilon - opts.eps_step, params.eta)) / (2.0 * opts.eps_step);
    jac.col(1) = (mean_at(params.epsilon, params.eta + opts.eta_step) -
                  mean_at(params.epsilon, params.eta - opts.eta_step)) / (2.0 * opts.eta_step);
    names = {"epsilon", "eta"};
  }
  for (Index j = 0; j < n_sup; ++j) {
    jac.col(n_sync + j) = a1.col(support[static_cast<std::size_t>(j)]);
    jac.col(n_sync + n_sup + j) = cd(0.0, 1.0) * a1.col(support[static_cast<std::size_t>(j)]);
    names.push_back("Re h[" + std::to_string(support[static_cast<std::size_t>(j)]) + "]");
  }
  for (Index j = 0; j < n_sup; ++j) names.push_back("Im h[" + std::to_string(support[static_cast<std::size_t>(j)]) + "]");

  const Eigen::MatrixXd fim = (2.0 / sigma_sq) * (jac.adjoint() * jac).real();

  // Jacobi scaling puts eps and eta (very different magnitudes) on equal footing.
  Eigen::VectorXd scale(dim);
  for (Index i = 0; i < dim; ++i) {
    if (!(fim(i, i) > 0.0)) throw SingularFisherError(names[static_cast<std::size_t>(i)]);
    scale(i) = 1.0 / std::sqrt(fim(i, i));
  }
  const Eigen::MatrixXd scaled = scale.asDiagonal() * fim * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  if (!(lambda(0) > 1e-12 * lambda(dim - 1))) {
    Index worst = 0;
    eig.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
    throw SingularFisherError(names[static_cast<std::size_t>(worst)]);
  }
  const Eigen::MatrixXd scaled_inv =
      eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::MatrixXd inv = scale.asDiagonal() * scaled_inv * scale.asDiagonal();

  CrlbResult out;
  out.crlb_eps = opts.known_sync ? kNaN : inv(0, 0);
  out.crlb_eta = opts.known_sync ? kNaN : inv(1, 1);
  out.trace_crlb_h = inv.diagonal().tail(2 * n_sup).sum();
  return out;
}

bool SweepSettings::runs(ChannelEstimator e) const {
  return std::find(estimators.begin(), estimators.end(), e) != estimators.end();
}

void SweepSettings::validate() const {
  system.validate();
  grids.validate();
  if (snr_db.empty()) throw ModelError("snr list is empty");
  for (double s : snr_db)
    if (!std::isfinite(s)) throw ModelError("snr values must be finite");
  if (trials < 1) throw ModelError("trials >= 1 violated");
  if (samples_per_rx < 1 || samples_per_rx > system.n_subcarriers)
    throw ModelError("samples per receive antenna must lie in [1, N]");
  if (estimators.empty()) throw ModelError("no estimator selected");
  if (timing_p < 1) throw ModelError("timing failure threshold p >= 1 violated");
  const int shift = theta_shift();
  if (grids.theta.max + shift > system.theta_max)
    throw ModelError("theta grid [" + std::to_string(grids.theta.min) + ", " + std::to_string(grids.theta.max) +
                     "] shifted by " + std::to_string(shift) + " exceeds theta_max=" + std::to_string(system.theta_max));
  if (channel_support == SupportMode::anchored && system.sparsity < 2)
    throw ModelError("anchored channel support needs K >= 2");
  if (truth_mode == TruthMode::reference) {
    const int th = kReferenceImpairments.theta;
    if (th < grids.theta.min || th > grids.theta.max)
      throw ModelError("reference truth theta=2 lies outside the theta grid");
  }
}

TrialRecord run_trial(const SweepSettings& s, int trial, double snr_db, int estimator_workers) {
  const SystemConfig& cfg = s.system;
  const auto t = static_cast<std::uint64_t>(trial);
  const int shift = s.theta_shift();

  TrialRecord rec;
  rec.trial = trial;
  rec.seed = derive_seed(s.master_seed, {t});
  rec.snr_db = snr_db;
  rec.truth = draw_truth(s, trial);

  const PilotBlock pilots = PilotBlock::qpsk(
      cfg.n_subcarriers, cfg.n_tx,
      s.pilot_mode == PilotMode::fixed ? derive_seed(s.master_seed, {kPilots}) : derive_seed(s.master_seed, {t, kPilots}));
  const SparseChannel h = generate_channel(cfg, derive_seed(s.master_seed, {t, kChannel}), s.channel_support);
  const MeasurementSelection sel = select_samples(
      cfg, s.samples_per_rx,
      s.selection_mode == SelectionMode::fixed ? derive_seed(s.master_seed, {kSelection})
                                               : derive_seed(s.master_seed, {t, kSelection}));
  rec.h_true = h.taps;

  ImpairmentParams model_truth = rec.truth;
  model_truth.theta += shift;
  const CMatrix a1 = assemble_a1(cfg, pilots, model_truth);
  const NoiseSpec noise = noise_for_snr(snr_db, expected_signal_energy(a1, h), a1.rows());
  rec.sigma_sq = noise.sigma_sq;
  const NoiseSpec applied = s.noiseless ? NoiseSpec{0.0, snr_db} : noise;
  const CVector r = received_signal(a1, h, applied, derive_seed(s.master_seed, {t, kNoise}));
  const CVector r_u = row_subsample(r, sel);

  GridSpec shifted = s.grids;
  shifted.theta.min += shift;
  shifted.theta.max += shift;

  EstimatorOptions opts;
  opts.workers = estimator_workers;
  opts.keep_cost_tables = false;
  for (ChannelEstimator e : s.estimators) {
    EstimatorOutcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      out.result = joint_estimate(e, r_u, sel, shifted, cfg, pilots, opts);
      out.result.theta_hat -= shift;
      out.ok = true;
    } catch (const std::exception& ex) {
      out.error = ex.what();
    }
    out.wall_seconds = elapsed_seconds(start);
    rec.outcome(e) = std::move(out);
  }

  try {
    rec.crlb = numerical_crlb(cfg, pilots, model_truth, h, noise.sigma_sq);
  } catch (const std::exception&) {
    rec.crlb.reset();
  }
  return rec;
}

SweepRow aggregate(const std::vector<TrialRecord>& records, int timing_p) {
  SweepRow row;
  row.trials = static_cast<int>(records.size());
  if (!records.empty()) row.snr_db = records.front().snr_db;

  for (ChannelEstimator e : {ChannelEstimator::subspace_pursuit, ChannelEstimator::least_squares}) {
    const bool present = std::any_of(records.begin(), records.end(), [&](const TrialRecord& r) { return r.outcome(e).has_value(); });
    if (!present) continue;
    EstimatorStats st;
    std::vector<double> se_eps, se_eta, se_theta, se_h, wall;
    std::vector<int> theta_hats, theta_truths;
    for (const TrialRecord& rec : records) {
      const auto& o = rec.outcome(e);
      if (!o) continue;
      wall.push_back(o->wall_seconds);
      if (!o->ok) {
        ++st.failed;
        continue;
      }
      ++st.succeeded;
      const EstimationResult& res = o->result;
      se_eps.push_back((res.epsilon_hat - rec.truth.epsilon) * (res.epsilon_hat - rec.truth.epsilon));
      se_eta.push_back((res.eta_hat - rec.truth.eta) * (res.eta_hat - rec.truth.eta));
      const double dtheta = res.theta_hat - rec.truth.theta;
      se_theta.push_back(dtheta * dtheta);
      se_h.push_back((res.h_hat - rec.h_true).squaredNorm());
      theta_hats.push_back(res.theta_hat);
      theta_truths.push_back(rec.truth.theta);
    }
    const auto eps = mean_and_error(se_eps);
    const auto eta = mean_and_error(se_eta);
    const auto hh = mean_and_error(se_h);
    st.mse_eps = eps.mean;
    st.se_eps = eps.standard_error;
    st.mse_eta = eta.mean;
    st.se_eta = eta.standard_error;
    st.mse_h = hh.mean;
    st.se_h = hh.standard_error;
    st.mse_theta = mean_and_error(se_theta).mean;
    st.ptf = theta_hats.empty() ? kNaN : timing_failure_prob(theta_hats, theta_truths, timing_p);
    st.mean_wall_seconds = mean_and_error(wall).mean;
    (e == ChannelEstimator::subspace_pursuit ? row.mlsp : row.mlls) = st;
  }

  double c_eps = 0.0, c_eta = 0.0, c_h = 0.0;
  for (const TrialRecord& rec : records) {
    if (!rec.crlb) continue;
    c_eps += rec.crlb->crlb_eps;
    c_eta += rec.crlb->crlb_eta;
    c_h += rec.crlb->trace_crlb_h;
    ++row.crlb_count;
  }
  if (row.crlb_count > 0) {
    row.crlb_eps = c_eps / row.crlb_count;
    row.crlb_eta = c_eta / row.crlb_count;
    row.crlb_h = c_h / row.crlb_count;
  } else {
    row.crlb_eps = row.crlb_eta = row.crlb_h = kNaN;
  }
  return row;
}

SweepSummary monte_carlo_sweep(const SweepSettings& settings) {
  settings.validate();
  const std::size_t n_snr = settings.snr_db.size();
  const auto n_trials = static_cast<std::size_t>(settings.trials);

  SweepSummary summary;
  summary.records.assign(n_snr, std::vector<TrialRecord>(n_trials));
  parallel_for(n_snr * n_trials, settings.workers, [&](std::size_t idx) {
    const std::size_t s = idx / n_trials;
    const std::size_t t = idx % n_trials;
    summary.records[s][t] = run_trial(settings, static_cast<int>(t), settings.snr_db[s]);
  });
  for (std::size_t s = 0; s < n_snr; ++s) {
    SweepRow row = aggregate(summary.records[s], settings.timing_p);
    row.snr_db = settings.snr_db[s];
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

std::vector<ComplexityRow> complexity_trend(const std::vector<SystemConfig>& cfg_list, int reps,
                                            int sp_samples_per_rx, std::uint64_t seed) {
  if (reps < 1) throw ModelError("complexity_trend: reps >= 1 violated");
  std::vector<ComplexityRow> rows;
  for (const SystemConfig& cfg : cfg_list) {
    cfg.validate();
    const int ls_samples = std::min(cfg.n_subcarriers, cfg.channel_length * cfg.n_tx);
    const int sp_samples = std::min(cfg.n_subcarriers, sp_samples_per_rx);
    const ImpairmentParams params{0.1, 1e-4, std::min(2, cfg.theta_max)};
    const Index k_total = cfg.total_sparsity();
    EstimatorOptions opts;

    double sp_total = 0.0;
    double ls_total = 0.0;
    for (int rep = -1; rep < reps; ++rep) {  // rep -1 warms caches and is not timed
      const auto r = static_cast<std::uint64_t>(rep + 1);
      const PilotBlock pilots = PilotBlock::qpsk(cfg.n_subcarriers, cfg.n_tx, derive_seed(seed, {r, kPilots}));
      const SparseChannel h = generate_channel(cfg, derive_seed(seed, {r, kChannel}));
      const SubsampledModel model(cfg, pilots);

      const MeasurementSelection sp_sel = select_samples(cfg, sp_samples, derive_seed(seed, {r, kSelection}));
      const CMatrix a_sp = model.a1_rows(params, sp_sel);
      const CVector r_sp = a_sp * h.taps + 0.01 * complex_gaussian(a_sp.rows(), derive_seed(seed, {r, kNoise}));
      const MeasurementSelection ls_sel = select_samples(cfg, ls_samples, derive_seed(seed, {r, kSelection, 1}));
      const CMatrix a_ls = model.a1_rows(params, ls_sel);
      const CVector r_ls = a_ls * h.taps + 0.01 * complex_gaussian(a_ls.rows(), derive_seed(seed, {r, kNoise, 1}));

      auto start = std::chrono::steady_clock::now();
      volatile double sink = estimate_channel(ChannelEstimator::subspace_pursuit, a_sp, r_sp, k_total, opts).norm();
      const double sp_time = elapsed_seconds(start);
      start = std::chrono::steady_clock::now();
      sink = estimate_channel(ChannelEstimator::least_squares, a_ls, r_ls, k_total, opts).norm();
      const double ls_time = elapsed_seconds(start);
      (void)sink;
      if (rep >= 0) {
        sp_total += sp_time;
        ls_total += ls_time;
      }
    }
    rows.push_back({cfg.channel_size(), cfg.sparsity, sp_total / reps, ls_total / reps});
  }
  return rows;
}

const char* truth_mode_name(TruthMode m) {
  switch (m) {
    case TruthMode::on_grid: return "on-grid";
    case TruthMode::reference: return "reference";
    case TruthMode::random: return "random";
  }
  return "?";
}

const char* pilot_mode_name(PilotMode m) { return m == PilotMode::fixed ? "fixed" : "per-trial"; }
const char* selection_mode_name(SelectionMode m) { return m == SelectionMode::fixed ? "fixed" : "per-trial"; }
const char* support_mode_name(SupportMode m) { return m == SupportMode::uniform ? "uniform" : "anchored"; }

}  // namespace sparsesync
