#include "sparsesync/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace sparsesync {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(j 2 pi cycles)
cd unit_phase(double cycles) { return std::polar(1.0, kTwoPi * cycles); }

// exp(j 2 pi m / n) with the integer part reduced modulo n first.
cd root_of_unity(long long m, int n) {
  long long r = m % n;
  if (r < 0) r += n;
  return unit_phase(static_cast<double>(r) / n);
}

// exp(j 2 pi k n (1 + eta) / N), split so the integer part wraps exactly.
cd sfo_phase(int k, int n, double eta, int big_n) {
  const long long kn = static_cast<long long>(k) * n;
  return root_of_unity(kn, big_n) * unit_phase(static_cast<double>(kn) * eta / big_n);
}

CMatrix block_diagonal(const CMatrix& block, int copies) {
  CMatrix out = CMatrix::Zero(block.rows() * copies, block.cols() * copies);
  for (int c = 0; c < copies; ++c)
    out.block(c * block.rows(), c * block.cols(), block.rows(), block.cols()) = block;
  return out;
}

void require_pilots(const SystemConfig& cfg, const PilotBlock& pilots) {
  if (pilots.n_subcarriers() != cfg.n_subcarriers || pilots.n_tx() != cfg.n_tx)
    throw ModelError("pilot block is " + std::to_string(pilots.n_subcarriers()) + "x" +
                     std::to_string(pilots.n_tx()) + ", config expects " +
                     std::to_string(cfg.n_subcarriers) + "x" + std::to_string(cfg.n_tx));
}

// D F1 (G) X (I kron F2) for one receive antenna.
CMatrix single_rx_block(const SystemConfig& cfg, const PilotBlock& pilots, double epsilon,
                        double eta, const CDiagonal* ramp, int taps) {
  const int n = cfg.n_subcarriers;
  CMatrix right = pilot_matrix(pilots) * block_diagonal(dft_tap_matrix(n, taps), cfg.n_tx);
  if (ramp != nullptr) right = (*ramp) * right;
  return cfo_phase_matrix(epsilon, eta, n) * (sfo_idft_matrix(eta, n) * right);
}

// Partial Fisher-Yates: `count` distinct values from [lo, hi], unsorted.
std::vector<int> draw_distinct(int lo, int hi, int count, std::mt19937_64& rng) {
  std::vector<int> pool(hi - lo + 1);
  std::iota(pool.begin(), pool.end(), lo);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

cd complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double re = gauss(rng);
  const double im = gauss(rng);
  return cd(re, im) * std::sqrt(0.5);
}

}  // namespace

void SystemConfig::validate() const {
  auto fail = [](const std::string& what) { throw ModelError("invalid system config: " + what); };
  if (n_subcarriers < 1) fail("N >= 1 violated");
  if (n_tx < 1) fail("N_T >= 1 violated");
  if (n_rx < 1) fail("N_R >= 1 violated");
  if (channel_length < 1) fail("L_m >= 1 violated");
  if (sparsity < 1) fail("K >= 1 violated");
  if (theta_max < 0) fail("theta_max >= 0 violated");
  if (cp_len < 1) fail("cp_len >= 1 violated");
  if (sparsity > channel_length) fail("K <= L_m violated");
  if (channel_length + theta_max >= cp_len) fail("L_m + theta_max < cp_len violated");
  if (channel_length + theta_max > n_subcarriers) fail("L_m + theta_max <= N violated");
}

PilotBlock::PilotBlock(CMatrix symbols) : symbols_(std::move(symbols)) {
  if (symbols_.size() == 0) throw ModelError("empty pilot block");
  for (Index i = 0; i < symbols_.size(); ++i) {
    if (std::abs(std::abs(symbols_.data()[i]) - 1.0) > 1e-12)
      throw ModelError("pilot symbols must have unit magnitude");
  }
}

PilotBlock PilotBlock::qpsk(int n_subcarriers, int n_tx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bit(0, 1);
  const double a = std::sqrt(0.5);
  CMatrix s(n_subcarriers, n_tx);
  for (int t = 0; t < n_tx; ++t) {
    for (int k = 0; k < n_subcarriers; ++k) {
      const double re = bit(rng) != 0 ? a : -a;
      const double im = bit(rng) != 0 ? a : -a;
      s(k, t) = cd(re, im);
    }
  }
  return PilotBlock(std::move(s));
}

PilotBlock PilotBlock::ones(int n_subcarriers, int n_tx) {
  return PilotBlock(CMatrix::Ones(n_subcarriers, n_tx));
}

CDiagonal cfo_phase_matrix(double epsilon, double eta, int n) {
  CDiagonal d(n);
  for (int i = 0; i < n; ++i)
    d.diagonal()(i) = i == 0 ? cd(1.0, 0.0) : unit_phase(epsilon * (1.0 + eta) * i / n);
  return d;
}

CDiagonal timing_ramp_matrix(int theta, int n) {
  CDiagonal g(n);
  for (int k = 0; k < n; ++k) g.diagonal()(k) = root_of_unity(-static_cast<long long>(k) * theta, n);
  return g;
}

CMatrix sfo_idft_matrix(double eta, int n) {
  CMatrix f(n, n);
  for (int row = 0; row < n; ++row)
    for (int k = 0; k < n; ++k) f(row, k) = sfo_phase(k, row, eta, n) / static_cast<double>(n);
  return f;
}

CMatrix dft_tap_matrix(int n, int taps) {
  if (taps < 1 || taps > n)
    throw ModelError("tap count " + std::to_string(taps) + " outside [1, N=" + std::to_string(n) + "]");
  CMatrix f(n, taps);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < taps; ++l) f(k, l) = root_of_unity(-static_cast<long long>(l) * k, n);
  return f;
}

CMatrix pilot_matrix(const PilotBlock& pilots) {
  const int n = pilots.n_subcarriers();
  CMatrix x = CMatrix::Zero(n, static_cast<Index>(n) * pilots.n_tx());
  for (int t = 0; t < pilots.n_tx(); ++t)
    for (int k = 0; k < n; ++k) x(k, static_cast<Index>(t) * n + k) = pilots.symbols()(k, t);
  return x;
}

CMatrix assemble_a1(const SystemConfig& cfg, const PilotBlock& pilots, const ImpairmentParams& params) {
  cfg.validate();
  require_pilots(cfg, pilots);
  const CDiagonal ramp = timing_ramp_matrix(params.theta, cfg.n_subcarriers);
  return block_diagonal(
      single_rx_block(cfg, pilots, params.epsilon, params.eta, &ramp, cfg.channel_length), cfg.n_rx);
}

CMatrix assemble_a2(const SystemConfig& cfg, const PilotBlock& pilots, double epsilon, double eta) {
  cfg.validate();
  require_pilots(cfg, pilots);
  return block_diagonal(single_rx_block(cfg, pilots, epsilon, eta, nullptr, cfg.embedded_length()),
                        cfg.n_rx);
}

EmbeddedChannel embed_ste(const SparseChannel& h, int theta, const SystemConfig& cfg) {
  if (theta < 0 || theta > cfg.theta_max)
    throw ModelError("theta " + std::to_string(theta) + " outside [0, theta_max=" +
                     std::to_string(cfg.theta_max) + "]");
  if (h.taps.size() != cfg.channel_size()) throw ModelError("channel length does not match config");
  const int len = cfg.channel_length;
  const int wide = cfg.embedded_length();
  EmbeddedChannel out{CVector::Zero(cfg.embedded_size())};
  for (int p = 0; p < cfg.pair_count(); ++p)
    out.taps.segment(static_cast<Index>(p) * wide + theta, len) = h.taps.segment(static_cast<Index>(p) * len, len);
  return out;
}

CVector extract_ste(const EmbeddedChannel& h_theta, int theta, const SystemConfig& cfg) {
  if (theta < 0 || theta > cfg.theta_max) throw ModelError("theta outside [0, theta_max]");
  if (h_theta.taps.size() != cfg.embedded_size()) throw ModelError("embedded channel length does not match config");
  const int len = cfg.channel_length;
  const int wide = cfg.embedded_length();
  CVector h(cfg.channel_size());
  for (int p = 0; p < cfg.pair_count(); ++p)
    h.segment(static_cast<Index>(p) * len, len) = h_theta.taps.segment(static_cast<Index>(p) * wide + theta, len);
  return h;
}

SparseChannel generate_channel(const SystemConfig& cfg, std::uint64_t seed, SupportMode mode) {
  cfg.validate();
  const int len = cfg.channel_length;
  const int k = cfg.sparsity;
  if (mode == SupportMode::anchored && (k < 2 || len < 2))
    throw ModelError("anchored support needs K >= 2 and L_m >= 2");

  std::mt19937_64 rng(seed);
  SparseChannel h{CVector::Zero(cfg.channel_size()), {}};
  h.supports.reserve(cfg.pair_count());
  for (int p = 0; p < cfg.pair_count(); ++p) {
    std::vector<int> support;
    if (mode == SupportMode::uniform) {
      support = draw_distinct(0, len - 1, k, rng);
    } else {
      support = draw_distinct(1, len - 2, k - 2, rng);
      support.push_back(0);
      support.push_back(len - 1);
    }
    std::sort(support.begin(), support.end());
    for (int tap : support) h.taps(static_cast<Index>(p) * len + tap) = complex_normal(rng);
    h.supports.push_back(std::move(support));
  }
  return h;
}

double expected_signal_energy(const CMatrix& a1, const SparseChannel& h) {
  const Index len = h.supports.empty() ? 0 : a1.cols() / static_cast<Index>(h.supports.size());
  double energy = 0.0;
  for (std::size_t p = 0; p < h.supports.size(); ++p)
    for (int tap : h.supports[p]) energy += a1.col(static_cast<Index>(p) * len + tap).squaredNorm();
  return energy;
}

NoiseSpec noise_for_snr(double snr_db, double signal_energy, Index rows) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return NoiseSpec{signal_energy / (static_cast<double>(rows) * snr), snr_db};
}

CVector complex_gaussian(Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CVector w(size);
  for (Index i = 0; i < size; ++i) w(i) = complex_normal(rng);
  return w;
}

CVector received_signal(const CMatrix& a1, const CVector& h, const NoiseSpec& noise, std::uint64_t seed) {
  if (a1.cols() != h.size())
    throw ModelError("A1 has " + std::to_string(a1.cols()) + " columns but h has " + std::to_string(h.size()) + " taps");
  if (noise.sigma_sq < 0.0) throw ModelError("noise variance must be nonnegative");
  CVector r = a1 * h;
  if (noise.sigma_sq > 0.0) r += std::sqrt(noise.sigma_sq) * complex_gaussian(r.size(), seed);
  return r;
}

CVector received_signal(const CMatrix& a1, const SparseChannel& h, const NoiseSpec& noise, std::uint64_t seed) {
  return received_signal(a1, h.taps, noise, seed);
}

MeasurementSelection select_samples(const SystemConfig& cfg, int per_rx, std::uint64_t seed) {
  const int n = cfg.n_subcarriers;
  if (per_rx < 1 || per_rx > n)
    throw ModelError("samples per receive antenna M=" + std::to_string(per_rx) + " outside [1, N=" + std::to_string(n) + "]");
  std::mt19937_64 rng(seed);
  MeasurementSelection sel;
  sel.per_rx = per_rx;
  sel.indices.reserve(static_cast<std::size_t>(per_rx) * cfg.n_rx);
  for (int rx = 0; rx < cfg.n_rx; ++rx) {
    std::vector<int> rows = draw_distinct(0, n - 1, per_rx, rng);
    std::sort(rows.begin(), rows.end());
    for (int row : rows) sel.indices.push_back(static_cast<Index>(rx) * n + row);
  }
  return sel;
}

MeasurementSelection full_selection(const SystemConfig& cfg) {
  MeasurementSelection sel;
  sel.per_rx = cfg.n_subcarriers;
  sel.indices.resize(static_cast<std::size_t>(cfg.rows()));
  std::iota(sel.indices.begin(), sel.indices.end(), Index{0});
  return sel;
}

CMatrix row_subsample(const CMatrix& a, const MeasurementSelection& sel) {
  CMatrix out(sel.size(), a.cols());
  for (Index i = 0; i < sel.size(); ++i) {
    const Index row = sel.indices[static_cast<std::size_t>(i)];
    if (row < 0 || row >= a.rows()) throw ModelError("selected row " + std::to_string(row) + " out of bounds");
    out.row(i) = a.row(row);
  }
  return out;
}

CVector row_subsample(const CVector& r, const MeasurementSelection& sel) {
  CVector out(sel.size());
  for (Index i = 0; i < sel.size(); ++i) {
    const Index row = sel.indices[static_cast<std::size_t>(i)];
    if (row < 0 || row >= r.size()) throw ModelError("selected row " + std::to_string(row) + " out of bounds");
    out(i) = r(row);
  }
  return out;
}

SubsampledModel::SubsampledModel(const SystemConfig& cfg, const PilotBlock& pilots)
    : cfg_(cfg), pilots_(pilot_matrix(pilots)) {
  cfg_.validate();
  require_pilots(cfg_, pilots);
  const int n = cfg_.n_subcarriers;
  a2_right_ = pilots_ * block_diagonal(dft_tap_matrix(n, cfg_.embedded_length()), cfg_.n_tx);
  a1_right_.reserve(static_cast<std::size_t>(cfg_.theta_max) + 1);
  for (int theta = 0; theta <= cfg_.theta_max; ++theta) a1_right_.push_back(a1_right(theta));
}

CMatrix SubsampledModel::a1_right(int theta) const {
  const int n = cfg_.n_subcarriers;
  return timing_ramp_matrix(theta, n) * (pilots_ * block_diagonal(dft_tap_matrix(n, cfg_.channel_length), cfg_.n_tx));
}

CMatrix SubsampledModel::rows_of(const CMatrix& right, double epsilon, double eta,
                                 const MeasurementSelection& sel) const {
  const int n = cfg_.n_subcarriers;
  const Index m = sel.size();
  CMatrix left(m, n);
  for (Index i = 0; i < m; ++i) {
    const Index row = sel.indices[static_cast<std::size_t>(i)];
    if (row < 0 || row >= cfg_.rows()) throw ModelError("selected row " + std::to_string(row) + " out of bounds");
    const int local = static_cast<int>(row % n);
    const cd d = local == 0 ? cd(1.0, 0.0) : unit_phase(epsilon * (1.0 + eta) * local / n);
    for (int k = 0; k < n; ++k) left(i, k) = d * sfo_phase(k, local, eta, n) / static_cast<double>(n);
  }
  const CMatrix product = left * right;
  const Index width = right.cols();
  CMatrix out = CMatrix::Zero(m, width * cfg_.n_rx);
  for (Index i = 0; i < m; ++i) {
    const Index rx = sel.indices[static_cast<std::size_t>(i)] / n;
    out.block(i, rx * width, 1, width) = product.row(i);
  }
  return out;
}

CMatrix SubsampledModel::a1_rows(const ImpairmentParams& params, const MeasurementSelection& sel) const {
  if (params.theta >= 0 && params.theta <= cfg_.theta_max)
    return rows_of(a1_right_[static_cast<std::size_t>(params.theta)], params.epsilon, params.eta, sel);
  return rows_of(a1_right(params.theta), params.epsilon, params.eta, sel);
}

CMatrix SubsampledModel::a2_rows(double epsilon, double eta, const MeasurementSelection& sel) const {
  return rows_of(a2_right_, epsilon, eta, sel);
}

}  // namespace sparsesync
