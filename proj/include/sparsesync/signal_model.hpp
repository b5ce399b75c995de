#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sparsesync {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CDiagonal = Eigen::DiagonalMatrix<cd, Eigen::Dynamic>;
using Index = Eigen::Index;

/// Raised for malformed configurations, shapes, or out-of-range arguments.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Static dimensions of the MIMO-OFDM link. Defaults are the 2x2, 128-carrier
/// setup with a 26-tap, 5-sparse channel and a 32-sample cyclic prefix.
struct SystemConfig {
  int n_subcarriers = 128;
  int n_tx = 2;
  int n_rx = 2;
  int channel_length = 26;
  int sparsity = 5;
  int theta_max = 5;
  int cp_len = 32;

  int embedded_length() const { return channel_length + theta_max; }
  int pair_count() const { return n_tx * n_rx; }
  /// Length of the stacked channel vector h.
  int channel_size() const { return channel_length * pair_count(); }
  /// Length of the stacked STE-embedded channel vector.
  int embedded_size() const { return embedded_length() * pair_count(); }
  int rows() const { return n_subcarriers * n_rx; }
  /// Nonzero budget over the stacked channel (K per pair).
  int total_sparsity() const { return sparsity * pair_count(); }

  /// Throws ModelError naming the first violated invariant.
  void validate() const;

  bool operator==(const SystemConfig&) const = default;
};

struct ImpairmentParams {
  double epsilon = 0.0;  // normalized CFO
  double eta = 0.0;      // normalized SFO
  int theta = 0;         // STE in samples

  bool operator==(const ImpairmentParams&) const = default;
};

/// Frequency-domain pilots, one column per transmit antenna.
class PilotBlock {
 public:
  explicit PilotBlock(CMatrix symbols);

  /// Uniform random QPSK symbols (+-1 +-j)/sqrt(2).
  static PilotBlock qpsk(int n_subcarriers, int n_tx, std::uint64_t seed);
  static PilotBlock ones(int n_subcarriers, int n_tx);

  const CMatrix& symbols() const { return symbols_; }
  int n_subcarriers() const { return static_cast<int>(symbols_.rows()); }
  int n_tx() const { return static_cast<int>(symbols_.cols()); }

 private:
  CMatrix symbols_;
};

/// Stacked channel: receive antenna major, then transmit antenna, then tap.
/// Pair p = rx * n_tx + tx owns taps [p * L_m, (p + 1) * L_m).
struct SparseChannel {
  CVector taps;
  std::vector<std::vector<int>> supports;
};

struct EmbeddedChannel {
  CVector taps;
};

/// Sorted row indices into the stacked N * N_R received vector.
struct MeasurementSelection {
  std::vector<Index> indices;
  int per_rx = 0;

  Index size() const { return static_cast<Index>(indices.size()); }
};

struct NoiseSpec {
  double sigma_sq = 0.0;
  double snr_db = 0.0;
};

enum class SupportMode {
  uniform,   // K taps uniformly from {0..L_m-1}
  anchored,  // taps 0 and L_m-1 always present, K-2 uniform from the interior
};

// Model factors. Diagonals are returned as diagonal matrices.
CDiagonal cfo_phase_matrix(double epsilon, double eta, int n);
CDiagonal timing_ramp_matrix(int theta, int n);
CMatrix sfo_idft_matrix(double eta, int n);
CMatrix dft_tap_matrix(int n, int taps);
CMatrix pilot_matrix(const PilotBlock& pilots);

/// I_{N_R} kron (D F1 G X (I_{N_T} kron F2)), shape N N_R x L_m N_T N_R.
CMatrix assemble_a1(const SystemConfig& cfg, const PilotBlock& pilots,
                    const ImpairmentParams& params);
/// I_{N_R} kron (D F1 X (I_{N_T} kron F2')), F2' widened to L_m + theta_max taps.
CMatrix assemble_a2(const SystemConfig& cfg, const PilotBlock& pilots,
                    double epsilon, double eta);

EmbeddedChannel embed_ste(const SparseChannel& h, int theta, const SystemConfig& cfg);
/// Inverse of embed_ste: reads L_m taps per pair starting at offset theta.
CVector extract_ste(const EmbeddedChannel& h_theta, int theta, const SystemConfig& cfg);

SparseChannel generate_channel(const SystemConfig& cfg, std::uint64_t seed,
                               SupportMode mode = SupportMode::uniform);

/// E[|A1 h|^2] over unit-variance taps on the channel's support.
double expected_signal_energy(const CMatrix& a1, const SparseChannel& h);
/// Noise variance giving snr_db = E[|A1 h|^2] / (rows * sigma^2).
NoiseSpec noise_for_snr(double snr_db, double signal_energy, Index rows);

CVector received_signal(const CMatrix& a1, const CVector& h, const NoiseSpec& noise,
                        std::uint64_t seed);
CVector received_signal(const CMatrix& a1, const SparseChannel& h, const NoiseSpec& noise,
                        std::uint64_t seed);

/// Unit-variance circular complex Gaussian vector.
CVector complex_gaussian(Index size, std::uint64_t seed);

MeasurementSelection select_samples(const SystemConfig& cfg, int per_rx, std::uint64_t seed);
MeasurementSelection full_selection(const SystemConfig& cfg);

CMatrix row_subsample(const CMatrix& a, const MeasurementSelection& sel);
CVector row_subsample(const CVector& r, const MeasurementSelection& sel);

/// Builds only the selected rows of A1 or A2. The right-hand factors
/// G X (I kron F2) are cached per theta; per call only the selected rows of
/// D F1 are evaluated, so a grid point costs one |sel| x N times N x W product.
class SubsampledModel {
 public:
  SubsampledModel(const SystemConfig& cfg, const PilotBlock& pilots);

  CMatrix a1_rows(const ImpairmentParams& params, const MeasurementSelection& sel) const;
  CMatrix a2_rows(double epsilon, double eta, const MeasurementSelection& sel) const;

  const SystemConfig& config() const { return cfg_; }

 private:
  CMatrix rows_of(const CMatrix& right, double epsilon, double eta,
                  const MeasurementSelection& sel) const;
  CMatrix a1_right(int theta) const;

  SystemConfig cfg_;
  CMatrix pilots_;
  CMatrix a2_right_;
  std::vector<CMatrix> a1_right_;  // indexed by theta in [0, theta_max]
};

}  // namespace sparsesync
