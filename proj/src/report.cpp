#include "sparsesync/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sparsesync {

namespace {

std::string fmt_value(double v) {
  if (!std::isfinite(v)) return {};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9e", v);
  return buf;
}

std::string fmt_snr(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

enum class Metric { cfo, sfo, channel, ptf };

Metric metric_of(const std::string& file) {
  if (file == "mse_cfo.csv") return Metric::cfo;
  if (file == "mse_sfo.csv") return Metric::sfo;
  if (file == "mse_channel.csv") return Metric::channel;
  if (file == "ptf.csv") return Metric::ptf;
  throw std::invalid_argument("unknown artifact " + file);
}

std::vector<ChannelEstimator> ordered(const std::vector<ChannelEstimator>& estimators) {
  std::vector<ChannelEstimator> out;
  for (ChannelEstimator e : {ChannelEstimator::subspace_pursuit, ChannelEstimator::least_squares})
    if (std::find(estimators.begin(), estimators.end(), e) != estimators.end()) out.push_back(e);
  return out;
}

double metric_value(Metric m, const EstimatorStats& st) {
  switch (m) {
    case Metric::cfo: return st.mse_eps;
    case Metric::sfo: return st.mse_eta;
    case Metric::channel: return st.mse_h;
    case Metric::ptf: return st.ptf;
  }
  return std::nan("");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void print_estimate(std::ostream& out, const char* name, const EstimatorOutcome& o, const TrialRecord& rec) {
  out << name << ":\n";
  if (!o.ok) {
    out << "  failed: " << o.error << "\n";
    return;
  }
  const EstimationResult& r = o.result;
  const double rel = (r.h_hat - rec.h_true).norm() / rec.h_true.norm();
  out << std::setprecision(10);
  out << "  epsilon_hat = " << r.epsilon_hat << "\n";
  out << "  eta_hat     = " << r.eta_hat << "\n";
  out << "  theta_hat   = " << r.theta_hat << "\n";
  out << "  min J1      = " << r.min_cost_j1 << "  (" << r.j1_evals << " evaluations)\n";
  out << "  min J2      = " << r.min_cost_j2 << "  (" << r.j2_evals << " evaluations)\n";
  out << "  channel relative error = " << rel << "\n";
  out << "  failed grid points = " << r.failed_points << "\n";
  out << "  wall time   = " << o.wall_seconds << " s\n";
}

}  // namespace

std::string csv_header(const std::string& file, const std::vector<ChannelEstimator>& estimators) {
  const Metric m = metric_of(file);
  std::string h = "snr_db";
  for (ChannelEstimator e : ordered(estimators)) h += std::string(",") + estimator_name(e);
  if (m == Metric::cfo || m == Metric::sfo) h += ",crlb";
  if (m == Metric::channel) h += ",crlb_trace";
  h += ",trials";
  return h;
}

std::string csv_contents(const std::string& file, const SweepSummary& summary, const SweepSettings& settings) {
  const Metric m = metric_of(file);
  const auto est = ordered(settings.estimators);
  std::string text = csv_header(file, settings.estimators) + "\n";
  for (const SweepRow& row : summary.rows) {
    text += fmt_snr(row.snr_db);
    for (ChannelEstimator e : est) {
      const auto& st = row.stats(e);
      text += "," + (st ? fmt_value(metric_value(m, *st)) : std::string());
    }
    if (m == Metric::cfo) text += "," + fmt_value(row.crlb_eps);
    if (m == Metric::sfo) text += "," + fmt_value(row.crlb_eta);
    if (m == Metric::channel) text += "," + fmt_value(row.crlb_h);
    text += "," + std::to_string(row.trials) + "\n";
  }
  return text;
}

std::string meta_contents(const ExperimentConfig& cfg, const std::string& output_dir) {
  std::ostringstream out;
  out << "# sparsesync sweep metadata\n";
  out << "# rerun with: sparsesync sweep <this config>\n";
  out << write_config(cfg);
  out << "# resolved output directory: " << output_dir << "\n";
  out << "# theta shift applied to the estimator window: " << cfg.sweep.theta_shift() << "\n";
  out << "# timing failure threshold p: " << cfg.sweep.timing_p << "\n";
  out << "# units: epsilon and eta in normalized units (not ppm); channel MSE is |h_hat - h|^2 summed over taps\n";
  out << "# snr: E|A1 h|^2 / (N N_R sigma^2)\n";
  return out.str();
}

void write_sweep_artifacts(const SweepSummary& summary, const ExperimentConfig& cfg, const std::string& output_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + output_dir + ": " + ec.message());
  for (const std::string& file : kSweepCsvFiles)
    write_file(fs::path(output_dir) / file, csv_contents(file, summary, cfg.sweep));
  write_file(fs::path(output_dir) / "meta.txt", meta_contents(cfg, output_dir));
}

int run_sweep(const ExperimentConfig& cfg, const std::string& output_dir, std::ostream& log) {
  SweepSummary summary;
  try {
    summary = monte_carlo_sweep(cfg.sweep);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    write_sweep_artifacts(summary, cfg, output_dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 3;
  }
  for (const SweepRow& row : summary.rows) {
    log << "snr " << fmt_snr(row.snr_db) << " dB:";
    for (ChannelEstimator e : ordered(cfg.sweep.estimators)) {
      const auto& st = row.stats(e);
      if (!st) continue;
      log << "  " << estimator_name(e) << " ok=" << st->succeeded << " failed=" << st->failed
          << " mean_time=" << std::setprecision(3) << st->mean_wall_seconds << "s";
    }
    log << "\n";
  }
  log << "wrote " << output_dir << "\n";
  return 0;
}

int run_single(const ExperimentConfig& cfg, double snr_db, std::uint64_t seed, std::ostream& out) {
  SweepSettings s = cfg.sweep;
  s.master_seed = seed;
  const SystemConfig& sys = s.system;
  if (s.runs(ChannelEstimator::least_squares) && s.samples_per_rx * sys.n_rx < sys.channel_size()) {
    out << "warning: MLLS is under-determined: M*N_R = " << s.samples_per_rx * sys.n_rx << " < "
        << sys.channel_size() << " channel unknowns (L_m*N_T*N_R)\n";
  }
  TrialRecord rec;
  try {
    rec = run_trial(s, 0, snr_db, s.workers);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
  out << std::setprecision(10);
  out << "snr_db = " << snr_db << (s.noiseless ? " (noiseless)" : "") << "  sigma^2 = " << rec.sigma_sq << "\n";
  out << "seed = " << seed << "\n";
  out << "truth:\n";
  out << "  epsilon = " << rec.truth.epsilon << "\n";
  out << "  eta     = " << rec.truth.eta << "\n";
  out << "  theta   = " << rec.truth.theta << "\n";
  if (rec.mlsp) print_estimate(out, "mlsp", *rec.mlsp, rec);
  if (rec.mlls) print_estimate(out, "mlls", *rec.mlls, rec);
  if (rec.crlb) {
    out << "crlb:\n";
    out << "  epsilon = " << rec.crlb->crlb_eps << "\n";
    out << "  eta     = " << rec.crlb->crlb_eta << "\n";
    out << "  trace h = " << rec.crlb->trace_crlb_h << "\n";
  }
  return 0;
}

std::vector<SystemConfig> bench_configs(const SystemConfig& base) {
  std::vector<SystemConfig> out;
  for (int len : {std::max(base.sparsity, base.channel_length / 2), base.channel_length, base.channel_length * 2}) {
    SystemConfig c = base;
    c.channel_length = len;
    c.cp_len = std::max(base.cp_len, len + base.theta_max + 1);
    c.n_subcarriers = std::max(base.n_subcarriers, len + base.theta_max);
    out.push_back(c);
  }
  return out;
}

int run_bench(const ExperimentConfig& cfg, int reps, const std::string& output_dir, std::ostream& out) {
  std::vector<ComplexityRow> rows;
  try {
    rows = complexity_trend(bench_configs(cfg.sweep.system), reps, cfg.sweep.samples_per_rx);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
  std::string text = "dimension,sparsity,sp_seconds,ls_seconds\n";
  for (const ComplexityRow& r : rows)
    text += std::to_string(r.dimension) + "," + std::to_string(r.sparsity) + "," + fmt_value(r.sp_seconds) + "," +
            fmt_value(r.ls_seconds) + "\n";
  out << text;
  try {
    std::filesystem::create_directories(output_dir);
    write_file(std::filesystem::path(output_dir) / "bench.csv", text);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace sparsesync
