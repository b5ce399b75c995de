#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sparsesync/evaluation.hpp"
#include "sparsesync/experiment_config.hpp"

namespace sparsesync {

/// Artifacts written by run_sweep, in order.
inline const std::vector<std::string> kSweepCsvFiles = {"mse_cfo.csv", "mse_sfo.csv", "mse_channel.csv", "ptf.csv"};

/// CSV header for one artifact, given the estimators that ran.
std::string csv_header(const std::string& file, const std::vector<ChannelEstimator>& estimators);

/// Full CSV text (header plus one row per SNR point), LF line endings.
std::string csv_contents(const std::string& file, const SweepSummary& summary, const SweepSettings& settings);

std::string meta_contents(const ExperimentConfig& cfg, const std::string& output_dir);

/// Writes the four CSVs and meta.txt into `output_dir`, creating it.
/// Throws std::runtime_error when the directory is not writable.
void write_sweep_artifacts(const SweepSummary& summary, const ExperimentConfig& cfg, const std::string& output_dir);

/// Runs the sweep and writes artifacts; returns a process exit status.
int run_sweep(const ExperimentConfig& cfg, const std::string& output_dir, std::ostream& log);

/// One trial, printed human-readably.
int run_single(const ExperimentConfig& cfg, double snr_db, std::uint64_t seed, std::ostream& out);

/// Complexity table over L_m in {L/2, L, 2L} of the configured system;
/// writes bench.csv into output_dir and prints it.
int run_bench(const ExperimentConfig& cfg, int reps, const std::string& output_dir, std::ostream& out);

/// Configurations used by run_bench: channel length halved, kept, doubled,
/// with cp_len widened where needed to stay valid.
std::vector<SystemConfig> bench_configs(const SystemConfig& base);

}  // namespace sparsesync
