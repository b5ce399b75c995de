#include "sparsesync/experiment_config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace sparsesync {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

// Parse failures inside handlers are reported with the line by the caller.
struct ValueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double to_double(const std::string& s) {
  if (s.empty()) throw ValueError("expected a number, got empty value");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw ValueError("expected a number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  if (s.empty()) throw ValueError("expected an integer, got empty value");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw ValueError("expected an integer, got '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const long long v = to_integer(s);
  if (v < -2147483647LL || v > 2147483647LL) throw ValueError("integer out of range: '" + s + "'");
  return static_cast<int>(v);
}

std::uint64_t to_seed(const std::string& s) {
  if (s.empty() || s.front() == '-') throw ValueError("expected a nonnegative integer seed, got '" + s + "'");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw ValueError("expected an integer seed, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValueError("expected true/false, got '" + s + "'");
}

RealAxis to_real_axis(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 3) throw ValueError("expected 'min, max, step'");
  return {to_double(parts[0]), to_double(parts[1]), to_double(parts[2])};
}

IntAxis to_int_axis(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 3) throw ValueError("expected 'min, max, step'");
  return {to_int(parts[0]), to_int(parts[1]), to_int(parts[2])};
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename E>
E to_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ValueError("expected one of {" + names + "}, got '" + s + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"N", [](ExperimentConfig& c, const std::string& v) { c.sweep.system.n_subcarriers = to_int(v); }},
      {"n_tx", [](ExperimentConfig& c, const std::string& v) { c.sweep.system.n_tx = to_int(v); }},
      {"n_rx", [](ExperimentConfig& c, const std::string& v) { c.sweep.system.n_rx = to_int(v); }},
      {"channel_length", [](ExperimentConfig& c, const std::string& v) { c.sweep.system.channel_length = to_int(v); }},
      {"sparsity", [](ExperimentConfig& c, const std::string& v) { c.sweep.system.sparsity = to_int(v); }},
      {"theta_max", [](ExperimentConfig& c, const std::string& v) { c.sweep.system.theta_max = to_int(v); }},
      {"cp_len", [](ExperimentConfig& c, const std::string& v) { c.sweep.system.cp_len = to_int(v); }},
      {"eps_grid", [](ExperimentConfig& c, const std::string& v) { c.sweep.grids.eps = to_real_axis(v); }},
      {"eta_grid", [](ExperimentConfig& c, const std::string& v) { c.sweep.grids.eta = to_real_axis(v); }},
      {"theta_grid", [](ExperimentConfig& c, const std::string& v) { c.sweep.grids.theta = to_int_axis(v); }},
      {"snr_db",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.snr_db.clear();
         for (const auto& item : split_list(v)) c.sweep.snr_db.push_back(to_double(item));
       }},
      {"trials", [](ExperimentConfig& c, const std::string& v) { c.sweep.trials = to_int(v); }},
      {"samples_per_rx", [](ExperimentConfig& c, const std::string& v) { c.sweep.samples_per_rx = to_int(v); }},
      {"estimators",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.estimators.clear();
         for (const auto& item : split_list(v)) {
           const auto e = to_enum<ChannelEstimator>(
               item, {{"mlsp", ChannelEstimator::subspace_pursuit}, {"mlls", ChannelEstimator::least_squares}});
           if (c.sweep.runs(e)) throw ValueError("estimator '" + item + "' listed twice");
           c.sweep.estimators.push_back(e);
         }
       }},
      {"truth_mode",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.truth_mode = to_enum<TruthMode>(
             v, {{"on-grid", TruthMode::on_grid}, {"reference", TruthMode::reference}, {"random", TruthMode::random}});
       }},
      {"pilot_mode",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.pilot_mode = to_enum<PilotMode>(v, {{"fixed", PilotMode::fixed}, {"per-trial", PilotMode::per_trial}});
       }},
      {"selection_mode",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.selection_mode =
             to_enum<SelectionMode>(v, {{"per-trial", SelectionMode::per_trial}, {"fixed", SelectionMode::fixed}});
       }},
      {"channel_support",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.channel_support =
             to_enum<SupportMode>(v, {{"uniform", SupportMode::uniform}, {"anchored", SupportMode::anchored}});
       }},
      {"noiseless", [](ExperimentConfig& c, const std::string& v) { c.sweep.noiseless = to_bool(v); }},
      {"timing_p", [](ExperimentConfig& c, const std::string& v) { c.sweep.timing_p = to_int(v); }},
      {"master_seed", [](ExperimentConfig& c, const std::string& v) { c.sweep.master_seed = to_seed(v); }},
      {"workers", [](ExperimentConfig& c, const std::string& v) { c.sweep.workers = to_int(v); }},
      {"output_dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }},
  };
  return table;
}

ExperimentConfig defaults() {
  ExperimentConfig c;
  c.sweep.grids.eps = {-0.4, 0.4, 0.01};
  c.sweep.grids.eta = {-5e-3, 5e-3, 1e-4};
  c.sweep.grids.theta = {0, 5, 1};
  c.sweep.snr_db = {0, 5, 10, 15, 20, 25, 30};
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg = defaults();
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(origin, line_no, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(origin, line_no, "key '" + key + "' given twice");
    try {
      it->second(cfg, value);
    } catch (const ValueError& e) {
      throw ConfigError(origin, line_no, key + ": " + e.what());
    }
  }
  validate_config(cfg, origin);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void validate_config(const ExperimentConfig& cfg, const std::string& origin) {
  try {
    cfg.sweep.validate();
  } catch (const ModelError& e) {
    throw ConfigError(origin, 0, e.what());
  }
}

std::string write_config(const ExperimentConfig& cfg) {
  const SweepSettings& s = cfg.sweep;
  std::ostringstream out;
  auto axis = [](const RealAxis& a) { return fmt_double(a.min) + ", " + fmt_double(a.max) + ", " + fmt_double(a.step); };
  out << "N = " << s.system.n_subcarriers << "\n";
  out << "n_tx = " << s.system.n_tx << "\n";
  out << "n_rx = " << s.system.n_rx << "\n";
  out << "channel_length = " << s.system.channel_length << "\n";
  out << "sparsity = " << s.system.sparsity << "\n";
  out << "theta_max = " << s.system.theta_max << "\n";
  out << "cp_len = " << s.system.cp_len << "\n";
  out << "eps_grid = " << axis(s.grids.eps) << "\n";
  out << "eta_grid = " << axis(s.grids.eta) << "\n";
  out << "theta_grid = " << s.grids.theta.min << ", " << s.grids.theta.max << ", " << s.grids.theta.step << "\n";
  out << "snr_db = ";
  for (std::size_t i = 0; i < s.snr_db.size(); ++i) out << (i ? ", " : "") << fmt_double(s.snr_db[i]);
  out << "\n";
  out << "trials = " << s.trials << "\n";
  out << "samples_per_rx = " << s.samples_per_rx << "\n";
  out << "estimators = ";
  for (std::size_t i = 0; i < s.estimators.size(); ++i) out << (i ? ", " : "") << estimator_name(s.estimators[i]);
  out << "\n";
  out << "truth_mode = " << truth_mode_name(s.truth_mode) << "\n";
  out << "pilot_mode = " << pilot_mode_name(s.pilot_mode) << "\n";
  out << "selection_mode = " << selection_mode_name(s.selection_mode) << "\n";
  out << "channel_support = " << support_mode_name(s.channel_support) << "\n";
  out << "noiseless = " << (s.noiseless ? "true" : "false") << "\n";
  out << "timing_p = " << s.timing_p << "\n";
  out << "master_seed = " << s.master_seed << "\n";
  out << "workers = " << s.workers << "\n";
  if (!cfg.output_dir.empty()) out << "output_dir = " << cfg.output_dir << "\n";
  return out.str();
}

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
  const SweepSettings& x = a.sweep;
  const SweepSettings& y = b.sweep;
  return x.system == y.system && x.grids == y.grids && x.snr_db == y.snr_db && x.trials == y.trials &&
         x.samples_per_rx == y.samples_per_rx && x.estimators == y.estimators && x.truth_mode == y.truth_mode &&
         x.pilot_mode == y.pilot_mode && x.selection_mode == y.selection_mode &&
         x.channel_support == y.channel_support && x.noiseless == y.noiseless && x.timing_p == y.timing_p &&
         x.master_seed == y.master_seed && x.workers == y.workers && a.output_dir == b.output_dir;
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "results";
}

}  // namespace sparsesync
