#pragma once

#include <stdexcept>
#include <string>

#include "sparsesync/evaluation.hpp"

namespace sparsesync {

/// Parse or validation failure; line is 0 when the problem is not tied to one line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& origin, int line, const std::string& message)
      : std::runtime_error(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ExperimentConfig {
  SweepSettings sweep;
  std::string output_dir;  // empty: $SPARSESYNC_OUTPUT_DIR, then "results"
};

/// Environment variable consulted when a config leaves output_dir empty.
inline constexpr const char* kOutputDirEnv = "SPARSESYNC_OUTPUT_DIR";

// Format: one `key = value` per line, `#` starts a comment, lists are
// comma-separated. Unknown or repeated keys are errors; omitted keys keep
// their defaults. See README for the key reference.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);
/// Writes every key, so parse_config(write_config(c)) == c.
std::string write_config(const ExperimentConfig& cfg);

/// Throws ConfigError naming the violated invariant.
void validate_config(const ExperimentConfig& cfg, const std::string& origin = "<config>");

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b);

std::string resolve_output_dir(const ExperimentConfig& cfg);

}  // namespace sparsesync
