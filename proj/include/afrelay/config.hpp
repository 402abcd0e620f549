#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "afrelay/montecarlo.hpp"

namespace afrelay {

/// Parse or validation error; line is 0 when not tied to a config line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

/// Parsed configuration plus which optional groups were set explicitly, so
/// commands can substitute their own defaults for the rest.
struct ConfigFile {
  ExperimentConfig experiment;
  bool direction_given = false;
  bool sweep_given = false;
  bool algorithms_given = false;
};

/// Line-oriented key=value text with [system], [sweep] and [run] sections.
/// See docs/formats.md for the grammar and keys.
ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::string& path);

/// `key=value` or `section.key=value`; applied after the file, re-validated.
void apply_override(ConfigFile& config, const std::string& assignment);

/// Throws ConfigError on inconsistent dims or non-positive counts.
void validate(const ExperimentConfig& config);

/// Default sweep for a direction: first hop {0,10,20,30} dB at 20 dB second hop
/// (downlink), the transpose for the uplink.
std::vector<SweepPoint> default_sweep(Direction direction);

}  // namespace afrelay
