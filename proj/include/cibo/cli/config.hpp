#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cibo/optimizer/optimizer.hpp"

namespace cibo {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TraceFormat { csv, jsonl };

struct ExperimentConfig {
  RunConfig run;
  Method method = Method::cibo;
  /// Seeds run.seed, run.seed + 1, ..., run.seed + seeds - 1.
  std::size_t seeds = 4;
  std::filesystem::path output_dir = "runs";
  TraceFormat format = TraceFormat::csv;
  /// Timing::none writes zero seconds, which makes trace files reproducible
  /// byte for byte.
  Timing timing = Timing::wall;

  void validate() const;
};

/// Ordered key=value pairs as read from a file or the command line.
using Settings = std::vector<std::pair<std::string, std::string>>;

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// skipped. Throws ConfigError with the line number on malformed lines.
Settings parse_settings(const std::string& text);
Settings read_settings_file(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// Settings of a shipped preset; throws ConfigError for unknown names.
Settings preset_settings(const std::string& name);

/// Builds a validated config. A `preset` key (from either list) is applied
/// first, then the file settings, then the overrides. `problem` must be set
/// by one of them. Unknown keys and bad values are reported by key name.
ExperimentConfig build_config(const Settings& file, const Settings& overrides = {});

/// Every recognized key, in a stable order.
std::vector<std::string> config_keys();

}  // namespace cibo
