#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "linesfm/sim.hpp"

namespace linesfm {

/// Everything the CLI needs for one invocation. Parsed from a JSON object
/// whose keys mirror the fields below; missing keys take their defaults and
/// unknown keys are rejected.
struct RunConfig {
  ScenarioConfig scenario;
  std::string out = "out";
  bool plots = false;
  int runs = 50;                   // montecarlo only
  int threads = 0;                 // montecarlo worker threads, 0 = hardware
  double success_threshold = 0.01; // montecarlo success bound on the final error
  std::string verbosity = "info";  // from LINESFM_LOG, not a config key

  bool operator==(const RunConfig&) const = default;
};

/// Throws Error(Config) naming the offending key.
RunConfig parse_config(const nlohmann::json& object);

/// Reads `path`; an empty or whitespace-only file means "all defaults".
/// Throws Error(Config) for unreadable files and malformed JSON.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Config echo: parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

/// Keys accepted by parse_config, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace linesfm
