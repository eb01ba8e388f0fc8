// linesfm: closed-loop simulation of active structure-from-motion for lines.
//
//   linesfm run --config <file> [--seed N] [--out DIR] [overrides...]
//   linesfm montecarlo --config <file> --runs N --out DIR
//   linesfm validate --config <file>
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 numerical abort.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "linesfm/config.hpp"
#include "linesfm/emit.hpp"
#include "linesfm/errors.hpp"
#include "linesfm/sim.hpp"

namespace {

using linesfm::Error;
using linesfm::ErrorKind;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Generation:
    case ErrorKind::InvalidInput:
      return kExitConfig;
    case ErrorKind::Io:
      return kExitIo;
    default:
      return kExitNumerical;
  }
}

// Overrides collected from flags, keyed like the config file.
struct Overrides {
  std::string config_path;
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, bool> flags;
};

int arity(const std::string& key) {
  if (key == "sigma_des_sq") return 2;
  if (key == "nu_init") return 3;
  return 1;
}

bool is_string_key(const std::string& key) {
  return key == "out" || key == "dof_mask" || key == "compensation";
}

bool is_flag_key(const std::string& key) {
  return key == "plots" || key == "diagnostic_true_chi";
}

void add_common(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* opt = cmd->add_option("--config", o.config_path, "JSON configuration file");
  if (config_required) opt->required();
  for (const auto& key : linesfm::config_keys()) {
    std::string names = "--" + key;
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != key) names += ",--" + dashed;
    if (is_flag_key(key)) {
      o.flags[key] = false;
      cmd->add_flag(names, o.flags[key], "set " + key + " to true");
    } else {
      cmd->add_option(names, o.values[key], "override " + key)->expected(arity(key));
    }
  }
}

json parse_value(const std::string& key, const std::string& text) {
  if (is_string_key(key)) return text;
  try {
    json v = json::parse(text);
    if (!v.is_number()) throw Error(ErrorKind::Config, key + ": expected a number");
    return v;
  } catch (const json::parse_error&) {
    throw Error(ErrorKind::Config, key + ": cannot parse '" + text + "' as a number");
  }
}

json merged_config(const Overrides& o) {
  json j = o.config_path.empty() ? json::object() : linesfm::load_config_file(o.config_path);
  if (!j.is_object()) throw Error(ErrorKind::Config, "<root>: configuration must be a JSON object");
  for (const auto& [key, vals] : o.values) {
    if (vals.empty()) continue;
    if (arity(key) == 1) {
      j[key] = parse_value(key, vals.front());
    } else {
      json arr = json::array();
      for (const auto& v : vals) arr.push_back(parse_value(key, v));
      j[key] = arr;
    }
  }
  for (const auto& [key, set] : o.flags) {
    if (set) j[key] = true;
  }
  return j;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("linesfm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("LINESFM_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

linesfm::RunConfig resolve(const Overrides& o) {
  const json given = merged_config(o);
  linesfm::RunConfig cfg = linesfm::parse_config(given);
  const char* env = std::getenv("LINESFM_LOG");
  cfg.verbosity = env ? env : "info";
  const json resolved = linesfm::to_json(cfg);
  for (const auto& key : linesfm::config_keys()) {
    spdlog::info("config {} = {}{}", key, resolved[key].dump(),
                 given.contains(key) ? "" : " (default)");
  }
  return cfg;
}

int cmd_run(const Overrides& o) {
  const linesfm::RunConfig cfg = resolve(o);
  const linesfm::Scenario scenario = linesfm::generate_scenario(cfg.scenario);
  const linesfm::RunRecord record = linesfm::run(scenario);
  linesfm::emit(record, cfg, cfg.out);
  for (std::size_t i = 0; i < record.lines.size(); ++i) {
    const auto& l = record.lines[i];
    std::cout << "line " << i << ": final |L - L_est| = "
              << linesfm::format_double(l.final_error) << ", convergence time = "
              << (l.convergence_time ? linesfm::format_double(*l.convergence_time) : "none")
              << " s\n";
  }
  if (record.aborted) {
    std::cerr << "aborted: " << record.abort_reason << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_montecarlo(const Overrides& o) {
  const linesfm::RunConfig cfg = resolve(o);
  const auto summary =
      linesfm::monte_carlo(cfg.scenario, cfg.runs, cfg.threads, cfg.success_threshold);
  linesfm::emit_montecarlo(summary, cfg, cfg.out);
  std::cout << "runs " << summary.n_runs << ", failures " << summary.failures
            << ", median final error " << linesfm::format_double(summary.final_error.median)
            << ", median convergence time "
            << linesfm::format_double(summary.convergence_time.median) << " s"
            << ", success fraction " << linesfm::format_double(summary.success_fraction)
            << '\n';
  return kExitOk;
}

int cmd_validate(const Overrides& o) {
  (void)resolve(o);
  std::cout << "ok\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Active structure-from-motion for 3D lines"};
  app.require_subcommand(1);

  Overrides run_o, mc_o, val_o;
  auto* run_cmd = app.add_subcommand("run", "simulate one scenario");
  add_common(run_cmd, run_o, false);
  auto* mc_cmd = app.add_subcommand("montecarlo", "simulate a batch of seeded scenarios");
  add_common(mc_cmd, mc_o, false);
  auto* val_cmd = app.add_subcommand("validate", "check a configuration file");
  add_common(val_cmd, val_o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run_o);
    if (*mc_cmd) return cmd_montecarlo(mc_o);
    return cmd_validate(val_o);
  } catch (const Error& e) {
    std::cerr << "error (" << linesfm::to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  }
}
