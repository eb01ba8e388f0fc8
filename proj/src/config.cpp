#include "linesfm/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "linesfm/errors.hpp"

namespace linesfm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::Config, key + ": " + why);
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

long long as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<long long>();
}

template <int N>
Eigen::Matrix<double, N, 1> as_vector(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != N) {
    fail(key, "expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = as_double(v[static_cast<std::size_t>(i)], key);
  return out;
}

DofMask as_mask(const json& v, const std::string& key) {
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "all") return kAllDof;
    if (name == "omnidirectional-base") return kOmnidirectionalBase;
    fail(key, "unknown preset '" + name + "' (all, omnidirectional-base)");
  }
  if (!v.is_array() || v.size() != 6) {
    fail(key, "expected a preset name or an array of 6 booleans");
  }
  DofMask mask{};
  for (std::size_t i = 0; i < 6; ++i) mask[i] = as_bool(v[i], key);
  return mask;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "lines", "cube_side", "z0", "min_depth", "chi_hat_min", "chi_hat_max",
      "nu_init", "nu_init_speed", "alpha", "d2", "k1", "k2", "sigma_des_sq",
      "damping", "dt", "duration", "noise_linear_std", "noise_angular_std",
      "dof_mask", "seed", "convergence_fraction", "compensation",
      "diagnostic_true_chi", "out", "plots", "runs", "threads", "success_threshold"};
  return keys;
}

RunConfig parse_config(const json& object) {
  if (!object.is_object()) fail("<root>", "configuration must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [key, value] : object.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(key, "unknown key");
  }

  RunConfig out;
  ScenarioConfig& sc = out.scenario;
  const auto get = [&object](const char* key) -> const json* {
    const auto it = object.find(key);
    return it == object.end() ? nullptr : &*it;
  };

  if (const json* v = get("lines")) {
    const long long n = as_int(*v, "lines");
    if (n < 1 || n > 1000) fail("lines", "must be between 1 and 1000");
    sc.lines = static_cast<int>(n);
  }
  if (const json* v = get("cube_side")) sc.cube_side = as_double(*v, "cube_side");
  if (const json* v = get("z0")) sc.z0 = as_double(*v, "z0");
  if (const json* v = get("min_depth")) sc.min_depth = as_double(*v, "min_depth");
  if (const json* v = get("chi_hat_min")) sc.chi_hat_min = as_double(*v, "chi_hat_min");
  if (const json* v = get("chi_hat_max")) sc.chi_hat_max = as_double(*v, "chi_hat_max");
  if (const json* v = get("nu_init")) {
    if (v->is_null()) {
      sc.nu_init.reset();
    } else {
      sc.nu_init = as_vector<3>(*v, "nu_init");
    }
  }
  if (const json* v = get("nu_init_speed")) sc.nu_init_speed = as_double(*v, "nu_init_speed");
  if (const json* v = get("alpha")) sc.observer.alpha = as_double(*v, "alpha");
  if (const json* v = get("d2")) sc.observer.d2 = as_double(*v, "d2");
  if (const json* v = get("k1")) sc.control.k1 = as_double(*v, "k1");
  if (const json* v = get("k2")) sc.control.k2 = as_double(*v, "k2");
  if (const json* v = get("sigma_des_sq")) sc.control.sigma_des_sq = as_vector<2>(*v, "sigma_des_sq");
  if (const json* v = get("damping")) sc.control.damping = as_double(*v, "damping");
  if (const json* v = get("dt")) sc.dt = as_double(*v, "dt");
  if (const json* v = get("duration")) sc.duration = as_double(*v, "duration");
  if (const json* v = get("noise_linear_std")) sc.noise.linear_std = as_double(*v, "noise_linear_std");
  if (const json* v = get("noise_angular_std")) sc.noise.angular_std = as_double(*v, "noise_angular_std");
  if (const json* v = get("dof_mask")) sc.dof_mask = as_mask(*v, "dof_mask");
  if (const json* v = get("seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
      fail("seed", "expected a non-negative integer");
    }
    sc.seed = v->get<std::uint64_t>();
  }
  if (const json* v = get("convergence_fraction")) {
    sc.convergence_fraction = as_double(*v, "convergence_fraction");
  }
  if (const json* v = get("compensation")) {
    const std::string name = as_string(*v, "compensation");
    if (name == "average") {
      sc.compensation = CompensationStrategy::Average;
    } else if (name == "least-squares") {
      sc.compensation = CompensationStrategy::LeastSquares;
    } else {
      fail("compensation", "unknown strategy '" + name + "' (average, least-squares)");
    }
  }
  if (const json* v = get("diagnostic_true_chi")) {
    sc.diagnostic_true_chi = as_bool(*v, "diagnostic_true_chi");
  }
  if (const json* v = get("out")) {
    out.out = as_string(*v, "out");
    if (out.out.empty()) fail("out", "must not be empty");
  }
  if (const json* v = get("plots")) out.plots = as_bool(*v, "plots");
  if (const json* v = get("runs")) {
    const long long n = as_int(*v, "runs");
    if (n < 1 || n > std::numeric_limits<int>::max()) fail("runs", "must be at least 1");
    out.runs = static_cast<int>(n);
  }
  if (const json* v = get("threads")) {
    const long long n = as_int(*v, "threads");
    if (n < 0 || n > 4096) fail("threads", "must be between 0 and 4096");
    out.threads = static_cast<int>(n);
  }
  if (const json* v = get("success_threshold")) {
    out.success_threshold = as_double(*v, "success_threshold");
    if (!(out.success_threshold > 0.0)) fail("success_threshold", "must be positive");
  }

  validate(sc);
  return out;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("--config", "cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    return json::object();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail("--config", std::string("malformed JSON: ") + e.what());
  }
}

json to_json(const RunConfig& c) {
  const ScenarioConfig& sc = c.scenario;
  json j;
  j["lines"] = sc.lines;
  j["cube_side"] = sc.cube_side;
  j["z0"] = sc.z0;
  j["min_depth"] = sc.min_depth;
  j["chi_hat_min"] = sc.chi_hat_min;
  j["chi_hat_max"] = sc.chi_hat_max;
  if (sc.nu_init) {
    j["nu_init"] = {(*sc.nu_init)[0], (*sc.nu_init)[1], (*sc.nu_init)[2]};
  } else {
    j["nu_init"] = nullptr;
  }
  j["nu_init_speed"] = sc.nu_init_speed;
  j["alpha"] = sc.observer.alpha;
  j["d2"] = sc.observer.d2;
  j["k1"] = sc.control.k1;
  j["k2"] = sc.control.k2;
  j["sigma_des_sq"] = {sc.control.sigma_des_sq[0], sc.control.sigma_des_sq[1]};
  j["damping"] = sc.control.damping;
  j["dt"] = sc.dt;
  j["duration"] = sc.duration;
  j["noise_linear_std"] = sc.noise.linear_std;
  j["noise_angular_std"] = sc.noise.angular_std;
  j["dof_mask"] = json::array();
  for (bool b : sc.dof_mask) j["dof_mask"].push_back(b);
  j["seed"] = sc.seed;
  j["convergence_fraction"] = sc.convergence_fraction;
  j["compensation"] =
      sc.compensation == CompensationStrategy::LeastSquares ? "least-squares" : "average";
  j["diagnostic_true_chi"] = sc.diagnostic_true_chi;
  j["out"] = c.out;
  j["plots"] = c.plots;
  j["runs"] = c.runs;
  j["threads"] = c.threads;
  j["success_threshold"] = c.success_threshold;
  return j;
}

}  // namespace linesfm
