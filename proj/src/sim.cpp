#include "linesfm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <Eigen/QR>
#include <spdlog/spdlog.h>

#include "linesfm/dynamics.hpp"
#include "linesfm/errors.hpp"

namespace linesfm {

namespace {

constexpr int kMaxDraws = 1000;
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void config_error(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::Config, key + ": " + why);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const Vec3 v(normal(rng), normal(rng), normal(rng));
    const double n = v.norm();
    if (n > 1e-8) return v / n;
  }
}

double estimate_error(const PluckerLine& truth, const ObserverState& obs) {
  try {
    const PluckerLine est = recover({obs.h_hat, obs.chi_hat, obs.axis});
    return (truth.coordinates() - est.coordinates()).norm();
  } catch (const Error&) {
    return kInf;
  }
}

Vec6 estimate_coordinates(const ObserverState& obs) {
  try {
    return recover({obs.h_hat, obs.chi_hat, obs.axis}).coordinates();
  } catch (const Error&) {
    return Vec6::Constant(std::numeric_limits<double>::quiet_NaN());
  }
}

double constraint_drift(const PluckerLine& line) {
  return std::max({std::abs(line.d.norm() - 1.0), std::abs(line.h.norm() - 1.0),
                   std::abs(line.d.dot(line.h))});
}

}  // namespace

CameraVelocity apply_mask(const CameraVelocity& vel, const DofMask& mask) {
  CameraVelocity out = vel;
  for (int i = 0; i < 3; ++i) {
    if (!mask[i]) out.nu[i] = 0.0;
    if (!mask[i + 3]) out.omega[i] = 0.0;
  }
  return out;
}

void validate(const ScenarioConfig& c) {
  if (c.lines < 1) config_error("lines", "must be at least 1");
  if (!(c.cube_side > 0.0)) config_error("cube_side", "must be positive");
  if (!(c.z0 > 0.0)) config_error("z0", "must be positive (cube in front of the camera)");
  if (!(c.min_depth > 0.0)) config_error("min_depth", "must be positive");
  if (!(c.chi_hat_min <= c.chi_hat_max)) config_error("chi_hat_min", "must not exceed chi_hat_max");
  if (!std::isfinite(c.chi_hat_min) || !std::isfinite(c.chi_hat_max)) {
    config_error("chi_hat_max", "must be finite");
  }
  if (c.nu_init && !c.nu_init->allFinite()) config_error("nu_init", "must be finite");
  if (!(c.nu_init_speed > 0.0)) config_error("nu_init_speed", "must be positive");
  if (!(c.observer.alpha > 0.0)) config_error("alpha", "must be positive");
  if (!(c.observer.d2 > 0.0)) config_error("d2", "must be positive");
  if (!(c.control.k1 > 0.0)) config_error("k1", "must be positive");
  if (!(c.control.k2 > 0.0)) config_error("k2", "must be positive");
  if (!(c.control.sigma_des_sq.array() > 0.0).all()) {
    config_error("sigma_des_sq", "components must be positive");
  }
  if (!(c.control.damping > 0.0)) config_error("damping", "must be positive");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) config_error("dt", "must be positive");
  if (!(c.duration >= 0.0) || !std::isfinite(c.duration)) {
    config_error("duration", "must be non-negative");
  }
  if (c.duration > 0.0 && c.duration < c.dt) config_error("duration", "must be at least dt");
  if (!(c.noise.linear_std >= 0.0)) config_error("noise_linear_std", "must be non-negative");
  if (!(c.noise.angular_std >= 0.0)) config_error("noise_angular_std", "must be non-negative");
  if (!(c.convergence_fraction > 0.0 && c.convergence_fraction < 1.0)) {
    config_error("convergence_fraction", "must lie in (0, 1)");
  }
}

Scenario generate_scenario(const ScenarioConfig& config) {
  validate(config);
  Scenario out;
  out.config = config;
  std::mt19937_64 rng(config.seed);
  const double half = 0.5 * config.cube_side;
  std::uniform_real_distribution<double> lateral(-half, half);
  std::uniform_real_distribution<double> forward(config.z0, config.z0 + config.cube_side);
  std::uniform_real_distribution<double> chi_init(config.chi_hat_min, config.chi_hat_max);

  for (int i = 0; i < config.lines; ++i) {
    bool accepted = false;
    for (int draw = 0; draw < kMaxDraws && !accepted; ++draw) {
      const Vec3 p(lateral(rng), lateral(rng), forward(rng));
      const Vec3 d = random_unit(rng);
      const Vec3 n = moment_from_point(p, d);
      if (n.norm() < config.min_depth) continue;
      const PluckerLine line = binormalize({d, n});
      if (line.closest_point().z() <= 0.0) continue;
      out.lines.push_back(line);
      out.axes.push_back(dominant_axis(line.h));
      accepted = true;
    }
    if (!accepted) {
      throw Error(ErrorKind::Generation,
                  "no valid line after " + std::to_string(kMaxDraws) + " draws");
    }
  }
  for (int i = 0; i < config.lines; ++i) {
    const double a = chi_init(rng);
    const double b = chi_init(rng);
    out.chi_hat_init.emplace_back(a, b);
  }

  if (config.nu_init) {
    out.nu_init = *config.nu_init;
  } else {
    const int k = index(out.axes.front());
    out.nu_init = Vec3::Zero();
    out.nu_init[k] = std::copysign(config.nu_init_speed, out.lines.front().h[k]);
  }
  return out;
}

Vec3 least_squares_compensation(std::span<const Vec3> h, std::span<const Vec3> w) {
  // [h]_x^T [h]_x = I - h h^T for unit h.
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Mat3 p = Mat3::Identity() - h[i] * h[i].transpose();
    a += p;
    b += p * w[i];
  }
  Eigen::CompleteOrthogonalDecomposition<Mat3> cod;
  cod.setThreshold(1e-9);
  cod.compute(a);
  return cod.solve(b);
}

std::size_t sample_count(double duration, double dt) {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

namespace {

class ClosedLoop {
 public:
  explicit ClosedLoop(const Scenario& scenario)
      : sc_(scenario),
        cfg_(scenario.config),
        lines_(scenario.lines),
        noise_rng_(splitmix64(scenario.config.seed ^ 0x6e6f697365ULL)),
        previous_basis_(scenario.lines.size()),
        axis_warned_(scenario.lines.size(), false) {
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      observers_.push_back(
          initialize_observer(project(lines_[i]), sc_.chi_hat_init[i], sc_.axes[i]));
    }
    record_.seed = cfg_.seed;
    record_.axes = sc_.axes;
  }

  RunRecord execute() {
    const std::size_t n = sample_count(cfg_.duration, cfg_.dt);
    record_.samples.reserve(n);
    try {
      nu_ = apply_mask({sc_.nu_init, Vec3::Zero()}, cfg_.dof_mask).nu;
      update_command_inputs();
      omega_ = compensation();
      record_sample(0.0);
      for (std::size_t k = 1; k < n; ++k) {
        advance();
        record_sample(static_cast<double>(k) * cfg_.dt);
      }
    } catch (const Error& e) {
      record_.aborted = true;
      record_.abort_reason = std::string(to_string(e.kind())) + ": " + e.what();
      spdlog::warn("run (seed {}) aborted at t = {}: {}", cfg_.seed,
                   record_.samples.empty() ? 0.0 : record_.samples.back().t,
                   record_.abort_reason);
    }
    finish();
    return std::move(record_);
  }

 private:
  CameraVelocity commanded() const {
    return apply_mask({nu_, omega_}, cfg_.dof_mask);
  }

  CameraVelocity sensed(const CameraVelocity& cmd) {
    CameraVelocity out = cmd;
    if (cfg_.noise.linear_std > 0.0) {
      std::normal_distribution<double> lin(0.0, cfg_.noise.linear_std);
      for (int i = 0; i < 3; ++i) out.nu[i] += lin(noise_rng_);
    }
    if (cfg_.noise.angular_std > 0.0) {
      std::normal_distribution<double> ang(0.0, cfg_.noise.angular_std);
      for (int i = 0; i < 3; ++i) out.omega[i] += ang(noise_rng_);
    }
    return out;
  }

  // Eigen analysis of every line at the current measurement and nu.
  void update_command_inputs() {
    analyses_.clear();
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      const Vec3 h = project(lines_[i]);
      if (dominant_axis(h) != sc_.axes[i] && !axis_warned_[i]) {
        axis_warned_[i] = true;
        ++record_.diagnostics.axis_switch_lines;
        spdlog::warn("line {}: dominant h axis is no longer {} (t = {})", i,
                     to_string(sc_.axes[i]), time_);
      }
      auto a = eigen_analysis(h, nu_, sc_.axes[i], previous_basis_[i]);
      previous_basis_[i] = a.eigvecs;
      if (a.sigma_sq[0] < kExcitationTol * kExcitationTol) {
        if (record_.diagnostics.excitation_loss_steps++ == 0) {
          spdlog::warn("line {}: excitation lost (sigma_1^2 = {}) at t = {}", i,
                       a.sigma_sq[0], time_);
        }
      }
      analyses_.push_back(a);
    }
    aggregate_ = aggregate_multiline(analyses_);
    if (jacobian_rank(aggregate_.j_nu) == 0) {
      if (record_.diagnostics.rank_deficient_steps++ == 0) {
        spdlog::warn("eigenvalue Jacobian lost rank at t = {}; damped inverse in use", time_);
      }
    }
  }

  Vec3 compensation() const {
    std::vector<Vec3> h(lines_.size()), target(lines_.size());
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      h[i] = project(lines_[i]);
      const Vec3 chi = cfg_.diagnostic_true_chi
                           ? lines_[i].chi()
                           : expand_chi(h[i], observers_[i].chi_hat, sc_.axes[i]);
      target[i] = compensating_angular_velocity(h[i], nu_, chi);
    }
    switch (cfg_.compensation) {
      case CompensationStrategy::LeastSquares:
        return least_squares_compensation(h, target);
      case CompensationStrategy::Average:
        break;
    }
    Vec3 sum = Vec3::Zero();
    for (const Vec3& w : target) sum += w;
    return sum / static_cast<double>(lines_.size());
  }

  void advance() {
    const CameraVelocity cmd = commanded();
    const CameraVelocity meas = sensed(cmd);
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      observers_[i] =
          observer_step(observers_[i], project(lines_[i]), meas, cfg_.observer, cfg_.dt);
      lines_[i] = integrate_line(lines_[i], cmd, cfg_.dt);
    }
    time_ = static_cast<double>(++step_) * cfg_.dt;
    nu_ = velocity_command(aggregate_, nu_, cfg_.control, cfg_.dt);
    nu_ = apply_mask({nu_, Vec3::Zero()}, cfg_.dof_mask).nu;
    check_finite();
    update_command_inputs();
    omega_ = compensation();
    check_finite();
  }

  void check_finite() const {
    bool ok = nu_.allFinite() && omega_.allFinite();
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      ok = ok && observers_[i].h_hat.allFinite() && observers_[i].chi_hat.allFinite() &&
           lines_[i].coordinates().allFinite();
    }
    if (!ok) throw Error(ErrorKind::Divergence, fmt::format("non-finite state at t = {}", time_));
  }

  void record_sample(double t) {
    const CameraVelocity cmd = commanded();
    Sample s;
    s.t = t;
    s.nu = cmd.nu;
    s.omega = cmd.omega;
    s.sigma_sq_aggregate = aggregate_.sigma_sq;
    auto& diag = record_.diagnostics;
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      const PluckerLine& line = lines_[i];
      const ObserverState& obs = observers_[i];
      LineSample ls;
      ls.h = project(line);
      ls.h_hat = obs.h_hat;
      ls.chi = free_part(line.chi(), obs.axis);
      ls.chi_hat = obs.chi_hat;
      ls.err_h = ls.h - ls.h_hat;
      ls.err_chi = line.chi() - expand_chi(ls.h, obs.chi_hat, obs.axis);
      ls.sigma_sq = analyses_[i].sigma_sq;
      ls.plucker_error = estimate_error(line, obs);
      ls.h_dot = full_dynamics(line, cmd).h_dot;
      diag.max_h_dot = std::max(diag.max_h_dot, ls.h_dot.norm());
      diag.max_constraint_drift = std::max(diag.max_constraint_drift, constraint_drift(line));
      diag.max_h_hat_norm_drift =
          std::max(diag.max_h_hat_norm_drift, std::abs(obs.h_hat.norm() - 1.0));
      s.lines.push_back(ls);
    }
    record_.samples.push_back(std::move(s));
  }

  void finish() {
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      LineSummary sum;
      sum.axis = sc_.axes[i];
      sum.true_final = lines_[i].coordinates();
      sum.estimated_final = estimate_coordinates(observers_[i]);
      if (!record_.samples.empty()) {
        sum.initial_error = record_.samples.front().lines[i].plucker_error;
        sum.final_error = record_.samples.back().lines[i].plucker_error;
        const double threshold = cfg_.convergence_fraction * sum.initial_error;
        for (const auto& s : record_.samples) {
          if (s.lines[i].plucker_error < threshold) {
            sum.convergence_time = s.t;
            break;
          }
        }
      }
      record_.lines.push_back(sum);
    }
    if (record_.diagnostics.excitation_loss_steps > 0) {
      spdlog::info("excitation lost on {} line-steps", record_.diagnostics.excitation_loss_steps);
    }
    spdlog::debug("max |h_hat| norm drift {}", record_.diagnostics.max_h_hat_norm_drift);
  }

  const Scenario& sc_;
  const ScenarioConfig& cfg_;
  std::vector<PluckerLine> lines_;
  std::vector<ObserverState> observers_;
  std::mt19937_64 noise_rng_;
  std::vector<std::optional<Mat2>> previous_basis_;
  std::vector<bool> axis_warned_;
  std::vector<EigenAnalysis> analyses_;
  EigenAnalysis aggregate_;
  Vec3 nu_ = Vec3::Zero();
  Vec3 omega_ = Vec3::Zero();
  double time_ = 0.0;
  std::size_t step_ = 0;
  RunRecord record_;
};

}  // namespace

RunRecord run(const Scenario& scenario) {
  validate(scenario.config);
  if (scenario.lines.empty() || scenario.lines.size() != scenario.chi_hat_init.size() ||
      scenario.lines.size() != scenario.axes.size()) {
    throw Error(ErrorKind::InvalidInput, "scenario lines, estimates and axes disagree");
  }
  for (const auto& line : scenario.lines) {
    if (!line.satisfies_invariants(1e-9)) {
      throw Error(ErrorKind::InvalidLine, "scenario line violates Plücker invariants");
    }
  }
  return ClosedLoop(scenario).execute();
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi || values[lo] == values[hi]) return values[lo];
  if (std::isinf(values[hi])) return values[hi];
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::uint64_t run_seed(std::uint64_t master_seed, int index) {
  return splitmix64(master_seed + static_cast<std::uint64_t>(index));
}

RunSummary summarize(const RunRecord& record) {
  RunSummary out;
  out.seed = record.seed;
  out.failed = record.aborted;
  out.failure = record.abort_reason;
  out.final_error = 0.0;
  out.convergence_time = 0.0;
  for (const auto& line : record.lines) {
    out.line_final_errors.push_back(line.final_error);
    out.final_error = std::max(out.final_error, line.final_error);
    out.convergence_time =
        std::max(out.convergence_time, line.convergence_time.value_or(kInf));
  }
  if (!record.samples.empty()) out.final_sigma_sq = record.samples.back().sigma_sq_aggregate;
  if (record.aborted) {
    out.final_error = kInf;
    out.convergence_time = kInf;
  }
  return out;
}

MonteCarloSummary monte_carlo(const ScenarioConfig& config, int n_runs, int threads,
                              double success_threshold) {
  if (n_runs < 1) throw Error(ErrorKind::InvalidInput, "n_runs must be at least 1");
  validate(config);
  MonteCarloSummary out;
  out.master_seed = config.seed;
  out.n_runs = n_runs;
  out.success_threshold = success_threshold;
  out.runs.resize(static_cast<std::size_t>(n_runs));

  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < n_runs; i = next++) {
      ScenarioConfig cfg = config;
      cfg.seed = run_seed(config.seed, i);
      RunSummary& slot = out.runs[static_cast<std::size_t>(i)];
      try {
        slot = summarize(run(generate_scenario(cfg)));
      } catch (const Error& e) {
        slot.seed = cfg.seed;
        slot.failed = true;
        slot.failure = std::string(to_string(e.kind())) + ": " + e.what();
        slot.final_error = kInf;
        slot.convergence_time = kInf;
      }
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n_runs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<double> finals;
  std::vector<double> times;
  int successes = 0;
  for (const auto& r : out.runs) {
    if (r.failed) ++out.failures;
    finals.push_back(r.final_error);
    times.push_back(r.convergence_time);
    if (r.final_error < success_threshold) ++successes;
  }
  out.success_fraction = static_cast<double>(successes) / n_runs;
  out.final_error = {percentile(finals, 0.1), percentile(finals, 0.5), percentile(finals, 0.9)};
  out.convergence_time = {percentile(times, 0.1), percentile(times, 0.5), percentile(times, 0.9)};
  return out;
}

}  // namespace linesfm
