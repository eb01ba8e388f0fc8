#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linesfm/control.hpp"
#include "linesfm/geometry.hpp"
#include "linesfm/observer.hpp"

namespace linesfm {

/// How the angular velocity keeps several interpretation planes still.
enum class CompensationStrategy {
  Average,       // mean of the per-line (nu.h_i) chi_hat_i
  LeastSquares,  // omega minimizing sum_i |h_i-dot|^2 for the estimated chi
};

/// omega minimizing sum_i |(omega - w_i) x h_i|^2, where w_i is the
/// per-line compensation. The component along h is free for a single line;
/// the minimum-norm solution is returned.
Vec3 least_squares_compensation(std::span<const Vec3> h, std::span<const Vec3> w);

/// Zero-mean Gaussian noise on the twist seen by the observer (odometry).
struct NoiseSpec {
  double linear_std = 0.0;   // m/s per axis
  double angular_std = 0.0;  // rad/s per axis

  bool operator==(const NoiseSpec&) const = default;
};

/// Actuated twist components, ordered nu_x, nu_y, nu_z, omega_x, omega_y, omega_z.
using DofMask = std::array<bool, 6>;

inline constexpr DofMask kAllDof{true, true, true, true, true, true};
/// Planar omnidirectional base: two linear and one angular component.
inline constexpr DofMask kOmnidirectionalBase{true, true, false, false, false, true};

CameraVelocity apply_mask(const CameraVelocity& vel, const DofMask& mask);

struct ScenarioConfig {
  int lines = 1;
  double cube_side = 3.0;   // m
  double z0 = 1.0;          // distance of the cube's near face, m
  double min_depth = 0.05;  // lines closer than this to the camera are redrawn, m
  double chi_hat_min = 0.1; // initial estimate range for each free chi component, 1/m
  double chi_hat_max = 1.0;
  std::optional<Vec3> nu_init;  // default: nu_init_speed along the first line's dominant h axis
  double nu_init_speed = 0.1;   // m/s
  ObserverGains observer;
  ControlGains control;
  double dt = 1e-3;       // s
  double duration = 5.0;  // s
  NoiseSpec noise;
  DofMask dof_mask = kAllDof;
  std::uint64_t seed = 1;
  double convergence_fraction = 0.05;  // converged once the error drops below this share of its initial value
  CompensationStrategy compensation = CompensationStrategy::Average;
  bool diagnostic_true_chi = false;  // compensate with the true chi instead of the estimate

  bool operator==(const ScenarioConfig&) const = default;
};

/// Throws Error(Config) naming the first invalid field.
void validate(const ScenarioConfig& config);

struct Scenario {
  ScenarioConfig config;
  std::vector<PluckerLine> lines;
  std::vector<Vec2> chi_hat_init;
  std::vector<Axis> axes;  // fixed elimination axis per line
  Vec3 nu_init = Vec3::Zero();
};

/// Lines through a uniform point of the cube [-s/2, s/2]^2 x [z0, z0 + s]
/// with a uniform direction. Draws whose closest point lies behind the
/// camera or nearer than min_depth are rejected.
Scenario generate_scenario(const ScenarioConfig& config);

struct LineSample {
  Vec3 h;
  Vec3 h_hat;
  Vec2 chi;      // true free components
  Vec2 chi_hat;  // estimated free components
  Vec3 err_h;    // h - h_hat
  Vec3 err_chi;  // full chi - reconstructed chi_hat
  Vec2 sigma_sq;
  double plucker_error = 0.0;  // |L - L_est| with L = [d; l h]
  Vec3 h_dot;    // true h-dot under the commanded twist
};

struct Sample {
  double t = 0.0;
  std::vector<LineSample> lines;
  Vec3 nu;
  Vec3 omega;
  Vec2 sigma_sq_aggregate;
};

struct LineSummary {
  Axis axis = Axis::Z;
  double initial_error = 0.0;
  double final_error = 0.0;
  std::optional<double> convergence_time;
  Vec6 true_final;
  Vec6 estimated_final;
};

struct RunDiagnostics {
  double max_h_dot = 0.0;             // over all lines and steps
  double max_constraint_drift = 0.0;  // |d|-1, |h|-1, d.h of the true lines
  double max_h_hat_norm_drift = 0.0;
  int excitation_loss_steps = 0;
  int rank_deficient_steps = 0;       // steps with J of rank 0
  int axis_switch_lines = 0;          // lines whose dominant h axis moved away from the fixed one
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<Axis> axes;
  std::vector<Sample> samples;
  std::vector<LineSummary> lines;
  RunDiagnostics diagnostics;
  bool aborted = false;
  std::string abort_reason;
};

/// Number of samples a run of `duration` at `dt` produces.
std::size_t sample_count(double duration, double dt);

/// Closed loop: observer, eigenvalue controller and omega compensation
/// driving the true line dynamics.
RunRecord run(const Scenario& scenario);

struct Percentiles {
  double p10 = 0.0;
  double median = 0.0;
  double p90 = 0.0;
};

/// Linear-interpolation percentile (q in [0, 1]); +inf entries sort last.
double percentile(std::vector<double> values, double q);

struct RunSummary {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  double final_error = 0.0;       // worst line
  double convergence_time = 0.0;  // slowest line, +inf if any never converged
  std::vector<double> line_final_errors;
  Vec2 final_sigma_sq = Vec2::Zero();  // aggregate at the end of the run
};

struct MonteCarloSummary {
  std::uint64_t master_seed = 0;
  int n_runs = 0;
  int failures = 0;
  double success_threshold = 0.01;
  double success_fraction = 0.0;  // runs with final error below success_threshold
  Percentiles final_error;
  Percentiles convergence_time;
  std::vector<RunSummary> runs;  // by run index
};

/// Seed used for run `index` of a Monte Carlo batch.
std::uint64_t run_seed(std::uint64_t master_seed, int index);

RunSummary summarize(const RunRecord& record);

/// Runs n_runs scenarios seeded from config.seed, in parallel when
/// threads > 1. Results are reduced by run index.
MonteCarloSummary monte_carlo(const ScenarioConfig& config, int n_runs, int threads = 0,
                              double success_threshold = 0.01);

}  // namespace linesfm
