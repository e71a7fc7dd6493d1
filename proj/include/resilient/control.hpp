#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "resilient/model.hpp"

namespace resilient {

struct AgcGains {
  double frequency_bias = 0.0;  // B [pu/Hz]
  double proportional = 0.0;    // K_P
  double integral = 0.0;        // K_I, applied per controller step
  Eigen::VectorXd participation;  // beta, sums to one

  void validate() const;
};

struct AgcCommand {
  double ace = 0.0;
  double agc = 0.0;
  Eigen::VectorXd raw;      // beta * AGC
  Eigen::VectorXd applied;  // raw clamped to the enforced bounds
  std::uint32_t saturated = 0;  // bit i set when channel i was clamped
};

/// Proportional-integral AGC with participation factors. Setpoints are
/// clamped per unit; the integral accumulates the unclamped ACE.
class AgcController {
 public:
  AgcController(AgcGains gains, Eigen::VectorXd enforced_bounds);

  /// ACE = -B * measured_df.
  double ace(double measured_df) const { return -gains_.frequency_bias * measured_df; }

  AgcCommand step(double measured_df);

  /// Clamp arbitrary setpoints to the enforced bounds (local saturation).
  AgcCommand saturate(const Eigen::VectorXd& setpoints) const;

  void reset() { integral_state_ = 0.0; }
  double integral_state() const { return integral_state_; }
  void set_integral_state(double value) { integral_state_ = value; }

  const AgcGains& gains() const { return gains_; }
  const Eigen::VectorXd& enforced_bounds() const { return bounds_; }
  int num_channels() const { return static_cast<int>(bounds_.size()); }

 private:
  AgcGains gains_;
  Eigen::VectorXd bounds_;
  double integral_state_ = 0.0;
};

/// Piecewise-constant bounded disturbance: each dwell segment is uniform in
/// [-bound, bound].
struct DisturbanceModel {
  double bound = 0.0;
  int dwell_steps = 15;
  std::uint64_t seed = 0;
};

std::vector<double> generate_disturbance(const DisturbanceModel& dist, int steps);

struct NoAttack {};

/// Replaces the AGC setpoints; local saturation still applies. Attack
/// sequences shorter than a run end early and the controller resumes.
struct SetpointAttack {
  std::vector<Eigen::VectorXd> setpoints;
};

/// Adds delta(k) to the frequency measurement fed to the AGC.
struct SensorAttack {
  std::vector<double> injections;
};

using Attack = std::variant<NoAttack, SetpointAttack, SensorAttack>;

/// One row per sample: the state at `time` and the inputs held from then on.
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> setpoints;      // post-saturation
  std::vector<Eigen::VectorXd> raw_setpoints;  // pre-saturation
  std::vector<double> disturbance;
  std::vector<double> attack_signal;  // delta for sensor attacks, 0 otherwise
  std::vector<std::uint32_t> saturation;
  double final_time = 0.0;
  Eigen::VectorXd final_state;

  int rows() const { return static_cast<int>(times.size()); }
  int saturation_events() const;
  /// max |df| over all rows and the final state.
  double max_abs_frequency() const;
};

/// x(k+1) = A x(k) + B u(k) + H w(k) for k = 0..steps-1. The disturbance
/// sequence must cover `steps` entries.
Trajectory simulate_discrete(const DiscreteModel& model, AgcController controller,
                             std::span<const double> disturbance, int steps,
                             const Eigen::VectorXd& x0, const Attack& attack = NoAttack{});

struct ContinuousOptions {
  double sample_time = 2.0;  // controller period tau
  double end_time = 0.0;
  double step = 1e-3;        // RK4 step, must divide tau and be <= tau / 10
  int output_stride = 0;     // RK4 steps per output row; 0 = one row per controller update
};

/// RK4 integration of the continuous model with ZOH setpoints updated every
/// tau seconds. disturbance[k] is held over controller interval k.
Trajectory simulate_continuous(const ContinuousModel& model, AgcController controller,
                               const ContinuousOptions& options,
                               std::span<const double> disturbance, const Eigen::VectorXd& x0,
                               const Attack& attack = NoAttack{});

}  // namespace resilient
