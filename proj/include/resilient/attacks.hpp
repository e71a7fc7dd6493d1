#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilient/control.hpp"
#include "resilient/model.hpp"

namespace resilient {

enum class Direction { kMaximize, kMinimize };

/// Disturbance assumed while optimizing an attack. kWorstCaseConstant holds
/// w = +/-gamma_w with the sign that helps the attacker.
enum class DisturbancePolicy { kZero, kWorstCaseConstant };

const char* to_string(Direction d);
Direction parse_direction(const std::string& text);  // "max" | "min"
const char* to_string(DisturbancePolicy p);
DisturbancePolicy parse_disturbance_policy(const std::string& text);  // "zero" | "worst_case_constant"

struct AttackOptions {
  int horizon = 50;
  Direction direction = Direction::kMinimize;
  DisturbancePolicy disturbance_policy = DisturbancePolicy::kZero;
  double disturbance_bound = 0.0;  // used by kWorstCaseConstant
  Eigen::VectorXd initial_state;   // empty: origin
};

struct AttackResult {
  std::vector<Eigen::VectorXd> setpoints;  // per-step commanded setpoints
  std::vector<double> injections;          // sensor attacks only
  std::vector<double> disturbance;         // disturbance used
  double objective = 0.0;                  // LP optimum of x1(N)
  double achieved_deviation = 0.0;         // x1(N) from forward simulation
  double peak_deviation = 0.0;             // max_k |x1(k)|, k = 0..N
  Eigen::VectorXd final_state;
  int lp_pivots = 0;
  std::vector<std::string> warnings;
};

/// Uniform in [-bounds_i, bounds_i] per step and channel.
std::vector<Eigen::VectorXd> random_setpoint_attack(const Eigen::VectorXd& bounds, int steps,
                                                    std::uint64_t seed);

/// Linear program over setpoint sequences with |u_i(k)| <= bounds_i that
/// extremizes x1(N).
AttackResult optimal_setpoint_attack(const DiscreteModel& model, const Eigen::VectorXd& bounds,
                                     const AttackOptions& options);

/// Closed-form optimum u_i(k) = +/-bounds_i * sign([e1^T A^(N-1-k) B]_i).
AttackResult bang_bang_setpoint_attack(const DiscreteModel& model, const Eigen::VectorXd& bounds,
                                       const AttackOptions& options);

/// Frequency-measurement injection delta(k) that extremizes x1(N) while the
/// induced setpoints stay within `bounds`. The controller's gains and
/// integral state are used; its enforced bounds are not.
///
/// Since delta -> AGC command is a triangular bijection (for B != 0 and
/// K_P + K_I != 0), the program is solved over AGC commands and delta is
/// recovered afterwards.
AttackResult optimal_sensor_attack(const DiscreteModel& model, const AgcController& controller,
                                   const Eigen::VectorXd& bounds, const AttackOptions& options);

/// Forward simulation of setpoints applied without saturation; returns the
/// states x(0..N).
std::vector<Eigen::VectorXd> propagate(const DiscreteModel& model, const Eigen::VectorXd& x0,
                                       const std::vector<Eigen::VectorXd>& setpoints,
                                       const std::vector<double>& disturbance);

}  // namespace resilient
