#include "resilient/control.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "resilient/error.hpp"
#include "resilient/random.hpp"

namespace resilient {

void AgcGains::validate() const {
  if (!std::isfinite(frequency_bias) || !std::isfinite(proportional) || !std::isfinite(integral)) {
    throw ConfigError("controller gains must be finite");
  }
  if (participation.size() == 0) throw ConfigError("participation must be nonempty");
  if (participation.size() > 32) throw ConfigError("at most 32 controlled units are supported");
  for (Eigen::Index i = 0; i < participation.size(); ++i) {
    if (!(participation(i) >= 0.0)) {
      throw ConfigError("participation[" + std::to_string(i) + "] must be >= 0");
    }
  }
  if (std::abs(participation.sum() - 1.0) > 1e-9) {
    throw ConfigError("participation factors must sum to 1");
  }
}

AgcController::AgcController(AgcGains gains, Eigen::VectorXd enforced_bounds)
    : gains_(std::move(gains)), bounds_(std::move(enforced_bounds)) {
  gains_.validate();
  if (bounds_.size() != gains_.participation.size()) {
    throw ConfigError("enforced bounds and participation factors differ in length");
  }
  for (Eigen::Index i = 0; i < bounds_.size(); ++i) {
    if (!(bounds_(i) > 0.0) || !std::isfinite(bounds_(i))) {
      throw ConfigError("enforced_bounds[" + std::to_string(i) + "] must be finite and > 0");
    }
  }
}

AgcCommand AgcController::saturate(const Eigen::VectorXd& setpoints) const {
  if (setpoints.size() != bounds_.size()) throw ConfigError("setpoint dimension mismatch");
  AgcCommand cmd;
  cmd.raw = setpoints;
  cmd.applied = setpoints;
  for (Eigen::Index i = 0; i < setpoints.size(); ++i) {
    const double b = bounds_(i);
    if (setpoints(i) > b) {
      cmd.applied(i) = b;
      cmd.saturated |= 1u << i;
    } else if (setpoints(i) < -b) {
      cmd.applied(i) = -b;
      cmd.saturated |= 1u << i;
    }
  }
  return cmd;
}

AgcCommand AgcController::step(double measured_df) {
  const double e = ace(measured_df);
  integral_state_ += e;
  const double agc = gains_.proportional * e + gains_.integral * integral_state_;
  AgcCommand cmd = saturate(gains_.participation * agc);
  cmd.ace = e;
  cmd.agc = agc;
  return cmd;
}

std::vector<double> generate_disturbance(const DisturbanceModel& dist, int steps) {
  if (steps < 1) throw ConfigError("disturbance length must be >= 1");
  if (dist.dwell_steps < 1) throw ConfigError("disturbance dwell must be >= 1 step");
  if (!(dist.bound >= 0.0)) throw ConfigError("disturbance bound must be >= 0");
  Rng rng(dist.seed);
  std::vector<double> w(static_cast<std::size_t>(steps));
  double level = 0.0;
  for (int k = 0; k < steps; ++k) {
    if (k % dist.dwell_steps == 0) level = rng.symmetric(dist.bound);
    w[static_cast<std::size_t>(k)] = level;
  }
  return w;
}

int Trajectory::saturation_events() const {
  int events = 0;
  for (auto mask : saturation) events += std::popcount(mask);
  return events;
}

double Trajectory::max_abs_frequency() const {
  double m = 0.0;
  for (const auto& x : states) m = std::max(m, std::abs(x(0)));
  if (final_state.size() > 0) m = std::max(m, std::abs(final_state(0)));
  return m;
}

namespace {

void check_attack_dims(const Attack& attack, int m) {
  if (const auto* sp = std::get_if<SetpointAttack>(&attack)) {
    for (const auto& u : sp->setpoints) {
      if (u.size() != m) throw ConfigError("setpoint attack has wrong channel count");
    }
  }
}

// Setpoint and attack signal for controller update k.
AgcCommand command_at(AgcController& ctrl, const Attack& attack, int k, double df,
                      double* attack_signal) {
  *attack_signal = 0.0;
  const auto idx = static_cast<std::size_t>(k);
  if (const auto* sp = std::get_if<SetpointAttack>(&attack); sp && idx < sp->setpoints.size()) {
    return ctrl.saturate(sp->setpoints[idx]);
  }
  if (const auto* se = std::get_if<SensorAttack>(&attack); se && idx < se->injections.size()) {
    *attack_signal = se->injections[idx];
  }
  return ctrl.step(df + *attack_signal);
}

void push_row(Trajectory& traj, double t, const Eigen::VectorXd& x, const AgcCommand& cmd,
              double w, double attack_signal) {
  traj.times.push_back(t);
  traj.states.push_back(x);
  traj.setpoints.push_back(cmd.applied);
  traj.raw_setpoints.push_back(cmd.raw);
  traj.disturbance.push_back(w);
  traj.attack_signal.push_back(attack_signal);
  traj.saturation.push_back(cmd.saturated);
}

void check_common(int n, int m, const AgcController& ctrl, std::span<const double> disturbance,
                  int steps, const Eigen::VectorXd& x0, const Attack& attack) {
  if (steps < 0) throw ConfigError("number of steps must be >= 0");
  if (x0.size() != n) throw ConfigError("initial state has wrong dimension");
  if (ctrl.num_channels() != m) {
    throw ConfigError("controller channel count does not match the model inputs");
  }
  if (static_cast<int>(disturbance.size()) < steps) {
    throw ConfigError("disturbance sequence shorter than the simulation horizon");
  }
  check_attack_dims(attack, m);
}

}  // namespace

Trajectory simulate_discrete(const DiscreteModel& model, AgcController controller,
                             std::span<const double> disturbance, int steps,
                             const Eigen::VectorXd& x0, const Attack& attack) {
  const int n = model.state_dim();
  check_common(n, model.input_dim(), controller, disturbance, steps, x0, attack);
  Trajectory traj;
  Eigen::VectorXd x = x0;
  for (int k = 0; k < steps; ++k) {
    double delta = 0.0;
    const AgcCommand cmd = command_at(controller, attack, k, x(0), &delta);
    const double w = disturbance[static_cast<std::size_t>(k)];
    push_row(traj, k * model.sample_time, x, cmd, w, delta);
    x = model.A * x + model.B * cmd.applied + model.H.col(0) * w;
  }
  traj.final_time = steps * model.sample_time;
  traj.final_state = x;
  return traj;
}

Trajectory simulate_continuous(const ContinuousModel& model, AgcController controller,
                               const ContinuousOptions& options,
                               std::span<const double> disturbance, const Eigen::VectorXd& x0,
                               const Attack& attack) {
  const double tau = options.sample_time;
  const double dt = options.step;
  if (!(tau > 0.0)) throw ConfigError("sample time must be > 0");
  if (!(dt > 0.0) || dt >= tau) throw ConfigError("integration step must be in (0, tau)");
  if (dt > tau / 10.0 * (1.0 + 1e-12)) throw ConfigError("integration step must be <= tau / 10");
  const double ratio = tau / dt;
  const long substeps = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(substeps)) > 1e-9 * ratio) {
    throw ConfigError("integration step must divide the sample time");
  }
  if (!(options.end_time >= 0.0)) throw ConfigError("end time must be >= 0");
  const double updates_real = options.end_time / tau;
  const int updates = static_cast<int>(std::lround(updates_real));
  if (std::abs(updates_real - updates) > 1e-9 * std::max(1.0, updates_real)) {
    throw ConfigError("end time must be a multiple of the sample time");
  }
  const int n = model.state_dim();
  check_common(n, model.input_dim(), controller, disturbance, updates, x0, attack);
  const long stride = options.output_stride > 0 ? options.output_stride : substeps;

  const Eigen::VectorXd h = model.H.col(0);
  Trajectory traj;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), forcing(n);
  for (int k = 0; k < updates; ++k) {
    double delta = 0.0;
    const AgcCommand cmd = command_at(controller, attack, k, x(0), &delta);
    const double w = disturbance[static_cast<std::size_t>(k)];
    forcing = model.B * cmd.applied + h * w;
    for (long s = 0; s < substeps; ++s) {
      const long global = static_cast<long>(k) * substeps + s;
      if (global % stride == 0) {
        push_row(traj, static_cast<double>(global) * dt, x, cmd, w, delta);
      }
      k1 = model.A * x + forcing;
      k2 = model.A * (x + 0.5 * dt * k1) + forcing;
      k3 = model.A * (x + 0.5 * dt * k2) + forcing;
      k4 = model.A * (x + dt * k3) + forcing;
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  traj.final_time = updates * tau;
  traj.final_state = x;
  return traj;
}

}  // namespace resilient
