#include "resilient/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "resilient/error.hpp"
#include "resilient/lp.hpp"
#include "resilient/random.hpp"

namespace resilient {

const char* to_string(Direction d) { return d == Direction::kMaximize ? "max" : "min"; }

Direction parse_direction(const std::string& text) {
  if (text == "max" || text == "maximize") return Direction::kMaximize;
  if (text == "min" || text == "minimize") return Direction::kMinimize;
  throw ConfigError("direction must be 'max' or 'min' (got '" + text + "')");
}

const char* to_string(DisturbancePolicy p) {
  return p == DisturbancePolicy::kZero ? "zero" : "worst_case_constant";
}

DisturbancePolicy parse_disturbance_policy(const std::string& text) {
  if (text == "zero") return DisturbancePolicy::kZero;
  if (text == "worst_case_constant") return DisturbancePolicy::kWorstCaseConstant;
  throw ConfigError("disturbance policy must be 'zero' or 'worst_case_constant' (got '" + text +
                    "')");
}

std::vector<Eigen::VectorXd> random_setpoint_attack(const Eigen::VectorXd& bounds, int steps,
                                                    std::uint64_t seed) {
  if (steps < 1) throw ConfigError("attack horizon must be >= 1");
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(steps), Eigen::VectorXd(bounds.size()));
  for (auto& u : out) {
    for (Eigen::Index i = 0; i < bounds.size(); ++i) u(i) = rng.symmetric(bounds(i));
  }
  return out;
}

std::vector<Eigen::VectorXd> propagate(const DiscreteModel& model, const Eigen::VectorXd& x0,
                                       const std::vector<Eigen::VectorXd>& setpoints,
                                       const std::vector<double>& disturbance) {
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(setpoints.size() + 1);
  xs.push_back(x0);
  for (std::size_t k = 0; k < setpoints.size(); ++k) {
    const double w = k < disturbance.size() ? disturbance[k] : 0.0;
    xs.push_back(model.A * xs.back() + model.B * setpoints[k] + model.H.col(0) * w);
  }
  return xs;
}

namespace {

struct Sensitivity {
  std::vector<Eigen::RowVectorXd> rows;  // e1^T A^(N-1-k)
  Eigen::RowVectorXd free;               // e1^T A^N
};

Sensitivity sensitivity(const DiscreteModel& model, int horizon) {
  const int n = model.state_dim();
  Sensitivity s;
  s.rows.assign(static_cast<std::size_t>(horizon), Eigen::RowVectorXd());
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Unit(n, 0);
  for (int k = horizon - 1; k >= 0; --k) {
    s.rows[static_cast<std::size_t>(k)] = g;
    g = g * model.A;
  }
  s.free = g;
  return s;
}

struct Prepared {
  Eigen::VectorXd x0;
  Sensitivity sens;
  std::vector<double> disturbance;
  double sign = 1.0;
  std::vector<std::string> warnings;
};

Prepared prepare(const DiscreteModel& model, const Eigen::VectorXd& bounds,
                 const AttackOptions& options) {
  const int n = model.state_dim();
  if (options.horizon < 1) throw ConfigError("attack horizon must be >= 1");
  if (bounds.size() != model.input_dim()) throw ConfigError("bounds dimension mismatch");
  for (Eigen::Index i = 0; i < bounds.size(); ++i) {
    if (!(bounds(i) >= 0.0) || !std::isfinite(bounds(i))) {
      throw ConfigError("attack bounds must be finite and >= 0");
    }
  }
  Prepared p;
  p.x0 = options.initial_state.size() == 0 ? Eigen::VectorXd::Zero(n) : options.initial_state;
  if (p.x0.size() != n) throw ConfigError("initial state has wrong dimension");
  p.sign = options.direction == Direction::kMaximize ? 1.0 : -1.0;
  p.sens = sensitivity(model, options.horizon);

  const double rho = model.A.eigenvalues().cwiseAbs().maxCoeff();
  const double growth = std::pow(rho, options.horizon);
  if (!(growth <= 1e8)) {
    p.warnings.push_back("spectral radius^N = " + std::to_string(growth) +
                         "; the attack program is poorly conditioned");
  }

  p.disturbance.assign(static_cast<std::size_t>(options.horizon), 0.0);
  if (options.disturbance_policy == DisturbancePolicy::kWorstCaseConstant) {
    double gain = 0.0;
    for (const auto& g : p.sens.rows) gain += g.dot(model.H.col(0));
    const double w = (p.sign * gain >= 0.0 ? 1.0 : -1.0) * options.disturbance_bound;
    std::fill(p.disturbance.begin(), p.disturbance.end(), w);
  }
  return p;
}

double affine_part(const DiscreteModel& model, const Prepared& p) {
  double c = p.sens.free.dot(p.x0);
  for (std::size_t k = 0; k < p.sens.rows.size(); ++k) {
    c += p.sens.rows[k].dot(model.H.col(0)) * p.disturbance[k];
  }
  return c;
}

void finish(AttackResult& r, const std::vector<Eigen::VectorXd>& states) {
  r.final_state = states.back();
  r.achieved_deviation = r.final_state(0);
  r.peak_deviation = 0.0;
  for (const auto& x : states) r.peak_deviation = std::max(r.peak_deviation, std::abs(x(0)));
  if (std::abs(r.achieved_deviation - r.objective) > 1e-6 * (1.0 + std::abs(r.objective))) {
    r.warnings.push_back("simulated x1(N) differs from the program optimum");
  }
}

lp::Solution solve_box(const Eigen::VectorXd& c, const Eigen::VectorXd& limit) {
  lp::Problem prob;
  prob.objective = c;
  prob.constraint_matrix = Eigen::MatrixXd(0, c.size());
  prob.constraint_upper = Eigen::VectorXd(0);
  prob.lower = -limit;
  prob.upper = limit;
  lp::Solution sol = lp::maximize(prob);
  if (sol.status != lp::Status::kOptimal) {
    throw Error(std::string("attack program not solved: ") + lp::to_string(sol.status));
  }
  return sol;
}

}  // namespace

AttackResult optimal_setpoint_attack(const DiscreteModel& model, const Eigen::VectorXd& bounds,
                                     const AttackOptions& options) {
  Prepared p = prepare(model, bounds, options);
  const int m = model.input_dim();
  const int N = options.horizon;
  Eigen::VectorXd c(N * m), limit(N * m);
  for (int k = 0; k < N; ++k) {
    c.segment(k * m, m) = p.sign * (p.sens.rows[static_cast<std::size_t>(k)] * model.B).transpose();
    limit.segment(k * m, m) = bounds;
  }
  const lp::Solution sol = solve_box(c, limit);

  AttackResult r;
  r.warnings = std::move(p.warnings);
  r.lp_pivots = sol.pivots;
  r.disturbance = p.disturbance;
  for (int k = 0; k < N; ++k) r.setpoints.push_back(sol.x.segment(k * m, m));
  r.objective = affine_part(model, p) + p.sign * sol.objective;
  finish(r, propagate(model, p.x0, r.setpoints, r.disturbance));
  return r;
}

AttackResult bang_bang_setpoint_attack(const DiscreteModel& model, const Eigen::VectorXd& bounds,
                                       const AttackOptions& options) {
  Prepared p = prepare(model, bounds, options);
  const int m = model.input_dim();
  AttackResult r;
  r.warnings = std::move(p.warnings);
  r.disturbance = p.disturbance;
  r.objective = affine_part(model, p);
  for (int k = 0; k < options.horizon; ++k) {
    const Eigen::RowVectorXd gb = p.sens.rows[static_cast<std::size_t>(k)] * model.B;
    Eigen::VectorXd u(m);
    for (int i = 0; i < m; ++i) {
      const double s = p.sign * gb(i);
      u(i) = s > 0.0 ? bounds(i) : (s < 0.0 ? -bounds(i) : 0.0);
      r.objective += gb(i) * u(i);
    }
    r.setpoints.push_back(u);
  }
  finish(r, propagate(model, p.x0, r.setpoints, r.disturbance));
  return r;
}

AttackResult optimal_sensor_attack(const DiscreteModel& model, const AgcController& controller,
                                   const Eigen::VectorXd& bounds, const AttackOptions& options) {
  Prepared p = prepare(model, bounds, options);
  const AgcGains& gains = controller.gains();
  if (gains.participation.size() != model.input_dim()) {
    throw ConfigError("controller channel count does not match the model inputs");
  }
  const double gain = gains.proportional + gains.integral;
  if (gains.frequency_bias == 0.0 || gain == 0.0) {
    throw ConfigError("sensor attack requires a nonzero frequency bias and K_P + K_I");
  }
  const int N = options.horizon;
  const Eigen::VectorXd& beta = gains.participation;

  // |beta_i * AGC| <= bounds_i for every channel.
  double agc_limit = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (beta(i) > 0.0) agc_limit = std::min(agc_limit, bounds(i) / beta(i));
  }
  const Eigen::VectorXd b_beta = model.B * beta;
  Eigen::VectorXd c(N);
  for (int k = 0; k < N; ++k) c(k) = p.sign * p.sens.rows[static_cast<std::size_t>(k)].dot(b_beta);
  const lp::Solution sol = solve_box(c, Eigen::VectorXd::Constant(N, agc_limit));

  AttackResult r;
  r.warnings = std::move(p.warnings);
  r.lp_pivots = sol.pivots;
  r.disturbance = p.disturbance;
  r.objective = affine_part(model, p) + p.sign * sol.objective;

  // Recover delta: AGC(k) = (K_P + K_I) ACE(k) + K_I I(k-1), ACE = -B (x1 + delta).
  Eigen::VectorXd x = p.x0;
  double integral = controller.integral_state();
  for (int k = 0; k < N; ++k) {
    const double agc = sol.x(k);
    const double ace = (agc - gains.integral * integral) / gain;
    integral += ace;
    r.injections.push_back(-ace / gains.frequency_bias - x(0));
    r.setpoints.push_back(beta * agc);
    x = model.A * x + b_beta * agc + model.H.col(0) * r.disturbance[static_cast<std::size_t>(k)];
  }

  // The unsaturated loop is typically unstable, so a closed-loop replay would
  // amplify round-off. Check the controller map step by step instead.
  AgcController replay(gains, Eigen::VectorXd::Constant(beta.size(), 1e300));
  replay.set_integral_state(controller.integral_state());
  std::vector<Eigen::VectorXd> states = propagate(model, p.x0, r.setpoints, r.disturbance);
  double mismatch = 0.0;
  for (int k = 0; k < N; ++k) {
    const AgcCommand cmd =
        replay.step(states[static_cast<std::size_t>(k)](0) + r.injections[static_cast<std::size_t>(k)]);
    mismatch = std::max(mismatch, std::abs(cmd.agc - sol.x(k)) / (1.0 + std::abs(sol.x(k))));
  }
  if (mismatch > 1e-9) r.warnings.push_back("injection reconstruction mismatch " + std::to_string(mismatch));
  finish(r, states);
  return r;
}

}  // namespace resilient
