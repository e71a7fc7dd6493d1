#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "resilient/attacks.hpp"
#include "resilient/error.hpp"
#include "support.hpp"

using namespace resilient;

namespace {

AttackOptions opts(int horizon, Direction d = Direction::kMaximize) {
  AttackOptions o;
  o.horizon = horizon;
  o.direction = d;
  return o;
}

DiscreteModel random_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 5), inputs(1, 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = dim(rng);
  const int m = inputs(rng);
  DiscreteModel model;
  model.A = oracle::random_stable(n, 0.95, rng);
  model.B = Eigen::MatrixXd::NullaryExpr(n, m, [&] { return u(rng); });
  model.H = Eigen::MatrixXd::NullaryExpr(n, 1, [&] { return u(rng); });
  model.sample_time = 1.0;
  return model;
}

}  // namespace

TEST_CASE("option parsing") {
  CHECK(parse_direction("max") == Direction::kMaximize);
  CHECK(parse_direction("minimize") == Direction::kMinimize);
  CHECK_THROWS_AS(parse_direction("up"), ConfigError);
  CHECK(parse_disturbance_policy("worst_case_constant") == DisturbancePolicy::kWorstCaseConstant);
  CHECK_THROWS_AS(parse_disturbance_policy("bad"), ConfigError);
  CHECK(std::string(to_string(Direction::kMinimize)) == "min");
}

TEST_CASE("random attack stays in the box and is reproducible") {
  const Eigen::Vector3d b(0.1, 0.2, 0.0);
  const auto s = random_setpoint_attack(b, 40, 11);
  REQUIRE(s.size() == 40);
  for (const auto& u : s) CHECK(((u.cwiseAbs() - b).array() <= 0.0).all());
  CHECK(random_setpoint_attack(b, 40, 11) == s);
  CHECK(random_setpoint_attack(b, 40, 12) != s);
  CHECK_THROWS_AS(random_setpoint_attack(b, 0, 1), ConfigError);
}

TEST_CASE("scalar setpoint attack worked example") {
  // x+ = 0.5 x + u, |u| <= 1, N = 2: u = [1, 1] gives 0.5 + 1.
  const auto m = testing::scalar_model(0.5, 1.0);
  const auto r = optimal_setpoint_attack(m, Eigen::VectorXd::Ones(1), opts(2));
  CHECK(r.objective == doctest::Approx(1.5));
  CHECK(r.achieved_deviation == doctest::Approx(1.5));
  REQUIRE(r.setpoints.size() == 2);
  CHECK(r.setpoints[0](0) == doctest::Approx(1.0));
  CHECK(r.setpoints[1](0) == doctest::Approx(1.0));
  const auto lo = optimal_setpoint_attack(m, Eigen::VectorXd::Ones(1), opts(2, Direction::kMinimize));
  CHECK(lo.objective == doctest::Approx(-1.5));
  const auto zero = optimal_setpoint_attack(m, Eigen::VectorXd::Zero(1), opts(2));
  CHECK(zero.objective == doctest::Approx(0.0));
  CHECK_THROWS_AS(optimal_setpoint_attack(m, -Eigen::VectorXd::Ones(1), opts(2)), ConfigError);
  CHECK_THROWS_AS(optimal_setpoint_attack(m, Eigen::VectorXd::Ones(2), opts(2)), ConfigError);
}

TEST_CASE("property: linear program matches the bang-bang optimum") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> horizon(1, 30);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const DiscreteModel m = random_model(rng);
    Eigen::VectorXd b(m.input_dim());
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = u(rng);
    AttackOptions o = opts(horizon(rng), trial % 2 ? Direction::kMaximize : Direction::kMinimize);
    o.initial_state = Eigen::VectorXd::NullaryExpr(m.state_dim(), [&] { return u(rng) - 0.5; });
    if (trial % 3 == 0) {
      o.disturbance_policy = DisturbancePolicy::kWorstCaseConstant;
      o.disturbance_bound = 0.3;
    }
    const auto lp = optimal_setpoint_attack(m, b, o);
    const auto bb = bang_bang_setpoint_attack(m, b, o);
    CHECK(lp.objective == doctest::Approx(bb.objective).epsilon(1e-9));
    CHECK(lp.achieved_deviation == doctest::Approx(lp.objective).epsilon(1e-9));
    CHECK(lp.warnings.empty());
  }
}

TEST_CASE("property: exhaustive search agrees on short horizons") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    DiscreteModel m = random_model(rng);
    while (m.input_dim() > 2) m = random_model(rng);
    const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(m.input_dim(), [&] { return u(rng); });
    const int n = 1 + trial % 5;
    const auto r = optimal_setpoint_attack(m, b, opts(n));
    const double brute = oracle::brute_force_max_x1(m.A, m.B, b, Eigen::VectorXd::Zero(m.state_dim()), n);
    CHECK(r.objective == doctest::Approx(brute).epsilon(1e-9));
  }
}

TEST_CASE("property: worst case grows with the horizon and scales with the bounds") {
  const auto& m = testing::benchmark_model();
  const Eigen::VectorXd b = testing::benchmark_bounds().inputs;
  double previous = 0.0;
  for (int n = 1; n <= 60; n += 3) {
    const double v = optimal_setpoint_attack(m, b, opts(n)).objective;
    CHECK(v >= previous - 1e-12);
    previous = v;
  }
  const double base = optimal_setpoint_attack(m, b, opts(20)).objective;
  CHECK(optimal_setpoint_attack(m, 2.0 * b, opts(20)).objective == doctest::Approx(2.0 * base));
  // The unattacked system at rest never leaves the origin.
  CHECK(optimal_setpoint_attack(m, b, opts(20, Direction::kMinimize)).objective <= 0.0);
  CHECK(base >= 0.0);
}

TEST_CASE("benchmark attack values") {
  const auto& m = testing::benchmark_model();
  const Eigen::VectorXd phys = testing::benchmark_bounds().inputs;
  const Eigen::VectorXd res = testing::benchmark_result().gamma_hat;
  AgcController ctrl(testing::benchmark_gains(), phys);
  // Reference values from an independent dense implementation.
  CHECK(optimal_setpoint_attack(m, phys, opts(50, Direction::kMinimize)).objective ==
        doctest::Approx(-0.263471).epsilon(1e-5));
  CHECK(optimal_setpoint_attack(m, phys, opts(50)).objective == doctest::Approx(0.263471).epsilon(1e-5));
  const auto sp_res = optimal_setpoint_attack(m, res, opts(50, Direction::kMinimize));
  CHECK(sp_res.objective == doctest::Approx(-0.130085).epsilon(2e-3));
  CHECK(std::fabs(sp_res.peak_deviation) <= 0.2);
  CHECK(optimal_sensor_attack(m, ctrl, phys, opts(50, Direction::kMinimize)).objective ==
        doctest::Approx(-0.176471).epsilon(1e-5));
  const auto se_res = optimal_sensor_attack(m, ctrl, res, opts(50, Direction::kMinimize));
  CHECK(se_res.objective == doctest::Approx(-0.0763245).epsilon(2e-3));
  CHECK(se_res.warnings.empty());
}

TEST_CASE("property: resilient bounds defend against every horizon and direction") {
  const auto& m = testing::benchmark_model();
  const Eigen::VectorXd res = testing::benchmark_result().gamma_hat;
  AgcController ctrl(testing::benchmark_gains(), res);
  for (int n : {1, 5, 10, 25, 50, 100}) {
    for (Direction d : {Direction::kMaximize, Direction::kMinimize}) {
      AttackOptions o = opts(n, d);
      o.disturbance_policy = DisturbancePolicy::kWorstCaseConstant;
      o.disturbance_bound = 0.2;
      const auto sp = optimal_setpoint_attack(m, res, o);
      CHECK(sp.peak_deviation <= 0.2);
      const auto se = optimal_sensor_attack(m, ctrl, res, o);
      CHECK(se.peak_deviation <= 0.2);
      // The sensor channel only reaches setpoints along beta.
      CHECK(std::fabs(se.objective) <= std::fabs(sp.objective) + 1e-12);
    }
  }
}

TEST_CASE("sensor attack reconstruction") {
  const auto& m = testing::benchmark_model();
  AgcController ctrl(testing::benchmark_gains(), testing::benchmark_bounds().inputs);
  ctrl.set_integral_state(0.01);
  const Eigen::VectorXd b = testing::benchmark_bounds().inputs;
  AttackOptions o = opts(30);
  o.initial_state = testing::frequency_state(0.05);
  const auto r = optimal_sensor_attack(m, ctrl, b, o);
  REQUIRE(r.injections.size() == 30);
  CHECK(r.warnings.empty());
  // Every induced setpoint sits inside the box and lies along beta.
  const Eigen::VectorXd beta = testing::benchmark_gains().participation;
  const auto states = propagate(m, o.initial_state, r.setpoints, r.disturbance);
  AgcController replay(testing::benchmark_gains(), Eigen::Vector4d::Constant(1e9));
  replay.set_integral_state(0.01);
  for (int k = 0; k < 30; ++k) {
    CHECK(((r.setpoints[k].cwiseAbs() - b).array() <= 1e-12).all());
    const double agc = r.setpoints[k](0) / beta(0);
    CHECK((r.setpoints[k] - beta * agc).cwiseAbs().maxCoeff() < 1e-12);
    const auto cmd = replay.step(states[k](0) + r.injections[k]);
    CHECK(cmd.agc == doctest::Approx(agc).epsilon(1e-9));
  }
  CHECK(r.achieved_deviation == doctest::Approx(states.back()(0)));

  AgcGains no_bias = testing::benchmark_gains();
  no_bias.frequency_bias = 0.0;
  CHECK_THROWS_AS(optimal_sensor_attack(m, AgcController(no_bias, b), b, o), ConfigError);
}

TEST_CASE("one-step sensor attack hits a vertex of the command box") {
  // Single generator plus one storage unit, N = 3.
  PowerSystemParams p;
  p.inertia = 4.0;
  p.damping = 1.0;
  p.generators = {{0.5, 0.2, 0.05, 0.3}};
  p.storages = {{0.1, 0.1}};
  const auto m = discretize(build_continuous(p), 1.0);
  const AgcGains g{5.0, 0.5, 2.0, Eigen::Vector2d(0.7, 0.3)};
  const Eigen::Vector2d b(0.3, 0.1);
  const int n = 3;
  const auto r = optimal_sensor_attack(m, AgcController(g, b), b, opts(n));
  // max sum_k e1^T A^(N-1-k) B beta v_k subject to |beta_i v_k| <= b_i.
  Eigen::VectorXd c(n);
  Eigen::MatrixXd pw = Eigen::MatrixXd::Identity(m.state_dim(), m.state_dim());
  for (int k = n - 1; k >= 0; --k) {
    c(k) = (pw * m.B * g.participation)(0);
    pw = pw * m.A;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4 * n, n);
  Eigen::VectorXd rhs(4 * n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < 2; ++i) {
      a(4 * k + 2 * i, k) = g.participation(i);
      a(4 * k + 2 * i + 1, k) = -g.participation(i);
      rhs(4 * k + 2 * i) = rhs(4 * k + 2 * i + 1) = b(i);
    }
  }
  const auto best = oracle::vertex_enumeration_max(c, a, rhs);
  REQUIRE(best.has_value());
  CHECK(r.objective == doctest::Approx(*best).epsilon(1e-9));
}

TEST_CASE("growth warning on expanding dynamics") {
  const auto m = testing::scalar_model(1.5, 1.0);
  CHECK_FALSE(optimal_setpoint_attack(m, Eigen::VectorXd::Ones(1), opts(50)).warnings.empty());
  CHECK(optimal_setpoint_attack(m, Eigen::VectorXd::Ones(1), opts(10)).warnings.empty());
}
