#pragma once

// Shared fixtures: the benchmark system and a cached synthesis result.

#include <Eigen/Dense>

#include "resilient/control.hpp"
#include "resilient/model.hpp"
#include "resilient/reachability.hpp"
#include "resilient/synthesis.hpp"

namespace testing {

inline resilient::PowerSystemParams benchmark_params() {
  resilient::PowerSystemParams p;
  p.inertia = 5.0;
  p.damping = 3.0;
  // gamma of generator 1 is not listed in the benchmark data; 0.5 pu is the default.
  p.generators = {{3.0, 0.8, 1.5, 0.5}, {0.5, 0.12, 0.5, 0.5}};
  p.storages = {{0.1, 0.2}, {0.1, 0.15}};
  p.disturbance_bound = 0.2;
  return p;
}

inline const resilient::DiscreteModel& benchmark_model() {
  static const resilient::DiscreteModel model =
      resilient::discretize(resilient::build_continuous(benchmark_params()), 2.0);
  return model;
}

inline resilient::Bounds benchmark_bounds() {
  const auto p = benchmark_params();
  return {p.power_rate_bounds(), p.disturbance_bound};
}

inline resilient::UnsafeSet benchmark_unsafe() { return resilient::UnsafeSet::frequency_limit(7, 0.2); }

inline resilient::SynthesisProblem benchmark_problem() {
  return {benchmark_model(), benchmark_bounds(), benchmark_unsafe(), resilient::default_a_grid()};
}

/// Synthesized once per test binary.
inline const resilient::ResilientResult& benchmark_result() {
  static const resilient::ResilientResult result = resilient::synthesize(benchmark_problem());
  return result;
}

inline resilient::AgcGains benchmark_gains() {
  return {10.0, 0.1, 10.0, Eigen::Vector4d(0.3, 0.4, 0.2, 0.1)};
}

inline Eigen::VectorXd frequency_state(double df, int n = 7) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(0) = df;
  return x;
}

inline resilient::DiscreteModel scalar_model(double a, double b, double h = 0.0) {
  resilient::DiscreteModel m;
  m.A = Eigen::MatrixXd::Constant(1, 1, a);
  m.B = Eigen::MatrixXd::Constant(1, 1, b);
  m.H = Eigen::MatrixXd::Constant(1, 1, h);
  m.sample_time = 1.0;
  return m;
}

}  // namespace testing
