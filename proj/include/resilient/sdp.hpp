#pragma once

// Small dense semidefinite programs solved with a log-barrier interior-point
// method (phase I feasibility search followed by a central-path phase II).
//
//   maximize    c^T y
//   subject to  F_j(y) = F_j0 + sum_i y_i F_ji  >= 0   (PSD), j = 1..J
//
// Scalar linear inequalities are 1x1 blocks. Iterates stay strictly inside
// every cone, so any returned point is a strictly feasible certificate.

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace resilient::sdp {

struct MatrixInequality {
  Eigen::MatrixXd constant;
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;  // (variable index, coefficient)

  int size() const { return static_cast<int>(constant.rows()); }
};

struct Problem {
  int num_variables = 0;
  Eigen::VectorXd objective;  // maximized
  std::vector<MatrixInequality> constraints;
  Eigen::VectorXd start;  // optional phase I starting point (any y)
};

struct Settings {
  double gap_tolerance = 1e-9;    // stop when the barrier duality gap bound is below this
  double acceptable_gap = 1e-6;   // a stalled solve with a smaller gap still counts as optimal
  double barrier_growth = 20.0;
  int max_newton_steps = 3000;
  double divergence_limit = 1e12;
};

enum class Status { kOptimal, kInfeasible, kNumericalFailure };

const char* to_string(Status status);

struct Solution {
  Status status = Status::kNumericalFailure;
  Eigen::VectorXd y;      // empty when no strictly feasible point was found
  double objective = 0.0;
  double gap_bound = 0.0;
  int newton_steps = 0;
  double min_eigenvalue = 0.0;  // smallest eigenvalue over all F_j(y)
};

Eigen::MatrixXd evaluate(const MatrixInequality& lmi, const Eigen::VectorXd& y);

Solution maximize(const Problem& problem, const Settings& settings = {});

}  // namespace resilient::sdp
