#pragma once

// Dense two-phase primal simplex for small linear programs:
//
//   maximize c^T x  subject to  A x <= b,  lower <= x <= upper
//
// Infinite bounds are allowed. Sized for attack synthesis (a few hundred
// rows and columns).

#include <Eigen/Dense>

namespace resilient::lp {

struct Problem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd constraint_matrix;  // may have zero rows
  Eigen::VectorXd constraint_upper;
  Eigen::VectorXd lower;  // empty: all zero
  Eigen::VectorXd upper;  // empty: all +inf
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status status);

struct Solution {
  Status status = Status::kIterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
};

Solution maximize(const Problem& problem);

}  // namespace resilient::lp
