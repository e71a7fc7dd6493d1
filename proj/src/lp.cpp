#include "resilient/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "resilient/error.hpp"

namespace resilient::lp {

const char* to_string(Status status) {
  switch (status) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
    case Status::kIterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-12;

/// Tableau over x' >= 0 with rows  row . [x', slack, artificial] = rhs.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd body, Eigen::VectorXd rhs, std::vector<int> basis, int num_structural)
      : body_(std::move(body)), rhs_(std::move(rhs)), basis_(std::move(basis)),
        num_structural_(num_structural) {}

  /// Maximizes cost^T v over columns [0, allowed_cols). Returns kOptimal,
  /// kUnbounded or kIterationLimit.
  Status optimize(const Eigen::VectorXd& cost, int allowed_cols, int& pivots) {
    const int rows = static_cast<int>(body_.rows());
    // reduced[j] = c_B^T B^{-1} a_j - c_j; entering columns have reduced < 0.
    Eigen::VectorXd cb(rows);
    for (int r = 0; r < rows; ++r) cb(r) = cost(basis_[r]);
    Eigen::VectorXd reduced = body_.transpose() * cb - cost;

    int degenerate_run = 0;
    const int limit = 50 * (rows + allowed_cols) + 1000;
    for (int iter = 0; iter < limit; ++iter) {
      const double cost_scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
      const bool bland = degenerate_run > 50;
      int enter = -1;
      double best = -kCostTol * cost_scale;
      for (int j = 0; j < allowed_cols; ++j) {
        if (reduced(j) < best) {
          enter = j;
          if (bland) break;
          best = reduced(j);
        }
      }
      if (enter < 0) return Status::kOptimal;

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows; ++r) {
        const double a = body_(r, enter);
        if (a > kPivotTol) {
          const double ratio = rhs_(r) / a;
          if (ratio < best_ratio - 1e-14 ||
              (ratio <= best_ratio + 1e-14 && leave >= 0 && basis_[r] < basis_[leave])) {
            best_ratio = std::min(ratio, best_ratio);
            leave = r;
          }
        }
      }
      if (leave < 0) return Status::kUnbounded;
      degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;

      pivot(leave, enter);
      const double factor = reduced(enter);
      reduced -= factor * body_.row(leave).transpose();
      reduced(enter) = 0.0;
      ++pivots;
    }
    return Status::kIterationLimit;
  }

  void pivot(int row, int col) {
    const double p = body_(row, col);
    body_.row(row) /= p;
    rhs_(row) /= p;
    for (Eigen::Index r = 0; r < body_.rows(); ++r) {
      if (r == row) continue;
      const double f = body_(r, col);
      if (f != 0.0) {
        body_.row(r) -= f * body_.row(row);
        rhs_(r) -= f * rhs_(row);
        if (rhs_(r) < 0.0 && rhs_(r) > -1e-12) rhs_(r) = 0.0;
      }
    }
    basis_[row] = col;
  }

  /// Drives zero-level artificials (columns >= first_artificial) out of the
  /// basis where a structural or slack pivot exists.
  void expel_artificials(int first_artificial) {
    for (Eigen::Index r = 0; r < body_.rows(); ++r) {
      if (basis_[r] < first_artificial) continue;
      for (int j = 0; j < first_artificial; ++j) {
        if (std::fabs(body_(r, j)) > 1e-9) {
          pivot(static_cast<int>(r), j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd values(int cols) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(cols);
    for (size_t r = 0; r < basis_.size(); ++r) {
      if (basis_[r] < cols) v(basis_[r]) = rhs_(static_cast<Eigen::Index>(r));
    }
    return v;
  }

  int num_structural() const { return num_structural_; }

 private:
  Eigen::MatrixXd body_;
  Eigen::VectorXd rhs_;
  std::vector<int> basis_;
  int num_structural_;
};

}  // namespace

Solution maximize(const Problem& problem) {
  const Eigen::Index n = problem.objective.size();
  const Eigen::Index m0 = problem.constraint_matrix.rows();
  if (m0 > 0 && problem.constraint_matrix.cols() != n) throw ConfigError("lp: matrix width mismatch");
  if (problem.constraint_upper.size() != m0) throw ConfigError("lp: rhs size mismatch");
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd lower = problem.lower.size() == n ? problem.lower : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd upper =
      problem.upper.size() == n ? problem.upper : Eigen::VectorXd::Constant(n, inf);

  // x = offset + map * x', x' >= 0.
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(n);
  std::vector<std::pair<int, double>> columns;  // (original var, sign) per x'
  std::vector<std::pair<int, double>> extra_rows;  // x'_k <= value
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lower(j) > upper(j)) {
      Solution s;
      s.status = Status::kInfeasible;
      return s;
    }
    if (std::isfinite(lower(j))) {
      offset(j) = lower(j);
      columns.emplace_back(static_cast<int>(j), 1.0);
      if (std::isfinite(upper(j))) {
        extra_rows.emplace_back(static_cast<int>(columns.size() - 1), upper(j) - lower(j));
      }
    } else if (std::isfinite(upper(j))) {
      offset(j) = upper(j);
      columns.emplace_back(static_cast<int>(j), -1.0);
    } else {
      columns.emplace_back(static_cast<int>(j), 1.0);
      columns.emplace_back(static_cast<int>(j), -1.0);
    }
  }
  const int ns = static_cast<int>(columns.size());
  const int rows = static_cast<int>(m0 + extra_rows.size());

  Eigen::MatrixXd a_std = Eigen::MatrixXd::Zero(rows, ns);
  Eigen::VectorXd b_std(rows);
  for (int k = 0; k < ns; ++k) {
    const auto [var, sign] = columns[k];
    if (m0 > 0) a_std.block(0, k, m0, 1) = sign * problem.constraint_matrix.col(var);
  }
  if (m0 > 0) b_std.head(m0) = problem.constraint_upper - problem.constraint_matrix * offset;
  for (size_t e = 0; e < extra_rows.size(); ++e) {
    a_std(m0 + static_cast<Eigen::Index>(e), extra_rows[e].first) = 1.0;
    b_std(m0 + static_cast<Eigen::Index>(e)) = extra_rows[e].second;
  }
  Eigen::VectorXd c_std(ns);
  for (int k = 0; k < ns; ++k) c_std(k) = columns[k].second * problem.objective(columns[k].first);

  // Columns: structural | slack (one per row) | artificial (one per negative row).
  std::vector<int> negative_rows;
  for (int r = 0; r < rows; ++r) {
    if (b_std(r) < 0.0) negative_rows.push_back(r);
  }
  const int num_art = static_cast<int>(negative_rows.size());
  const int cols = ns + rows + num_art;
  Eigen::MatrixXd body = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd rhs = b_std;
  body.leftCols(ns) = a_std;
  body.block(0, ns, rows, rows).setIdentity();
  std::vector<int> basis(rows);
  for (int r = 0; r < rows; ++r) basis[r] = ns + r;
  for (int k = 0; k < num_art; ++k) {
    const int r = negative_rows[k];
    body.row(r) *= -1.0;
    rhs(r) *= -1.0;
    body(r, ns + rows + k) = 1.0;
    basis[r] = ns + rows + k;
  }

  Tableau tableau(std::move(body), std::move(rhs), std::move(basis), ns);
  Solution solution;
  if (num_art > 0) {
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(cols);
    phase1_cost.tail(num_art).setConstant(-1.0);
    const Status s = tableau.optimize(phase1_cost, cols, solution.pivots);
    const Eigen::VectorXd v = tableau.values(cols);
    const double infeasibility = v.tail(num_art).sum();
    if (s != Status::kOptimal || infeasibility > 1e-8 * std::max(1.0, b_std.cwiseAbs().maxCoeff())) {
      solution.status = s == Status::kIterationLimit ? s : Status::kInfeasible;
      return solution;
    }
    tableau.expel_artificials(ns + rows);
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  cost.head(ns) = c_std;
  solution.status = tableau.optimize(cost, ns + rows, solution.pivots);
  if (solution.status != Status::kOptimal) return solution;

  const Eigen::VectorXd v = tableau.values(ns);
  solution.x = offset;
  for (int k = 0; k < ns; ++k) solution.x(columns[k].first) += columns[k].second * v(k);
  solution.objective = problem.objective.dot(solution.x);
  return solution;
}

}  // namespace resilient::lp
