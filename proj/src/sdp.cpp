#include "resilient/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "resilient/error.hpp"

namespace resilient::sdp {

const char* to_string(Status status) {
  switch (status) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

Eigen::MatrixXd evaluate(const MatrixInequality& lmi, const Eigen::VectorXd& y) {
  Eigen::MatrixXd value = lmi.constant;
  for (const auto& [index, coeff] : lmi.terms) value.noalias() += y(index) * coeff;
  return value;
}

namespace {

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Linear objective d^T z minimized over {z : G_j(z) > 0} by the barrier
/// method. Phase I and phase II are both instances of this.
class BarrierSolver {
 public:
  BarrierSolver(const std::vector<MatrixInequality>& constraints, Eigen::VectorXd objective,
                const Settings& settings)
      : constraints_(constraints), objective_(std::move(objective)), settings_(settings) {
    for (const auto& c : constraints_) total_dim_ += c.size();
  }

  /// Returns false if z is not strictly feasible.
  bool barrier_value(const Eigen::VectorXd& z, double& value) const {
    value = 0.0;
    for (const auto& c : constraints_) {
      Eigen::LLT<Eigen::MatrixXd> llt(evaluate(c, z));
      if (llt.info() != Eigen::Success) return false;
      const auto diag = llt.matrixLLT().diagonal();
      for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0) || !std::isfinite(diag(i))) return false;
        value -= 2.0 * std::log(diag(i));
      }
    }
    return true;
  }

  /// One damped Newton step on t d^T z + barrier(z). Returns the Newton
  /// decrement squared, or a negative value if no progress was possible.
  double newton_step(Eigen::VectorXd& z, double t) const {
    const Eigen::Index nv = z.size();
    Eigen::VectorXd grad = t * objective_;
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(nv, nv);
    std::vector<Eigen::MatrixXd> products;
    for (const auto& c : constraints_) {
      Eigen::LLT<Eigen::MatrixXd> llt(evaluate(c, z));
      if (llt.info() != Eigen::Success) return -1.0;
      // P_i = L^{-1} F_i L^{-T}: grad_i = -tr(P_i), hess_ik = <P_i, P_k>.
      const Eigen::Index size = c.constant.rows();
      const Eigen::MatrixXd l_inv =
          llt.matrixL().solve(Eigen::MatrixXd::Identity(size, size));
      products.clear();
      products.reserve(c.terms.size());
      for (const auto& [index, coeff] : c.terms) {
        products.push_back(l_inv * coeff * l_inv.transpose());
        grad(index) -= products.back().trace();
      }
      for (size_t p = 0; p < c.terms.size(); ++p) {
        for (size_t q = p; q < c.terms.size(); ++q) {
          const double h = products[p].cwiseProduct(products[q]).sum();
          const int i = c.terms[p].first;
          const int k = c.terms[q].first;
          hess(i, k) += h;
          if (p != q) hess(k, i) += h;
        }
      }
    }

    // Jacobi scaling keeps the factorization accurate as the barrier
    // parameter grows.
    Eigen::VectorXd scale = hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = scale.asDiagonal() * hess * scale.asDiagonal();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success) {
      const Eigen::VectorXd rhs = -(scale.asDiagonal() * grad);
      Eigen::VectorXd scaled_step = ldlt.solve(rhs);
      for (int refine = 0; refine < 2; ++refine) {
        scaled_step += ldlt.solve(rhs - scaled * scaled_step);
      }
      step = scale.asDiagonal() * scaled_step;
    }
    if (step.size() != nv || !step.allFinite()) {
      const Eigen::MatrixXd reg = scaled + 1e-12 * Eigen::MatrixXd::Identity(nv, nv);
      step = -(scale.asDiagonal() * reg.ldlt().solve(scale.asDiagonal() * grad));
      if (!step.allFinite()) return -1.0;
    }
    const double decrement_sq = -grad.dot(step);
    // Round-off makes tiny decrements noisy near the centre; treat as converged.
    constexpr double kTinyDecrement = 1e-6;
    if (!(decrement_sq >= 0.0)) return decrement_sq > -kTinyDecrement ? 0.0 : -1.0;

    double current = 0.0;
    if (!barrier_value(z, current)) return -1.0;
    current += t * objective_.dot(z);
    const double slope = grad.dot(step);
    double alpha = 1.0;
    while (alpha > 1e-16) {
      const Eigen::VectorXd trial = z + alpha * step;
      double value = 0.0;
      if (barrier_value(trial, value)) {
        value += t * objective_.dot(trial);
        if (value <= current + 0.01 * alpha * slope + 1e-13 * std::fabs(current)) {
          z = trial;
          return decrement_sq;
        }
      }
      alpha *= 0.5;
    }
    return decrement_sq < kTinyDecrement ? 0.0 : -1.0;
  }

  int total_dim() const { return total_dim_; }

 private:
  const std::vector<MatrixInequality>& constraints_;
  Eigen::VectorXd objective_;
  const Settings& settings_;
  int total_dim_ = 0;
};

double overall_min_eigenvalue(const std::vector<MatrixInequality>& constraints,
                              const Eigen::VectorXd& y) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) lowest = std::min(lowest, min_eigenvalue(evaluate(c, y)));
  return lowest;
}

}  // namespace

Solution maximize(const Problem& problem, const Settings& settings) {
  const int nv = problem.num_variables;
  if (problem.objective.size() != nv) throw ConfigError("sdp: objective size mismatch");
  for (const auto& c : problem.constraints) {
    if (c.constant.rows() != c.constant.cols()) throw ConfigError("sdp: non-square constraint");
    for (const auto& [index, coeff] : c.terms) {
      if (index < 0 || index >= nv) throw ConfigError("sdp: variable index out of range");
      if (coeff.rows() != c.constant.rows() || coeff.cols() != c.constant.cols()) {
        throw ConfigError("sdp: coefficient shape mismatch");
      }
    }
  }

  Solution solution;
  Eigen::VectorXd y = problem.start.size() == nv ? problem.start : Eigen::VectorXd::Zero(nv);

  // Phase I: minimize s subject to F_j(y) + s I > 0.
  const double start_min_eig = overall_min_eigenvalue(problem.constraints, y);
  if (!(start_min_eig > 0.0)) {
    std::vector<MatrixInequality> relaxed = problem.constraints;
    for (auto& c : relaxed) {
      c.terms.emplace_back(nv, Eigen::MatrixXd::Identity(c.size(), c.size()));
    }
    Eigen::VectorXd phase1_objective = Eigen::VectorXd::Zero(nv + 1);
    phase1_objective(nv) = 1.0;
    BarrierSolver phase1(relaxed, phase1_objective, settings);

    Eigen::VectorXd z(nv + 1);
    z.head(nv) = y;
    z(nv) = std::max(0.0, -start_min_eig) + 1.0;
    double t = 1.0;
    bool found = false;
    bool stalled = false;
    while (!found && !stalled) {
      for (int iter = 0; iter < 200; ++iter) {
        const double dec = phase1.newton_step(z, t);
        ++solution.newton_steps;
        if (dec < 0.0) {
          stalled = true;
          break;
        }
        if (dec * 0.5 <= 1e-10) break;
      }
      if (z(nv) < 0.0) {
        found = true;
        break;
      }
      const double gap = phase1.total_dim() / t;
      // Centred iterate: s* >= s - gap.
      if (z(nv) - gap > 0.0 || gap < settings.gap_tolerance * 1e-3 ||
          solution.newton_steps > settings.max_newton_steps) {
        break;
      }
      t *= settings.barrier_growth;
    }
    if (!found) {
      solution.status = stalled ? Status::kNumericalFailure : Status::kInfeasible;
      solution.min_eigenvalue = -z(nv);
      return solution;
    }
    y = z.head(nv);
  }

  // Phase II: central path on -c^T y.
  BarrierSolver phase2(problem.constraints, -problem.objective, settings);
  double t = 1.0;
  bool stalled = false;
  double gap = std::numeric_limits<double>::infinity();
  while (true) {
    for (int iter = 0; iter < 200; ++iter) {
      const double dec = phase2.newton_step(y, t);
      ++solution.newton_steps;
      if (dec < 0.0) {
        stalled = true;
        break;
      }
      if (dec * 0.5 <= 1e-10) break;
    }
    // The bound total_dim / t only holds for a centred iterate.
    if (!stalled) gap = phase2.total_dim() / t;
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > settings.divergence_limit) {
      solution.status = Status::kNumericalFailure;
      return solution;
    }
    if (stalled || gap < settings.gap_tolerance || solution.newton_steps > settings.max_newton_steps) {
      break;
    }
    t *= settings.barrier_growth;
  }

  solution.y = y;
  solution.objective = problem.objective.dot(y);
  solution.gap_bound = gap;
  solution.min_eigenvalue = overall_min_eigenvalue(problem.constraints, y);
  const bool converged = gap < settings.gap_tolerance;
  solution.status = (converged || gap <= settings.acceptable_gap) ? Status::kOptimal
                                                                  : Status::kNumericalFailure;
  return solution;
}

}  // namespace resilient::sdp
