#include "resilient/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "resilient/error.hpp"

namespace resilient {

const char* to_string(ChannelNormalization normalization) {
  return normalization == ChannelNormalization::kAllChannels ? "all_channels" : "inputs_only";
}

ChannelNormalization parse_channel_normalization(const std::string& text) {
  if (text == "all_channels") return ChannelNormalization::kAllChannels;
  if (text == "inputs_only") return ChannelNormalization::kInputsOnly;
  throw ConfigError("unknown channel normalization '" + text + "'");
}

const char* to_string(GridStatus status) {
  switch (status) {
    case GridStatus::kOptimal:
      return "optimal";
    case GridStatus::kInfeasible:
      return "infeasible";
    case GridStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

std::vector<double> make_grid(double start, double step, double end) {
  if (!(step > 0.0) || end < start) throw ConfigError("grid: need step > 0 and end >= start");
  std::vector<double> grid;
  const long count = static_cast<long>(std::floor((end - start) / step + 1e-6)) + 1;
  for (long k = 0; k < count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  return grid;
}

std::vector<double> default_a_grid() { return make_grid(0.02, 0.02, 0.98); }

StabilityReport check_schur_stability(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ConfigError("check_schur_stability: matrix must be square");
  StabilityReport report;
  if (a.rows() == 0) {
    report.stable = true;
    return report;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  report.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  report.stable = report.spectral_radius < 1.0 - 1e-9;
  return report;
}

void SynthesisProblem::validate() const {
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (model.A.cols() != n || model.B.rows() != n || model.H.rows() != n || model.H.cols() != 1) {
    throw ConfigError("synthesis: inconsistent model dimensions");
  }
  if (bounds.inputs.size() != m) throw ConfigError("synthesis: bound count must equal inputs");
  bounds.validate();
  if (unsafe.dim() != n) throw ConfigError("synthesis: unsafe set dimension mismatch");
  if (!(shape_cap > kShapeFloor)) throw ConfigError("synthesis: shape_cap must exceed the floor");
  if (a_grid.empty()) throw ConfigError("synthesis: a_grid is empty");
  for (double a : a_grid) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("synthesis: a_grid entries must lie in (0, 1)");
  }
  const auto stability = check_schur_stability(model.A);
  if (!stability.stable) {
    std::ostringstream msg;
    msg << "synthesis: A is not Schur stable (spectral radius " << stability.spectral_radius << ")";
    throw ConfigError(msg.str());
  }
}

int channel_count(int num_inputs, double gamma_w, ChannelNormalization normalization) {
  if (normalization == ChannelNormalization::kAllChannels && gamma_w > 0.0) return num_inputs + 1;
  return num_inputs;
}

Eigen::MatrixXd assemble_lmi(const DiscreteModel& model, const Eigen::MatrixXd& w,
                             const Eigen::VectorXd& r, double gamma_w, double a,
                             ChannelNormalization normalization) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (w.rows() != n || w.cols() != n || r.size() != m) {
    throw ConfigError("assemble_lmi: dimension mismatch");
  }
  const double k = (1.0 - a) / channel_count(m, gamma_w, normalization);
  const double gw2 = gamma_w * gamma_w;
  const int size = 2 * n + m + 1;
  const int ri = n;          // input block
  const int wi = n + m;      // disturbance row
  const int li = n + m + 1;  // last block

  Eigen::MatrixXd lmi = Eigen::MatrixXd::Zero(size, size);
  const Eigen::MatrixXd aw = model.A * w;
  const Eigen::MatrixXd br = model.B * r.asDiagonal();

  lmi.block(0, 0, n, n) = a * w;
  lmi.block(ri, ri, m, m) = k * Eigen::MatrixXd(r.asDiagonal());
  lmi(wi, wi) = k * gw2;
  lmi.block(li, li, n, n) = w;

  lmi.block(li, 0, n, n) = aw;
  lmi.block(0, li, n, n) = aw.transpose();
  lmi.block(li, ri, n, m) = br;
  lmi.block(ri, li, m, n) = br.transpose();
  lmi.block(li, wi, n, 1) = gw2 * model.H;
  lmi.block(wi, li, 1, n) = gw2 * model.H.transpose();
  return lmi;
}

namespace {

struct VariableLayout {
  int n = 0;
  int m = 0;
  int num_w = 0;
  std::vector<std::pair<int, int>> w_entries;  // (i, j), i <= j

  explicit VariableLayout(int n_, int m_) : n(n_), m(m_) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) w_entries.emplace_back(i, j);
    }
    num_w = static_cast<int>(w_entries.size());
  }

  int r_index(int i) const { return num_w + i; }
  int t_index(int i) const { return num_w + m + i; }
  int total() const { return num_w + 2 * m; }

  Eigen::MatrixXd basis(int v) const {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
    const auto [i, j] = w_entries[v];
    e(i, j) = 1.0;
    e(j, i) = 1.0;
    return e;
  }

  Eigen::MatrixXd shape(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd w(n, n);
    for (int v = 0; v < num_w; ++v) {
      const auto [i, j] = w_entries[v];
      w(i, j) = y(v);
      w(j, i) = y(v);
    }
    return w;
  }
};

Eigen::MatrixXd drop_index(const Eigen::MatrixXd& m, int index) {
  const Eigen::Index s = m.rows();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < s; ++i) {
    if (i != index) keep.push_back(i);
  }
  Eigen::MatrixXd out(keep.size(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    for (size_t j = 0; j < keep.size(); ++j) out(i, j) = m(keep[i], keep[j]);
  }
  return out;
}

sdp::Problem build_program(const SynthesisProblem& problem, double a, const VariableLayout& vars) {
  const int n = vars.n;
  const int m = vars.m;
  const double gw = problem.bounds.disturbance;
  const bool drop_disturbance = !(gw > 0.0);

  sdp::Problem program;
  program.num_variables = vars.total();
  program.objective = Eigen::VectorXd::Zero(vars.total());
  for (int i = 0; i < m; ++i) program.objective(vars.t_index(i)) = 1.0;

  // W - eps I >= 0
  {
    sdp::MatrixInequality c;
    c.constant = -kShapeFloor * Eigen::MatrixXd::Identity(n, n);
    for (int v = 0; v < vars.num_w; ++v) c.terms.emplace_back(v, vars.basis(v));
    program.constraints.push_back(std::move(c));
  }

  // shape_cap I - W >= 0
  {
    sdp::MatrixInequality c;
    c.constant = problem.shape_cap * Eigen::MatrixXd::Identity(n, n);
    for (int v = 0; v < vars.num_w; ++v) c.terms.emplace_back(v, -vars.basis(v));
    program.constraints.push_back(std::move(c));
  }

  // Block LMI, built from assemble_lmi itself so there is one definition.
  {
    const auto assemble = [&](const Eigen::MatrixXd& w, const Eigen::VectorXd& r) {
      Eigen::MatrixXd full = assemble_lmi(problem.model, w, r, gw, a, problem.normalization);
      return drop_disturbance ? drop_index(full, n + m) : full;
    };
    const Eigen::MatrixXd zero_w = Eigen::MatrixXd::Zero(n, n);
    const Eigen::VectorXd zero_r = Eigen::VectorXd::Zero(m);
    sdp::MatrixInequality c;
    c.constant = assemble(zero_w, zero_r);
    for (int v = 0; v < vars.num_w; ++v) {
      Eigen::MatrixXd coeff = assemble(vars.basis(v), zero_r) - c.constant;
      if (coeff.cwiseAbs().maxCoeff() > 0.0) c.terms.emplace_back(v, std::move(coeff));
    }
    for (int i = 0; i < m; ++i) {
      Eigen::MatrixXd coeff = assemble(zero_w, Eigen::VectorXd::Unit(m, i)) - c.constant;
      c.terms.emplace_back(vars.r_index(i), std::move(coeff));
    }
    program.constraints.push_back(std::move(c));
  }

  // r_i <= gamma_i^2
  for (int i = 0; i < m; ++i) {
    sdp::MatrixInequality c;
    const double g = problem.bounds.inputs(i);
    c.constant = Eigen::MatrixXd::Constant(1, 1, g * g);
    c.terms.emplace_back(vars.r_index(i), Eigen::MatrixXd::Constant(1, 1, -1.0));
    program.constraints.push_back(std::move(c));
  }

  // c^T W c <= g^2
  for (const auto& h : problem.unsafe.halfspaces()) {
    sdp::MatrixInequality c;
    c.constant = Eigen::MatrixXd::Constant(1, 1, h.offset * h.offset);
    for (int v = 0; v < vars.num_w; ++v) {
      const auto [i, j] = vars.w_entries[v];
      const double coeff = (i == j ? 1.0 : 2.0) * h.normal(i) * h.normal(j);
      if (coeff != 0.0) c.terms.emplace_back(v, Eigen::MatrixXd::Constant(1, 1, -coeff));
    }
    program.constraints.push_back(std::move(c));
  }

  // [[r_i, t_i], [t_i, 1]] >= 0, i.e. t_i^2 <= r_i
  for (int i = 0; i < m; ++i) {
    sdp::MatrixInequality c;
    c.constant = Eigen::MatrixXd::Zero(2, 2);
    c.constant(1, 1) = 1.0;
    Eigen::MatrixXd er = Eigen::MatrixXd::Zero(2, 2);
    er(0, 0) = 1.0;
    Eigen::MatrixXd et = Eigen::MatrixXd::Zero(2, 2);
    et(0, 1) = 1.0;
    et(1, 0) = 1.0;
    c.terms.emplace_back(vars.r_index(i), er);
    c.terms.emplace_back(vars.t_index(i), et);
    program.constraints.push_back(std::move(c));
  }

  // Phase I start: a small ball that respects the safety hyperplanes.
  double radius = 1.0;
  for (const auto& h : problem.unsafe.halfspaces()) {
    radius = std::min(radius, 0.5 * h.offset * h.offset / h.normal.squaredNorm());
  }
  program.start = Eigen::VectorXd::Zero(vars.total());
  for (int v = 0; v < vars.num_w; ++v) {
    if (vars.w_entries[v].first == vars.w_entries[v].second) program.start(v) = radius;
  }
  for (int i = 0; i < m; ++i) {
    program.start(vars.r_index(i)) = 0.25 * problem.bounds.inputs(i) * problem.bounds.inputs(i);
  }
  return program;
}

}  // namespace

FixedASolution solve_fixed_a(const SynthesisProblem& problem, double a,
                             const sdp::Settings& settings) {
  if (!(a > 0.0 && a < 1.0)) throw ConfigError("solve_fixed_a: a must lie in (0, 1)");
  const VariableLayout vars(problem.model.state_dim(), problem.model.input_dim());
  const sdp::Problem program = build_program(problem, a, vars);
  const sdp::Solution sol = sdp::maximize(program, settings);

  FixedASolution out;
  out.a = a;
  out.newton_steps = sol.newton_steps;
  out.gap_bound = sol.gap_bound;
  switch (sol.status) {
    case sdp::Status::kOptimal:
      out.status = GridStatus::kOptimal;
      break;
    case sdp::Status::kInfeasible:
      out.status = GridStatus::kInfeasible;
      return out;
    case sdp::Status::kNumericalFailure:
      out.status = GridStatus::kNumericalFailure;
      return out;
  }
  out.w = vars.shape(sol.y);
  out.r = Eigen::VectorXd(vars.m);
  for (int i = 0; i < vars.m; ++i) out.r(i) = sol.y(vars.r_index(i));
  out.objective = out.r.cwiseMax(0.0).cwiseSqrt().sum();
  return out;
}

ResilientResult synthesize(const SynthesisProblem& problem, const sdp::Settings& settings) {
  problem.validate();
  ResilientResult result;
  result.normalization = problem.normalization;
  int best = -1;
  FixedASolution best_solution;
  for (double a : problem.a_grid) {
    FixedASolution s = solve_fixed_a(problem, a, settings);
    if (s.status == GridStatus::kOptimal) {
      // Objectives within solver accuracy count as ties.
      const double tie = kObjectiveTieTolerance * std::max(1.0, std::fabs(best_solution.objective));
      const bool better = best < 0 || s.objective > best_solution.objective + tie ||
                          (s.objective >= best_solution.objective - tie && a < best_solution.a);
      if (better) {
        best = static_cast<int>(result.per_a.size());
        best_solution = s;
      }
    }
    s.w.resize(0, 0);
    result.per_a.push_back(std::move(s));
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << "no certificate on the a-grid (";
    for (size_t i = 0; i < result.per_a.size(); ++i) {
      if (i > 0) msg << ", ";
      msg << "a=" << result.per_a[i].a << ":" << to_string(result.per_a[i].status);
    }
    msg << "); reduce the disturbance bound or relax the unsafe offsets g_i";
    throw InfeasibleError(msg.str());
  }
  result.w = best_solution.w;
  result.r = best_solution.r;
  result.gamma_hat = best_solution.r.cwiseMax(0.0).cwiseSqrt();
  result.a = best_solution.a;
  result.objective = best_solution.objective;
  return result;
}

BoundingEllipsoid bounding_ellipsoid(const DiscreteModel& model, const Bounds& bounds,
                                     const Eigen::VectorXd& direction,
                                     const std::vector<double>& a_grid,
                                     ChannelNormalization normalization, double shape_cap,
                                     const sdp::Settings& settings) {
  bounds.validate();
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (direction.size() != n || !(direction.norm() > 0.0)) {
    throw ConfigError("bounding_ellipsoid: direction must be a nonzero state vector");
  }
  if (a_grid.empty()) throw ConfigError("bounding_ellipsoid: empty a-grid");
  if (!check_schur_stability(model.A).stable) throw ConfigError("bounding_ellipsoid: A is not Schur stable");
  const VariableLayout vars(n, m);
  const Eigen::VectorXd r = bounds.inputs.cwiseAbs2();
  const double gw = bounds.disturbance;
  const bool drop_disturbance = !(gw > 0.0);

  BoundingEllipsoid best;
  best.extent = std::numeric_limits<double>::infinity();
  for (double a : a_grid) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("bounding_ellipsoid: a must lie in (0, 1)");
    sdp::Problem program;
    program.num_variables = vars.num_w;
    program.objective = Eigen::VectorXd::Zero(vars.num_w);
    for (int v = 0; v < vars.num_w; ++v) {
      const auto [i, j] = vars.w_entries[v];
      program.objective(v) = -(i == j ? 1.0 : 2.0) * direction(i) * direction(j);
    }
    sdp::MatrixInequality lower, upper, lmi;
    lower.constant = -kShapeFloor * Eigen::MatrixXd::Identity(n, n);
    upper.constant = shape_cap * Eigen::MatrixXd::Identity(n, n);
    const auto assemble = [&](const Eigen::MatrixXd& w, const Eigen::VectorXd& rr) {
      Eigen::MatrixXd full = assemble_lmi(model, w, rr, gw, a, normalization);
      return drop_disturbance ? drop_index(full, n + m) : full;
    };
    lmi.constant = assemble(Eigen::MatrixXd::Zero(n, n), r);
    const Eigen::MatrixXd base = assemble(Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(m));
    for (int v = 0; v < vars.num_w; ++v) {
      lower.terms.emplace_back(v, vars.basis(v));
      upper.terms.emplace_back(v, -vars.basis(v));
      Eigen::MatrixXd coeff = assemble(vars.basis(v), Eigen::VectorXd::Zero(m)) - base;
      if (coeff.cwiseAbs().maxCoeff() > 0.0) lmi.terms.emplace_back(v, std::move(coeff));
    }
    program.constraints = {std::move(lower), std::move(upper), std::move(lmi)};
    program.start = Eigen::VectorXd::Zero(vars.num_w);
    for (int v = 0; v < vars.num_w; ++v) {
      if (vars.w_entries[v].first == vars.w_entries[v].second) program.start(v) = 0.5 * shape_cap;
    }
    const sdp::Solution sol = sdp::maximize(program, settings);
    if (sol.status != sdp::Status::kOptimal) continue;
    const Eigen::MatrixXd w = vars.shape(sol.y);
    const double extent = direction.dot(w * direction);
    if (extent < best.extent) best = {w, a, extent};
  }
  if (best.w.size() == 0) {
    throw InfeasibleError("no invariant ellipsoid within the shape cap on the a-grid");
  }
  return best;
}

CertificateReport verify_certificate(const DiscreteModel& model, const ResilientResult& result,
                                     const UnsafeSet& unsafe, const Bounds& bounds,
                                     const VerifyOptions& options) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (result.w.rows() != n || result.w.cols() != n || result.r.size() != m ||
      bounds.inputs.size() != m || unsafe.dim() != n) {
    throw ConfigError("verify_certificate: dimension mismatch");
  }
  CertificateReport report;

  // (i)
  {
    CertificateCheck c{"shape_positive_definite", false, 0.0, ""};
    const double asym = (result.w - result.w.transpose()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (result.w + result.w.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues()(0);
    c.residual = std::max(asym, -min_eig);
    c.passed = asym <= 1e-12 * std::max(1.0, result.w.cwiseAbs().maxCoeff()) && min_eig > 0.0;
    std::ostringstream d;
    d << "min eig(W) = " << min_eig << ", asymmetry = " << asym;
    c.detail = d.str();
    report.checks.push_back(c);
  }
  // (ii)
  {
    CertificateCheck c{"lmi_positive_semidefinite", false, 0.0, ""};
    const Eigen::MatrixXd lmi =
        assemble_lmi(model, result.w, result.r, bounds.disturbance, result.a, result.normalization);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmi, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues()(0);
    c.residual = -min_eig;
    c.passed = min_eig >= -1e-7;
    std::ostringstream d;
    d << "min eig(LMI) = " << min_eig;
    c.detail = d.str();
    report.checks.push_back(c);
  }
  // (iii)
  {
    CertificateCheck c{"safety_hyperplanes", true, -1e300, ""};
    std::ostringstream d;
    for (int j = 0; j < unsafe.size(); ++j) {
      const auto& h = unsafe.halfspaces()[j];
      const double margin = h.normal.dot(result.w * h.normal) - h.offset * h.offset;
      c.residual = std::max(c.residual, margin);
      if (margin > 1e-9) {
        c.passed = false;
        d << "c_" << j + 1 << "^T W c_" << j + 1 << " - g_" << j + 1 << "^2 = " << margin << "; ";
      }
    }
    if (c.passed) d << "max margin " << c.residual;
    c.detail = d.str();
    report.checks.push_back(c);
  }
  // (iv)
  {
    CertificateCheck c{"bounds_within_physical", true, -1e300, ""};
    std::ostringstream d;
    for (int i = 0; i < m; ++i) {
      const double excess = result.r(i) - bounds.inputs(i) * bounds.inputs(i);
      c.residual = std::max(c.residual, excess);
      if (excess > 1e-9 || result.r(i) < 0.0) {
        c.passed = false;
        d << "r_" << i + 1 << " - gamma_" << i + 1 << "^2 = " << excess << "; ";
      }
    }
    if (c.passed) d << "max excess " << c.residual;
    c.detail = d.str();
    report.checks.push_back(c);
  }
  // (v)
  {
    CertificateCheck c{"trajectory_invariance", false, 0.0, ""};
    if (report.checks.front().passed) {
      const Ellipsoid ellipsoid(0.5 * (result.w + result.w.transpose()));
      const Bounds certified{result.r.cwiseMax(0.0).cwiseSqrt(), bounds.disturbance};
      SamplingOptions sampling;
      sampling.trials = options.trials;
      sampling.horizon = options.horizon;
      sampling.seed = options.seed;
      sampling.strategy = InputStrategy::kMixed;
      const ContainmentScan scan = scan_reachable(model, certified, sampling, ellipsoid);
      report.max_lyapunov = scan.max_quadratic_form;
      c.residual = scan.max_quadratic_form - 1.0;
      c.passed = scan.max_quadratic_form <= 1.0 + 1e-6;
      std::ostringstream d;
      d << "max V(k) = " << scan.max_quadratic_form << " over " << scan.visited << " states";
      c.detail = d.str();
      if (options.initial_state) {
        report.initial_lyapunov = ellipsoid.quadratic_form(*options.initial_state);
        report.initial_outside = *report.initial_lyapunov > 1.0;
      }
    } else {
      c.detail = "skipped: W is not positive definite";
      c.residual = 1.0;
    }
    report.checks.push_back(c);
  }

  report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const CertificateCheck& c) { return c.passed; });
  return report;
}

}  // namespace resilient
