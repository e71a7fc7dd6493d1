#include "resilient/model.hpp"

#include <cmath>
#include <string>

#include "resilient/error.hpp"

namespace resilient {

namespace {

void require_positive(double value, const std::string& field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(field + " must be finite and > 0 (got " + std::to_string(value) + ")");
  }
}

}  // namespace

Eigen::VectorXd PowerSystemParams::power_rate_bounds() const {
  Eigen::VectorXd gamma(input_dim());
  int col = 0;
  for (const auto& g : generators) gamma(col++) = g.power_rate_bound;
  for (const auto& s : storages) gamma(col++) = s.power_rate_bound;
  return gamma;
}

void PowerSystemParams::validate() const {
  require_positive(inertia, "inertia");
  if (!(damping >= 0.0) || !std::isfinite(damping)) {
    throw ConfigError("damping must be finite and >= 0");
  }
  if (input_dim() < 1) {
    throw ConfigError("at least one generator or storage unit is required");
  }
  for (int j = 0; j < num_generators(); ++j) {
    const std::string prefix = "generators[" + std::to_string(j) + "].";
    require_positive(generators[j].turbine_time_constant, prefix + "T_t");
    require_positive(generators[j].governor_time_constant, prefix + "T_g");
    require_positive(generators[j].droop, prefix + "R");
    require_positive(generators[j].power_rate_bound, prefix + "gamma");
  }
  for (int i = 0; i < num_storages(); ++i) {
    const std::string prefix = "storages[" + std::to_string(i) + "].";
    require_positive(storages[i].time_constant, prefix + "T_ES");
    require_positive(storages[i].power_rate_bound, prefix + "gamma");
  }
  if (!(disturbance_bound >= 0.0) || !std::isfinite(disturbance_bound)) {
    throw ConfigError("disturbance_bound must be finite and >= 0");
  }
}

ContinuousModel build_continuous(const PowerSystemParams& params) {
  params.validate();
  const int ng = params.num_generators();
  const int nes = params.num_storages();
  const int n = params.state_dim();
  const int m = params.input_dim();
  const double M = params.inertia;

  ContinuousModel model;
  model.A = Eigen::MatrixXd::Zero(n, n);
  model.B = Eigen::MatrixXd::Zero(n, m);
  model.H = Eigen::MatrixXd::Zero(n, 1);

  const int f = 0;
  const auto pg = [](int j) { return 1 + j; };
  const auto xg = [ng](int j) { return 1 + ng + j; };
  const auto pes = [ng](int i) { return 1 + 2 * ng + i; };

  model.A(f, f) = -params.damping / M;
  model.H(f, 0) = -1.0 / M;  // w = dP_L - dP_RES
  model.state_labels.push_back("df");

  for (int j = 0; j < ng; ++j) {
    const auto& g = params.generators[j];
    model.A(f, pg(j)) = 1.0 / M;
    model.A(pg(j), pg(j)) = -1.0 / g.turbine_time_constant;
    model.A(pg(j), xg(j)) = 1.0 / g.turbine_time_constant;
    model.A(xg(j), f) = -1.0 / (g.governor_time_constant * g.droop);
    model.A(xg(j), xg(j)) = -1.0 / g.governor_time_constant;
    model.B(xg(j), j) = 1.0 / g.governor_time_constant;
  }
  for (int i = 0; i < nes; ++i) {
    const auto& s = params.storages[i];
    model.A(f, pes(i)) = 1.0 / M;
    model.A(pes(i), pes(i)) = -1.0 / s.time_constant;
    model.B(pes(i), ng + i) = 1.0 / s.time_constant;
  }

  for (int j = 0; j < ng; ++j) model.state_labels.push_back("dP_G" + std::to_string(j + 1));
  for (int j = 0; j < ng; ++j) model.state_labels.push_back("dX_gov" + std::to_string(j + 1));
  for (int i = 0; i < nes; ++i) model.state_labels.push_back("dP_ES" + std::to_string(i + 1));
  return model;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw ConfigError("matrix_exponential: matrix must be square");
  }
  if (!m.allFinite()) {
    throw ConfigError("matrix_exponential: non-finite entries");
  }
  const Eigen::Index n = m.rows();
  if (n == 0) return m;

  // Higham (2005), degree-13 diagonal Pade approximant.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const Eigen::MatrixXd a = m / std::ldexp(1.0, squarings);
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a4 * a2;

  const Eigen::MatrixXd u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                                  b[5] * a4 + b[3] * a2 + b[1] * ident;
  const Eigen::MatrixXd u = a * u_inner;
  const Eigen::MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                            b[2] * a2 + b[0] * ident;

  Eigen::MatrixXd result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

DiscreteModel discretize(const ContinuousModel& model, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ConfigError("discretize: sample time tau must be > 0");
  }
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (model.A.cols() != n || model.B.rows() != n || model.H.rows() != n || model.H.cols() != 1) {
    throw ConfigError("discretize: inconsistent model dimensions");
  }

  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(n + m + 1, n + m + 1);
  augmented.topLeftCorner(n, n) = model.A;
  augmented.block(0, n, n, m) = model.B;
  augmented.block(0, n + m, n, 1) = model.H;
  const Eigen::MatrixXd e = matrix_exponential(augmented * tau);

  DiscreteModel out;
  out.A = e.topLeftCorner(n, n);
  out.B = e.block(0, n, n, m);
  out.H = e.block(0, n + m, n, 1);
  out.sample_time = tau;
  return out;
}

}  // namespace resilient
