#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace resilient {

/// Synchronous generator with a first-order turbine and governor.
struct GeneratorParams {
  double turbine_time_constant = 0.0;   // T_t [s]
  double governor_time_constant = 0.0;  // T_g [s]
  double droop = 0.0;                   // R [Hz/pu]
  double power_rate_bound = 0.0;        // gamma [pu]
};

/// Energy storage unit modelled as a first-order lag.
struct StorageParams {
  double time_constant = 0.0;     // T_ES [s]
  double power_rate_bound = 0.0;  // gamma [pu]
};

/// Physical parameters of a single control area.
///
/// The state vector is ordered as
///   [df, dP_G(1..nG), dX_gov(1..nG), dP_ES(1..nES)]
/// and the input vector as [U_G(1..nG), U_ES(1..nES)]. Hyperplane normals of
/// unsafe sets index into this ordering.
struct PowerSystemParams {
  double inertia = 0.0;  // M [pu s/Hz]
  double damping = 0.0;  // D [pu/Hz]
  std::vector<GeneratorParams> generators;
  std::vector<StorageParams> storages;
  double disturbance_bound = 0.0;  // gamma_w [pu]

  int num_generators() const { return static_cast<int>(generators.size()); }
  int num_storages() const { return static_cast<int>(storages.size()); }
  int state_dim() const { return 1 + 2 * num_generators() + num_storages(); }
  int input_dim() const { return num_generators() + num_storages(); }

  /// Per-input physical bounds gamma in input order.
  Eigen::VectorXd power_rate_bounds() const;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

struct ContinuousModel {
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x m
  Eigen::MatrixXd H;  // n x 1
  std::vector<std::string> state_labels;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Sampled-data model x(k+1) = A x(k) + B u(k) + H w(k) under zero-order hold.
struct DiscreteModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd H;
  double sample_time = 0.0;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

ContinuousModel build_continuous(const PowerSystemParams& params);

/// exp(M) by scaling and squaring with a degree-13 Pade core.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

/// Exact ZOH discretization through the exponential of the augmented matrix
/// [[A_c, B_c, H_c], [0, 0, 0]] * tau.
DiscreteModel discretize(const ContinuousModel& model, double tau);

}  // namespace resilient
