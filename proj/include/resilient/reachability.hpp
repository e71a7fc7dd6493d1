#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "resilient/model.hpp"

namespace resilient {

/// Origin-centred ellipsoid {x : x^T W^{-1} x <= 1}.
class Ellipsoid {
 public:
  /// Throws ConfigError unless W is square, symmetric and positive definite.
  explicit Ellipsoid(Eigen::MatrixXd shape);

  const Eigen::MatrixXd& shape() const { return shape_; }
  int dim() const { return static_cast<int>(shape_.rows()); }

  /// Lower-triangular Cholesky factor L with W = L L^T.
  Eigen::MatrixXd cholesky_factor() const { return factor_.matrixL(); }

  /// x^T W^{-1} x, via a triangular solve.
  double quadratic_form(const Eigen::VectorXd& x) const;

  static constexpr double kMembershipTolerance = 1e-9;

 private:
  Eigen::MatrixXd shape_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// Unsafe half-space {x : c^T x >= g}.
struct HalfSpace {
  Eigen::VectorXd normal;  // c
  double offset = 0.0;     // g
};

class UnsafeSet {
 public:
  explicit UnsafeSet(std::vector<HalfSpace> halfspaces);

  /// The two half-spaces df >= limit and -df >= limit.
  static UnsafeSet frequency_limit(int state_dim, double limit);

  const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
  int size() const { return static_cast<int>(halfspaces_.size()); }
  int dim() const { return static_cast<int>(halfspaces_.front().normal.size()); }

 private:
  std::vector<HalfSpace> halfspaces_;
};

/// Box bounds |u_i| <= inputs(i) and |w| <= disturbance.
struct Bounds {
  Eigen::VectorXd inputs;
  double disturbance = 0.0;

  void validate() const;
};

/// Signed distance between the ellipsoid and the hyperplane c^T x = g,
/// (|g| - sqrt(c^T W c)) / |c|. Positive means strictly separated.
double hyperplane_distance(const Ellipsoid& e, const HalfSpace& h);

struct SeparationReport {
  std::vector<double> margins;  // c_i^T W c_i - g_i^2
  bool safe = false;
};

SeparationReport check_separation(const Ellipsoid& e, const UnsafeSet& unsafe,
                                  double tolerance = 1e-9);

bool contains(const Ellipsoid& e, const Eigen::VectorXd& x);

enum class InputStrategy {
  kMixed,            // each channel of each trajectory picks one of the three below
  kUniform,          // i.i.d. uniform in [-gamma, gamma]
  kBangBang,         // i.i.d. +-gamma
  kConstantExtreme,  // one sign drawn per trajectory, held
};

struct SamplingOptions {
  int horizon = 1;  // K steps
  int trials = 1;   // N trajectories
  std::uint64_t seed = 0;
  InputStrategy strategy = InputStrategy::kMixed;
};

/// Visited states x(1..K) of every trajectory, one column per state.
struct ReachableSamples {
  Eigen::MatrixXd states;
  int horizon = 0;
  int trials = 0;
};

/// Empirical under-approximation of the bounded-input reachable set from
/// x(0) = 0. Deterministic for a fixed seed.
ReachableSamples sample_reachable(const DiscreteModel& model, const Bounds& bounds,
                                  const SamplingOptions& options);

struct ContainmentScan {
  double max_quadratic_form = 0.0;  // max x^T W^{-1} x over all visited states
  Eigen::VectorXd max_abs_state;    // componentwise max |x_i|
  long long visited = 0;
};

/// Same trajectories as sample_reachable, streamed through the ellipsoid
/// without storing them.
ContainmentScan scan_reachable(const DiscreteModel& model, const Bounds& bounds,
                               const SamplingOptions& options, const Ellipsoid& ellipsoid);

}  // namespace resilient
