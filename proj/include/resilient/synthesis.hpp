#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilient/model.hpp"
#include "resilient/reachability.hpp"
#include "resilient/sdp.hpp"

namespace resilient {

/// How the (1 - a) dissipation budget is split across bounded channels.
///
/// kAllChannels divides it by the number of active channels (m inputs plus
/// the disturbance when gamma_w > 0), which is what makes x^T W^{-1} x <= 1
/// hold along every admissible trajectory. kInputsOnly divides by m for every
/// channel; with an active disturbance it only bounds V by (m + 1) / m.
enum class ChannelNormalization { kAllChannels, kInputsOnly };

const char* to_string(ChannelNormalization normalization);
ChannelNormalization parse_channel_normalization(const std::string& text);

struct SynthesisProblem {
  DiscreteModel model;
  Bounds bounds;  // physical gamma and gamma_w
  UnsafeSet unsafe;
  std::vector<double> a_grid;
  ChannelNormalization normalization = ChannelNormalization::kAllChannels;
  /// W <= shape_cap * I. Directions of the state space that never reach the
  /// unsafe hyperplanes (e.g. the difference of two identical storage units)
  /// leave W unbounded otherwise, and the barrier method needs a bounded
  /// feasible set. Must exceed the extent of any certificate of interest;
  /// very large caps cost accuracy near the end of the central path.
  double shape_cap = 10.0;

  /// Throws ConfigError on dimension mismatch, an empty or out-of-range
  /// grid, or an unstable A.
  void validate() const;
};

/// start, start + step, ... up to end (inclusive within step/1e6).
std::vector<double> make_grid(double start, double step, double end);

/// {0.02, 0.04, ..., 0.98}.
std::vector<double> default_a_grid();

struct StabilityReport {
  double spectral_radius = 0.0;
  bool stable = false;  // spectral radius < 1 - 1e-9
};

StabilityReport check_schur_stability(const Eigen::MatrixXd& a);

/// Number of channels sharing the dissipation budget.
int channel_count(int num_inputs, double gamma_w, ChannelNormalization normalization);

/// The (2n + m + 1)-square block matrix
///
///   [ aW        0           0             W A^T        ]
///   [ 0         k R         0             R B^T        ]
///   [ 0         0           k gw^2        gw^2 H^T     ]
///   [ A W       B R         H gw^2        W            ]
///
/// with R = diag(r) and k = (1 - a) / channel_count. Affine in (W, r).
Eigen::MatrixXd assemble_lmi(const DiscreteModel& model, const Eigen::MatrixXd& w,
                             const Eigen::VectorXd& r, double gamma_w, double a,
                             ChannelNormalization normalization);

enum class GridStatus { kOptimal, kInfeasible, kNumericalFailure };

const char* to_string(GridStatus status);

struct FixedASolution {
  double a = 0.0;
  GridStatus status = GridStatus::kNumericalFailure;
  Eigen::MatrixXd w;  // empty unless optimal
  Eigen::VectorXd r;
  double objective = 0.0;  // sum sqrt(r_i)
  double gap_bound = 0.0;
  int newton_steps = 0;
};

inline constexpr double kShapeFloor = 1e-8;  // W >= eps I

FixedASolution solve_fixed_a(const SynthesisProblem& problem, double a,
                             const sdp::Settings& settings = {});

struct ResilientResult {
  Eigen::MatrixXd w;
  Eigen::VectorXd gamma_hat;
  Eigen::VectorXd r;  // gamma_hat squared
  double a = 0.0;
  double objective = 0.0;
  ChannelNormalization normalization = ChannelNormalization::kAllChannels;
  std::vector<FixedASolution> per_a;  // diagnostics, in grid order (W dropped)
};

/// Relative gap below which two grid objectives are treated as equal.
inline constexpr double kObjectiveTieTolerance = 1e-7;

/// Grid search over a; picks the largest objective, ties toward smaller a.
/// Throws InfeasibleError when no grid point admits a certificate.
ResilientResult synthesize(const SynthesisProblem& problem, const sdp::Settings& settings = {});

/// Invariant ellipsoid for fixed input bounds (no safety constraint) that is
/// thinnest along `direction`: minimizes c^T W c over W and the a-grid.
struct BoundingEllipsoid {
  Eigen::MatrixXd w;
  double a = 0.0;
  double extent = 0.0;  // c^T W c
};

BoundingEllipsoid bounding_ellipsoid(const DiscreteModel& model, const Bounds& bounds,
                                     const Eigen::VectorXd& direction,
                                     const std::vector<double>& a_grid,
                                     ChannelNormalization normalization =
                                         ChannelNormalization::kAllChannels,
                                     double shape_cap = 10.0, const sdp::Settings& settings = {});

struct VerifyOptions {
  int trials = 1000;
  int horizon = 500;
  std::uint64_t seed = 1;
  std::optional<Eigen::VectorXd> initial_state;  // only reported as V(0)
};

struct CertificateCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;  // positive = violated by that much
  std::string detail;
};

struct CertificateReport {
  std::vector<CertificateCheck> checks;
  bool passed = false;
  double max_lyapunov = 0.0;  // max V(k) in the simulation check
  std::optional<double> initial_lyapunov;
  bool initial_outside = false;
};

/// Solver-independent re-check of a certificate:
///   (i) W symmetric positive definite, (ii) LMI min eigenvalue >= -1e-7,
///   (iii) c^T W c - g^2 <= 1e-9, (iv) r_i <= gamma_i^2 + 1e-9,
///   (v) V(k) <= 1 + 1e-6 along seeded admissible trajectories under gamma_hat.
CertificateReport verify_certificate(const DiscreteModel& model, const ResilientResult& result,
                                     const UnsafeSet& unsafe, const Bounds& bounds,
                                     const VerifyOptions& options = {});

}  // namespace resilient
