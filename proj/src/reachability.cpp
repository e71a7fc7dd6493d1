#include "resilient/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "resilient/error.hpp"
#include "resilient/kernels.hpp"
#include "resilient/random.hpp"

namespace resilient {

Ellipsoid::Ellipsoid(Eigen::MatrixXd shape) : shape_(std::move(shape)) {
  if (shape_.rows() != shape_.cols() || shape_.rows() == 0) {
    throw ConfigError("ellipsoid shape matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, shape_.cwiseAbs().maxCoeff());
  if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("ellipsoid shape matrix must be symmetric");
  }
  factor_.compute(shape_);
  if (factor_.info() != Eigen::Success) {
    throw ConfigError("ellipsoid shape matrix must be positive definite");
  }
}

double Ellipsoid::quadratic_form(const Eigen::VectorXd& x) const {
  if (x.size() != shape_.rows()) {
    throw ConfigError("ellipsoid: state dimension mismatch");
  }
  return factor_.matrixL().solve(x).squaredNorm();
}

UnsafeSet::UnsafeSet(std::vector<HalfSpace> halfspaces) : halfspaces_(std::move(halfspaces)) {
  if (halfspaces_.empty()) throw ConfigError("unsafe set needs at least one half-space");
  const auto dim = halfspaces_.front().normal.size();
  for (const auto& h : halfspaces_) {
    if (h.normal.size() != dim) throw ConfigError("unsafe set: inconsistent normal dimensions");
    if (!(h.normal.norm() > 0.0)) throw ConfigError("unsafe set: zero normal vector");
    if (!std::isfinite(h.offset)) throw ConfigError("unsafe set: non-finite offset");
  }
}

UnsafeSet UnsafeSet::frequency_limit(int state_dim, double limit) {
  HalfSpace upper{Eigen::VectorXd::Unit(state_dim, 0), limit};
  HalfSpace lower{-Eigen::VectorXd::Unit(state_dim, 0), limit};
  return UnsafeSet({upper, lower});
}

void Bounds::validate() const {
  for (Eigen::Index i = 0; i < inputs.size(); ++i) {
    if (!(inputs(i) > 0.0) || !std::isfinite(inputs(i))) {
      throw ConfigError("input bound " + std::to_string(i) + " must be > 0");
    }
  }
  if (!(disturbance >= 0.0) || !std::isfinite(disturbance)) {
    throw ConfigError("disturbance bound must be >= 0");
  }
}

double hyperplane_distance(const Ellipsoid& e, const HalfSpace& h) {
  const double spread = std::sqrt(h.normal.dot(e.shape() * h.normal));
  return (std::fabs(h.offset) - spread) / h.normal.norm();
}

SeparationReport check_separation(const Ellipsoid& e, const UnsafeSet& unsafe, double tolerance) {
  SeparationReport report;
  report.safe = true;
  for (const auto& h : unsafe.halfspaces()) {
    const double margin = h.normal.dot(e.shape() * h.normal) - h.offset * h.offset;
    report.margins.push_back(margin);
    if (margin > tolerance) report.safe = false;
  }
  return report;
}

bool contains(const Ellipsoid& e, const Eigen::VectorXd& x) {
  return e.quadratic_form(x) <= 1.0 + Ellipsoid::kMembershipTolerance;
}

namespace {

constexpr int kLanes = 64;

struct ChannelPlan {
  InputStrategy strategy;
  double constant_sign;
};

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Drives batches of trajectories and hands each propagated batch of states
/// (SoA, `lanes` wide) to `visit` together with the first trial index.
void run_trajectories(const DiscreteModel& model, const Bounds& bounds,
                      const SamplingOptions& options,
                      const std::function<void(int, int, int, std::span<const double>)>& visit) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int q = m + 1;
  if (bounds.inputs.size() != m) throw ConfigError("sample_reachable: bound dimension mismatch");
  if (options.horizon < 1 || options.trials < 1) {
    throw ConfigError("sample_reachable: horizon and trials must be >= 1");
  }

  const RowMajor a = model.A;
  RowMajor g(n, q);
  g.leftCols(m) = model.B;
  g.col(m) = model.H.col(0);
  Eigen::VectorXd channel_bound(q);
  channel_bound.head(m) = bounds.inputs;
  channel_bound(m) = bounds.disturbance;

  const auto& kern = kernels::active_kernels();
  std::vector<double> x(n * kLanes), next(n * kLanes), w(q * kLanes);
  std::vector<Rng> rngs;
  std::vector<ChannelPlan> plans(q * kLanes);

  for (int first = 0; first < options.trials; first += kLanes) {
    const int lanes = std::min(kLanes, options.trials - first);
    rngs.clear();
    for (int l = 0; l < lanes; ++l) {
      rngs.push_back(Rng::stream(options.seed, static_cast<std::uint64_t>(first + l)));
      for (int p = 0; p < q; ++p) {
        Rng& rng = rngs.back();
        InputStrategy s = options.strategy;
        const std::uint64_t pick = rng.next() % 3;
        if (s == InputStrategy::kMixed) {
          s = pick == 0 ? InputStrategy::kUniform
                        : (pick == 1 ? InputStrategy::kBangBang : InputStrategy::kConstantExtreme);
        }
        plans[p * kLanes + l] = ChannelPlan{s, rng.sign()};
      }
    }
    std::fill(x.begin(), x.end(), 0.0);

    for (int k = 0; k < options.horizon; ++k) {
      for (int l = 0; l < lanes; ++l) {
        Rng& rng = rngs[l];
        for (int p = 0; p < q; ++p) {
          const ChannelPlan& plan = plans[p * kLanes + l];
          const double bound = channel_bound(p);
          double value = 0.0;
          switch (plan.strategy) {
            case InputStrategy::kUniform:
              value = rng.symmetric(bound);
              break;
            case InputStrategy::kBangBang:
              value = rng.sign() * bound;
              break;
            default:
              value = plan.constant_sign * bound;
              break;
          }
          w[p * lanes + l] = value;
        }
      }
      kern.affine_step({a.data(), static_cast<size_t>(n * n)},
                       {g.data(), static_cast<size_t>(n * q)}, n, q,
                       {x.data(), static_cast<size_t>(n * lanes)},
                       {w.data(), static_cast<size_t>(q * lanes)},
                       {next.data(), static_cast<size_t>(n * lanes)}, lanes);
      std::swap(x, next);
      visit(first, lanes, k, {x.data(), static_cast<size_t>(n * lanes)});
    }
  }
}

}  // namespace

ReachableSamples sample_reachable(const DiscreteModel& model, const Bounds& bounds,
                                  const SamplingOptions& options) {
  const int n = model.state_dim();
  ReachableSamples out;
  out.horizon = options.horizon;
  out.trials = options.trials;
  out.states.resize(n, static_cast<Eigen::Index>(options.horizon) * options.trials);
  run_trajectories(model, bounds, options,
                   [&](int first, int lanes, int k, std::span<const double> batch) {
                     for (int l = 0; l < lanes; ++l) {
                       const Eigen::Index col =
                           static_cast<Eigen::Index>(first + l) * options.horizon + k;
                       for (int i = 0; i < n; ++i) out.states(i, col) = batch[i * lanes + l];
                     }
                   });
  return out;
}

ContainmentScan scan_reachable(const DiscreteModel& model, const Bounds& bounds,
                               const SamplingOptions& options, const Ellipsoid& ellipsoid) {
  const int n = model.state_dim();
  if (ellipsoid.dim() != n) throw ConfigError("scan_reachable: ellipsoid dimension mismatch");
  const RowMajor lower = ellipsoid.cholesky_factor();
  const auto& kern = kernels::active_kernels();

  ContainmentScan scan;
  scan.max_abs_state = Eigen::VectorXd::Zero(n);
  std::vector<double> scratch(n * kLanes), values(kLanes);
  run_trajectories(model, bounds, options,
                   [&](int, int lanes, int, std::span<const double> batch) {
                     kern.whitened_norm_sq({lower.data(), static_cast<size_t>(n * n)}, n, batch,
                                           {scratch.data(), static_cast<size_t>(n * lanes)},
                                           {values.data(), static_cast<size_t>(lanes)}, lanes);
                     for (int l = 0; l < lanes; ++l) {
                       scan.max_quadratic_form = std::max(scan.max_quadratic_form, values[l]);
                     }
                     kern.accumulate_max_abs(batch, n, lanes,
                                             {scan.max_abs_state.data(), static_cast<size_t>(n)});
                     scan.visited += lanes;
                   });
  return scan;
}

}  // namespace resilient
