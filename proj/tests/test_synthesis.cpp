#include <chrono>
#include <random>

#include "doctest.h"
#include "resilient/error.hpp"
#include "resilient/synthesis.hpp"
#include "support.hpp"

using namespace resilient;

namespace {

const CertificateCheck& find_check(const CertificateReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  throw std::logic_error("unreachable");
}

double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues()(0);
}

SynthesisProblem scalar_problem(double a, double gamma_w, double limit,
                                std::vector<double> grid = default_a_grid()) {
  DiscreteModel m = testing::scalar_model(a, 1.0, 1.0);
  return {m, Bounds{Eigen::VectorXd::Constant(1, 1.0), gamma_w}, UnsafeSet::frequency_limit(1, limit),
          std::move(grid)};
}

}  // namespace

TEST_CASE("grid construction") {
  const auto g = default_a_grid();
  REQUIRE(g.size() == 49);
  CHECK(g.front() == doctest::Approx(0.02));
  CHECK(g.back() == doctest::Approx(0.98));
  CHECK(make_grid(0.1, 0.1, 0.3).size() == 3);
}

TEST_CASE("Schur stability examples") {
  auto r = check_schur_stability(Eigen::MatrixXd::Identity(3, 3));
  CHECK_FALSE(r.stable);
  CHECK(r.spectral_radius == doctest::Approx(1.0));
  r = check_schur_stability(0.5 * Eigen::MatrixXd::Identity(3, 3));
  CHECK(r.stable);
  CHECK(r.spectral_radius == doctest::Approx(0.5));
}

TEST_CASE("assemble_lmi scalar substitution") {
  const DiscreteModel m = testing::scalar_model(0.5, 1.0, 0.0);
  const double w = 2.0, rho = 3.0;
  const Eigen::MatrixXd full =
      assemble_lmi(m, Eigen::MatrixXd::Constant(1, 1, w), Eigen::VectorXd::Constant(1, rho), 0.0, 0.5,
                   ChannelNormalization::kAllChannels);
  REQUIRE(full.rows() == 4);
  // Disturbance row and column vanish when gamma_w = 0.
  CHECK(full.row(2).isZero());
  CHECK(full.col(2).isZero());
  Eigen::Matrix3d expected;
  expected << 0.5 * w, 0, 0.5 * w, 0, 0.5 * rho, rho, 0.5 * w, rho, w;
  Eigen::Matrix3d relevant;
  const int idx[3] = {0, 1, 3};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) relevant(i, j) = full(idx[i], idx[j]);
  }
  CHECK((relevant - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("assemble_lmi degenerate point") {
  const auto& m = testing::benchmark_model();
  const Eigen::MatrixXd z = assemble_lmi(m, Eigen::MatrixXd::Zero(7, 7), Eigen::VectorXd::Zero(4), 0.0,
                                         0.5, ChannelNormalization::kAllChannels);
  CHECK(z.rows() == 2 * 7 + 4 + 1);
  CHECK(z.isZero());
}

TEST_CASE("channel weighting") {
  CHECK(channel_count(4, 0.2, ChannelNormalization::kAllChannels) == 5);
  CHECK(channel_count(4, 0.0, ChannelNormalization::kAllChannels) == 4);
  CHECK(channel_count(4, 0.2, ChannelNormalization::kInputsOnly) == 4);
}

TEST_CASE("problem validation") {
  auto p = testing::benchmark_problem();
  p.a_grid = {};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.a_grid = {0.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.a_grid = {1.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  auto unstable = scalar_problem(1.1, 0.0, 1e3);
  CHECK_THROWS_AS(synthesize(unstable), ConfigError);
  CHECK_THROWS_AS(solve_fixed_a(testing::benchmark_problem(), 1.5), ConfigError);
}

TEST_CASE("no binding safety constraint keeps the physical bounds") {
  // The shape cap keeps c^T W c far below g^2.
  const auto p = scalar_problem(0.5, 0.0, 1e3);
  const auto r = synthesize(p);
  CHECK(r.gamma_hat(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.gamma_hat(0) <= 1.0 + 1e-9);
}

TEST_CASE("large disturbance is infeasible for every a") {
  // |x| can reach 2 gamma_w = 2 >> 0.2 even without inputs.
  const auto p = scalar_problem(0.5, 1.0, 0.2);
  try {
    synthesize(p);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a=0.02") != std::string::npos);
    CHECK(msg.find("infeasible") != std::string::npos);
  }
  for (double a : {0.1, 0.5, 0.9}) CHECK(solve_fixed_a(p, a).status == GridStatus::kInfeasible);
}

TEST_CASE("grid selection") {
  SUBCASE("single point equals the fixed-a solve") {
    auto p = scalar_problem(0.5, 0.1, 0.5, {0.6});
    const auto r = synthesize(p);
    const auto s = solve_fixed_a(p, 0.6);
    REQUIRE(s.status == GridStatus::kOptimal);
    CHECK(r.a == 0.6);
    CHECK(r.objective == doctest::Approx(s.objective).epsilon(1e-12));
  }
  SUBCASE("infeasible points are skipped") {
    // Invariance of x+ = 0.9 x + u needs a > 0.81.
    auto p = scalar_problem(0.9, 0.0, 1e3, {0.5, 0.9});
    const auto r = synthesize(p);
    REQUIRE(r.per_a.size() == 2);
    CHECK(r.per_a[0].status == GridStatus::kInfeasible);
    CHECK(r.per_a[1].status == GridStatus::kOptimal);
    CHECK(r.a == 0.9);
  }
  SUBCASE("ties go to the smaller a") {
    // Every point certifies r = 1 with W well below the shape cap.
    auto p = scalar_problem(0.5, 0.0, 1e3, {0.7, 0.5, 0.6});
    const auto r = synthesize(p);
    for (const auto& s : r.per_a) CHECK(s.status == GridStatus::kOptimal);
    CHECK(r.a == 0.5);
  }
}

TEST_CASE("benchmark synthesis reproduces the independent reference") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& r = testing::benchmark_result();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Reference optimum from an independent conic solver on the same program.
  CHECK(r.gamma_hat(0) == doctest::Approx(0.1298).epsilon(2e-3 / 0.1298));
  CHECK(r.gamma_hat(1) == doctest::Approx(0.2017).epsilon(2e-3 / 0.2017));
  CHECK(r.gamma_hat(2) == doctest::Approx(0.1692).epsilon(2e-3 / 0.1692));
  CHECK(r.gamma_hat(3) == doctest::Approx(0.15).epsilon(2e-3 / 0.15));
  CHECK(r.objective == doctest::Approx(0.6507).epsilon(1e-3));
  CHECK(r.a == doctest::Approx(0.34));
  CHECK(seconds < 60.0);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(r.gamma_hat(i) > 0.0);
    CHECK(r.gamma_hat(i) <= testing::benchmark_bounds().inputs(i) + 1e-9);
  }
}

TEST_CASE("certificate verification") {
  const auto& r = testing::benchmark_result();
  const auto bounds = testing::benchmark_bounds();
  const auto& m = testing::benchmark_model();
  SUBCASE("solved certificate passes every check") {
    VerifyOptions opts;
    opts.initial_state = testing::frequency_state(0.1);
    const auto rep = verify_certificate(m, r, testing::benchmark_unsafe(), bounds, opts);
    CHECK(rep.passed);
    REQUIRE(rep.checks.size() == 5);
    for (const auto& c : rep.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
    CHECK(rep.max_lyapunov <= 1.0 + 1e-6);
    REQUIRE(rep.initial_lyapunov.has_value());
    CHECK_FALSE(rep.initial_outside);
  }
  SUBCASE("initial state outside the ellipsoid is flagged") {
    VerifyOptions opts{10, 10, 1, testing::frequency_state(0.3)};
    const auto rep = verify_certificate(m, r, testing::benchmark_unsafe(), bounds, opts);
    CHECK(rep.initial_outside);
  }
  SUBCASE("widened shape violates the safety hyperplanes") {
    ResilientResult bad = r;
    bad.w(0, 0) += 0.1;
    const auto rep = verify_certificate(m, bad, testing::benchmark_unsafe(), bounds, {50, 50, 1, std::nullopt});
    CHECK_FALSE(rep.passed);
    const auto& c = find_check(rep, "safety_hyperplanes");
    CHECK_FALSE(c.passed);
    CHECK(c.residual == doctest::Approx(0.1).epsilon(1e-6));
  }
  SUBCASE("doubled bounds break the matrix inequality") {
    ResilientResult bad = r;
    bad.r *= 4.0;
    bad.gamma_hat *= 2.0;
    const auto rep = verify_certificate(m, bad, testing::benchmark_unsafe(), bounds, {50, 50, 1, std::nullopt});
    CHECK_FALSE(find_check(rep, "lmi_positive_semidefinite").passed);
    CHECK_FALSE(rep.passed);
  }
}

TEST_CASE("property: dissipation inequality along random trajectories") {
  const auto& r = testing::benchmark_result();
  const auto& m = testing::benchmark_model();
  const double gw = testing::benchmark_bounds().disturbance;
  const double k = (1.0 - r.a) / channel_count(4, gw, r.normalization);
  const Ellipsoid e(r.w);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = -1.0;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(7);
    for (int step = 0; step < 100; ++step) {
      Eigen::VectorXd in(4);
      for (int i = 0; i < 4; ++i) in(i) = (u(rng) > 0 ? 1.0 : u(rng)) * r.gamma_hat(i) * (u(rng) > 0 ? 1 : -1);
      const double w = gw * (u(rng) > 0 ? 1.0 : u(rng));
      const Eigen::VectorXd next = m.A * x + m.B * in + m.H.col(0) * w;
      const double supply = (in.array().square() / r.r.array()).sum() + w * w / (gw * gw);
      const double slack = e.quadratic_form(next) - (r.a * e.quadratic_form(x) + k * supply);
      worst = std::max(worst, slack);
      x = next;
    }
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("grid refinement does not find a better objective") {
  const auto& best = testing::benchmark_result();
  auto p = testing::benchmark_problem();
  p.a_grid = make_grid(std::max(0.002, best.a - 0.02), 0.002, std::min(0.998, best.a + 0.02));
  const auto fine = synthesize(p);
  CHECK(fine.objective <= best.objective + 1e-4);
}

TEST_CASE("property: a smaller disturbance bound never shrinks the optimum") {
  double previous = 0.0;
  for (double gw : {0.2, 0.15, 0.1}) {
    auto p = testing::benchmark_problem();
    p.bounds.disturbance = gw;
    const double obj = gw == 0.2 ? testing::benchmark_result().objective : synthesize(p).objective;
    CHECK(obj >= previous - 1e-6);
    previous = obj;
  }
}

TEST_CASE("property: feasible set is convex") {
  const auto p = testing::benchmark_problem();
  const double a = testing::benchmark_result().a;
  const auto s1 = solve_fixed_a(p, a);
  auto tighter = p;
  tighter.unsafe = UnsafeSet::frequency_limit(7, 0.15);
  tighter.bounds.inputs *= 0.8;
  const auto s2 = solve_fixed_a(tighter, a);
  REQUIRE(s1.status == GridStatus::kOptimal);
  REQUIRE(s2.status == GridStatus::kOptimal);
  CHECK((s1.w - s2.w).norm() > 1e-3);
  const Eigen::MatrixXd w = 0.5 * (s1.w + s2.w);
  const Eigen::VectorXd rr = 0.5 * (s1.r + s2.r);
  CHECK(min_eig(assemble_lmi(p.model, w, rr, p.bounds.disturbance, a, p.normalization)) >= -1e-9);
  CHECK(w(0, 0) <= 0.04 + 1e-9);
  CHECK(((rr.array() - p.bounds.inputs.array().square()) <= 1e-9).all());
}

TEST_CASE("shape cap does not bind at the benchmark optimum") {
  auto p = testing::benchmark_problem();
  p.shape_cap = 100.0;
  p.a_grid = {testing::benchmark_result().a};
  const auto r = synthesize(p);
  CHECK(r.objective == doctest::Approx(testing::benchmark_result().objective).epsilon(1e-4));
}

TEST_CASE("inputs-only weighting is not invariant under disturbance") {
  // Splitting the budget over the inputs alone certifies larger bounds, but
  // the disturbance channel pushes V above one along admissible trajectories.
  auto p = testing::benchmark_problem();
  p.normalization = ChannelNormalization::kInputsOnly;
  const auto r = synthesize(p);
  CHECK(r.objective > testing::benchmark_result().objective + 0.05);
  const auto rep = verify_certificate(p.model, r, p.unsafe, p.bounds);
  CHECK_FALSE(find_check(rep, "trajectory_invariance").passed);
  CHECK(rep.max_lyapunov > 1.0 + 1e-6);
}

TEST_CASE("bounding ellipsoid under the physical bounds crosses the limit") {
  const auto b = bounding_ellipsoid(testing::benchmark_model(), testing::benchmark_bounds(),
                                    Eigen::VectorXd::Unit(7, 0), default_a_grid());
  CHECK(b.extent > 0.04);
  const Ellipsoid e(b.w);
  // Invariant under the physical bounds: a long sampled run stays inside.
  const auto scan = scan_reachable(testing::benchmark_model(), testing::benchmark_bounds(),
                                   {300, 128, 3, InputStrategy::kMixed}, e);
  CHECK(scan.max_quadratic_form <= 1.0 + 1e-6);
}
