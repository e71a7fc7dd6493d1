#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "resilient/error.hpp"
#include "resilient/model.hpp"
#include "resilient/synthesis.hpp"
#include "support.hpp"

using namespace resilient;

TEST_CASE("benchmark continuous model entries") {
  const ContinuousModel c = build_continuous(testing::benchmark_params());
  REQUIRE(c.state_dim() == 7);
  REQUIRE(c.input_dim() == 4);
  CHECK(c.A(0, 0) == doctest::Approx(-0.6));
  CHECK(c.A(0, 1) == doctest::Approx(0.2));
  CHECK(c.A(0, 2) == doctest::Approx(0.2));
  CHECK(c.A(0, 5) == doctest::Approx(0.2));
  CHECK(c.A(0, 6) == doctest::Approx(0.2));
  CHECK(c.H(0, 0) == doctest::Approx(-0.2));
  CHECK(c.H.bottomRows(6).isZero());
  // Governor of generator 1: -1/(T_g R) on df, -1/T_g on itself.
  CHECK(c.A(3, 0) == doctest::Approx(-1.0 / (0.8 * 1.5)));
  CHECK(c.A(3, 3) == doctest::Approx(-1.0 / 0.8));
  CHECK(c.B(3, 0) == doctest::Approx(1.0 / 0.8));
  CHECK(c.B(5, 2) == doctest::Approx(10.0));
  CHECK(c.state_labels.front() == "df");
  CHECK(c.state_labels.back() == "dP_ES2");
}

TEST_CASE("unit single-generator model") {
  PowerSystemParams p;
  p.inertia = 1.0;
  p.damping = 0.0;
  p.generators = {{1.0, 1.0, 1.0, 1.0}};
  const ContinuousModel c = build_continuous(p);
  Eigen::Matrix3d expected;
  expected << 0, 1, 0, 0, -1, 1, -1, 0, -1;
  CHECK((c.A - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("storage-only model") {
  PowerSystemParams p;
  p.inertia = 5.0;
  p.damping = 3.0;
  p.storages = {{0.1, 1.0}};
  const ContinuousModel c = build_continuous(p);
  REQUIRE(c.state_dim() == 2);
  CHECK(c.A(0, 0) == doctest::Approx(-0.6));
  CHECK(c.A(0, 1) == doctest::Approx(0.2));
  CHECK(c.A(1, 0) == doctest::Approx(0.0));
  CHECK(c.A(1, 1) == doctest::Approx(-10.0));
  CHECK(c.B(0, 0) == doctest::Approx(0.0));
  CHECK(c.B(1, 0) == doctest::Approx(10.0));
}

TEST_CASE("invalid parameters name the field") {
  auto p = testing::benchmark_params();
  p.generators[1].governor_time_constant = 0.0;
  try {
    build_continuous(p);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("generators[1].T_g") != std::string::npos);
  }
  p = testing::benchmark_params();
  p.storages[0].time_constant = -1.0;
  CHECK_THROWS_AS(build_continuous(p), ConfigError);
  PowerSystemParams empty;
  empty.inertia = 1.0;
  CHECK_THROWS_AS(build_continuous(empty), ConfigError);
}

TEST_CASE("input matrix has one nonzero per column") {
  const ContinuousModel c = build_continuous(testing::benchmark_params());
  for (int j = 0; j < c.input_dim(); ++j) {
    CHECK((c.B.col(j).array() != 0.0).count() == 1);
  }
}

TEST_CASE("matrix exponential") {
  SUBCASE("zero matrix gives identity") {
    CHECK((matrix_exponential(Eigen::MatrixXd::Zero(4, 4)) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("diagonal") {
    Eigen::MatrixXd d = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
    const Eigen::MatrixXd e = matrix_exponential(d);
    CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(e(0, 1) == 0.0);
  }
  SUBCASE("benchmark against the Taylor oracle") {
    const Eigen::MatrixXd m = 2.0 * build_continuous(testing::benchmark_params()).A;
    const Eigen::MatrixXd diff = matrix_exponential(m) - oracle::taylor_expm(m);
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("large norm needs scaling") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(5, 5, [&] { return nd(rng); });
    m = 6.0 * m - 30.0 * Eigen::MatrixXd::Identity(5, 5);
    const Eigen::MatrixXd e = matrix_exponential(m);
    const Eigen::MatrixXd ref = oracle::taylor_expm(m, 20);
    CHECK((e - ref).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(matrix_exponential(Eigen::MatrixXd::Zero(2, 3)), Error);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(matrix_exponential(bad), Error);
  }
}

TEST_CASE("discretize scalar closed form") {
  ContinuousModel c;
  c.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  c.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
  c.H = Eigen::MatrixXd::Zero(1, 1);
  const DiscreteModel d = discretize(c, std::log(2.0));
  CHECK(d.A(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.B(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.sample_time == doctest::Approx(std::log(2.0)));
}

TEST_CASE("discretize tiny period") {
  const DiscreteModel d = discretize(build_continuous(testing::benchmark_params()), 1e-12);
  CHECK((d.A - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(d.B.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(d.H.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("discretize rejects non-positive period") {
  const ContinuousModel c = build_continuous(testing::benchmark_params());
  CHECK_THROWS_AS(discretize(c, 0.0), Error);
  CHECK_THROWS_AS(discretize(c, -1.0), Error);
}

TEST_CASE("benchmark discretization matches fine-step integration") {
  const ContinuousModel c = build_continuous(testing::benchmark_params());
  const DiscreteModel d = discretize(c, 2.0);
  const oracle::Zoh ref = oracle::rk4_zoh(c.A, c.B, c.H, 2.0, 1e-5);
  CHECK((d.A - ref.a).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((d.B - ref.b).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((d.H - ref.h).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("property: semigroup of the sampled state matrix") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  for (int trial = 0; trial < 25; ++trial) {
    PowerSystemParams p;
    p.inertia = u(rng) + 1.0;
    p.damping = u(rng);
    const int ng = 1 + trial % 3;
    const int ness = trial % 2;
    for (int i = 0; i < ng; ++i) p.generators.push_back({u(rng), u(rng), u(rng), u(rng)});
    for (int i = 0; i < ness; ++i) p.storages.push_back({u(rng), u(rng)});
    const double tau = u(rng);
    const ContinuousModel c = build_continuous(p);
    const DiscreteModel full = discretize(c, tau);
    const DiscreteModel half = discretize(c, tau / 2.0);
    CHECK((half.A * half.A - full.A).cwiseAbs().maxCoeff() < 1e-9);
    // Two half-steps of the input integral compose as well.
    CHECK((half.A * half.B + half.B - full.B).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("benchmark sampled model is Schur stable") {
  const auto report = check_schur_stability(testing::benchmark_model().A);
  CHECK(report.stable);
  CHECK(report.spectral_radius < 1.0);
}
