#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "resilient/lp.hpp"

using namespace resilient;

TEST_CASE("textbook maximum") {
  lp::Problem p;
  p.objective = Eigen::Vector2d(3.0, 5.0);
  p.constraint_matrix.resize(3, 2);
  p.constraint_matrix << 1, 0, 0, 2, 3, 2;
  p.constraint_upper = Eigen::Vector3d(4.0, 12.0, 18.0);
  const auto sol = lp::maximize(p);
  REQUIRE(sol.status == lp::Status::kOptimal);
  CHECK(sol.objective == doctest::Approx(36.0));
  CHECK(sol.x(0) == doctest::Approx(2.0));
  CHECK(sol.x(1) == doctest::Approx(6.0));
}

TEST_CASE("free and negative bounds") {
  lp::Problem p;
  p.objective = Eigen::Vector2d(-1.0, 2.0);
  p.constraint_matrix = Eigen::MatrixXd(0, 2);
  p.constraint_upper = Eigen::VectorXd(0);
  p.lower = Eigen::Vector2d(-3.0, -1.0);
  p.upper = Eigen::Vector2d(2.0, 0.5);
  const auto sol = lp::maximize(p);
  REQUIRE(sol.status == lp::Status::kOptimal);
  CHECK(sol.objective == doctest::Approx(4.0));
  CHECK(sol.x(0) == doctest::Approx(-3.0));
  CHECK(sol.x(1) == doctest::Approx(0.5));
}

TEST_CASE("negative right-hand side needs phase one") {
  // maximize -x - y subject to x + y >= 2 (written -x - y <= -2), x, y >= 0.
  lp::Problem p;
  p.objective = Eigen::Vector2d(-1.0, -1.0);
  p.constraint_matrix = Eigen::RowVector2d(-1.0, -1.0);
  p.constraint_upper = Eigen::VectorXd::Constant(1, -2.0);
  const auto sol = lp::maximize(p);
  REQUIRE(sol.status == lp::Status::kOptimal);
  CHECK(sol.objective == doctest::Approx(-2.0));
}

TEST_CASE("infeasible and unbounded") {
  lp::Problem p;
  p.objective = Eigen::Vector2d(1.0, 0.0);
  p.constraint_matrix.resize(2, 2);
  p.constraint_matrix << 1, 1, -1, -1;
  p.constraint_upper = Eigen::Vector2d(1.0, -2.0);
  CHECK(lp::maximize(p).status == lp::Status::kInfeasible);

  lp::Problem q;
  q.objective = Eigen::Vector2d(1.0, 1.0);
  q.constraint_matrix = Eigen::RowVector2d(1.0, -1.0);
  q.constraint_upper = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(lp::maximize(q).status == lp::Status::kUnbounded);
}

TEST_CASE("degenerate vertex") {
  // Three constraints meet at (1, 1).
  lp::Problem p;
  p.objective = Eigen::Vector2d(1.0, 1.0);
  p.constraint_matrix.resize(3, 2);
  p.constraint_matrix << 1, 0, 0, 1, 1, 1;
  p.constraint_upper = Eigen::Vector3d(1.0, 1.0, 2.0);
  const auto sol = lp::maximize(p);
  REQUIRE(sol.status == lp::Status::kOptimal);
  CHECK(sol.objective == doctest::Approx(2.0));
}

TEST_CASE("property: random boxed programs match vertex enumeration") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + trial % 3;
    const int rows = 1 + trial % 4;
    lp::Problem p;
    p.objective = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
    p.constraint_matrix = Eigen::MatrixXd::NullaryExpr(rows, n, [&] { return u(rng); });
    // Origin-feasible so the oracle always has a vertex.
    p.constraint_upper = Eigen::VectorXd::NullaryExpr(rows, [&] { return 0.1 + std::abs(u(rng)); });
    p.lower = Eigen::VectorXd::NullaryExpr(n, [&] { return -0.2 - std::abs(u(rng)); });
    p.upper = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.2 + std::abs(u(rng)); });
    const auto sol = lp::maximize(p);
    REQUIRE(sol.status == lp::Status::kOptimal);

    Eigen::MatrixXd a(rows + 2 * n, n);
    Eigen::VectorXd b(rows + 2 * n);
    a << p.constraint_matrix, Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
    b << p.constraint_upper, p.upper, -p.lower;
    const auto best = oracle::vertex_enumeration_max(p.objective, a, b);
    REQUIRE(best.has_value());
    CHECK(sol.objective == doctest::Approx(*best).epsilon(1e-9));
    CHECK(((a * sol.x - b).array() <= 1e-9).all());
  }
}
