#include <random>
#include <vector>

#include "doctest.h"
#include "resilient/kernels.hpp"
#include "resilient/reachability.hpp"
#include "support.hpp"

using namespace resilient;
namespace k = resilient::kernels;

namespace {

std::vector<double> random_vector(std::size_t size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(size);
  for (auto& x : v) x = u(rng);
  return v;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]) / (1.0 + std::abs(b[i])));
  }
  return m;
}

struct ScalarGuard {
  ScalarGuard() { k::force_scalar(true); }
  ~ScalarGuard() { k::force_scalar(false); }
};

}  // namespace

TEST_CASE("kernel tables are populated") {
  const auto& s = k::scalar_kernels();
  CHECK(s.affine_step != nullptr);
  CHECK(s.whitened_norm_sq != nullptr);
  CHECK(s.accumulate_max_abs != nullptr);
  CHECK(k::active_kernels().name != nullptr);
  {
    ScalarGuard guard;
    CHECK(&k::active_kernels() == &s);
  }
}

TEST_CASE("vector kernels match the scalar reference") {
  const k::KernelTable* simd = k::avx2_kernels();
  if (simd == nullptr) {
    MESSAGE("AVX2 variant unavailable on this machine; nothing to compare");
    return;
  }
  const auto& ref = k::scalar_kernels();
  std::mt19937_64 rng(99);
  for (int n : {1, 2, 3, 7, 9, 16}) {
    for (int lanes : {1, 3, 4, 5, 8, 64, 67}) {
      const int q = 1 + n % 4;
      const auto a = random_vector(static_cast<std::size_t>(n * n), rng);
      const auto g = random_vector(static_cast<std::size_t>(n * q), rng);
      const auto x = random_vector(static_cast<std::size_t>(n * lanes), rng);
      const auto w = random_vector(static_cast<std::size_t>(q * lanes), rng);
      std::vector<double> out_ref(x.size()), out_simd(x.size());
      ref.affine_step(a, g, n, q, x, w, out_ref, lanes);
      simd->affine_step(a, g, n, q, x, w, out_simd, lanes);
      CHECK(max_rel_diff(out_simd, out_ref) < 1e-13);

      // Well-conditioned lower factor.
      std::vector<double> lower(static_cast<std::size_t>(n * n), 0.0);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) lower[static_cast<std::size_t>(i * n + j)] = (i == j) ? 1.5 + i * 0.1 : 0.3 * a[static_cast<std::size_t>(i * n + j)];
      }
      std::vector<double> scratch(x.size()), v_ref(static_cast<std::size_t>(lanes)),
          v_simd(static_cast<std::size_t>(lanes));
      ref.whitened_norm_sq(lower, n, x, scratch, v_ref, lanes);
      simd->whitened_norm_sq(lower, n, x, scratch, v_simd, lanes);
      CHECK(max_rel_diff(v_simd, v_ref) < 1e-13);

      std::vector<double> m_ref(static_cast<std::size_t>(n), 0.25), m_simd(static_cast<std::size_t>(n), 0.25);
      ref.accumulate_max_abs(x, n, lanes, m_ref);
      simd->accumulate_max_abs(x, n, lanes, m_simd);
      CHECK(m_simd == m_ref);
    }
  }
}

TEST_CASE("whitened norm equals the quadratic form") {
  std::mt19937_64 rng(4);
  const int n = 5, lanes = 6;
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return nd(rng); });
  const Eigen::MatrixXd w = g * g.transpose() + Eigen::MatrixXd::Identity(n, n);
  const Ellipsoid e(w);
  const Eigen::MatrixXd l = e.cholesky_factor();
  std::vector<double> lower(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) lower[static_cast<std::size_t>(i * n + j)] = l(i, j);
  }
  const auto x = random_vector(static_cast<std::size_t>(n * lanes), rng);
  std::vector<double> scratch(x.size()), out(static_cast<std::size_t>(lanes));
  for (const k::KernelTable* t : {&k::scalar_kernels(), k::avx2_kernels()}) {
    if (t == nullptr) continue;
    t->whitened_norm_sq(lower, n, x, scratch, out, lanes);
    for (int lane = 0; lane < lanes; ++lane) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = x[static_cast<std::size_t>(i * lanes + lane)];
      CHECK(out[static_cast<std::size_t>(lane)] == doctest::Approx(e.quadratic_form(v)).epsilon(1e-12));
    }
  }
}

TEST_CASE("containment scan is path independent") {
  const auto& m = testing::benchmark_model();
  const auto b = testing::benchmark_bounds();
  const SamplingOptions opts{60, 150, 8, InputStrategy::kMixed};
  Eigen::MatrixXd w = 0.5 * Eigen::MatrixXd::Identity(7, 7);
  const Ellipsoid e(w);
  const auto fast = scan_reachable(m, b, opts, e);
  ContainmentScan slow;
  {
    ScalarGuard guard;
    slow = scan_reachable(m, b, opts, e);
  }
  CHECK(fast.visited == slow.visited);
  CHECK(fast.max_quadratic_form == doctest::Approx(slow.max_quadratic_form).epsilon(1e-12));
  CHECK((fast.max_abs_state - slow.max_abs_state).cwiseAbs().maxCoeff() < 1e-13);
}
