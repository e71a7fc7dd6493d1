// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "resilient/kernels.hpp"

namespace resilient::kernels {

namespace {

constexpr int kWidth = 4;

void affine_step(std::span<const double> a, std::span<const double> g, int n, int q,
                 std::span<const double> x, std::span<const double> w, std::span<double> out,
                 int lanes) {
  const int vec_end = lanes - lanes % kWidth;
  for (int i = 0; i < n; ++i) {
    double* row = out.data() + i * lanes;
    int l = 0;
    for (; l < vec_end; l += kWidth) {
      __m256d acc = _mm256_setzero_pd();
      for (int j = 0; j < n; ++j) {
        acc = _mm256_fmadd_pd(_mm256_set1_pd(a[i * n + j]),
                              _mm256_loadu_pd(x.data() + j * lanes + l), acc);
      }
      for (int p = 0; p < q; ++p) {
        acc = _mm256_fmadd_pd(_mm256_set1_pd(g[i * q + p]),
                              _mm256_loadu_pd(w.data() + p * lanes + l), acc);
      }
      _mm256_storeu_pd(row + l, acc);
    }
    for (; l < lanes; ++l) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc = std::fma(a[i * n + j], x[j * lanes + l], acc);
      for (int p = 0; p < q; ++p) acc = std::fma(g[i * q + p], w[p * lanes + l], acc);
      row[l] = acc;
    }
  }
}

void whitened_norm_sq(std::span<const double> lower, int n, std::span<const double> x,
                      std::span<double> scratch, std::span<double> out, int lanes) {
  const int vec_end = lanes - lanes % kWidth;
  int l = 0;
  for (; l < vec_end; l += kWidth) {
    __m256d sum = _mm256_setzero_pd();
    for (int i = 0; i < n; ++i) {
      __m256d yi = _mm256_loadu_pd(x.data() + i * lanes + l);
      for (int j = 0; j < i; ++j) {
        yi = _mm256_fnmadd_pd(_mm256_set1_pd(lower[i * n + j]),
                              _mm256_loadu_pd(scratch.data() + j * lanes + l), yi);
      }
      yi = _mm256_mul_pd(yi, _mm256_set1_pd(1.0 / lower[i * n + i]));
      _mm256_storeu_pd(scratch.data() + i * lanes + l, yi);
      sum = _mm256_fmadd_pd(yi, yi, sum);
    }
    _mm256_storeu_pd(out.data() + l, sum);
  }
  for (; l < lanes; ++l) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double yi = x[i * lanes + l];
      for (int j = 0; j < i; ++j) yi = std::fma(-lower[i * n + j], scratch[j * lanes + l], yi);
      yi *= 1.0 / lower[i * n + i];
      scratch[i * lanes + l] = yi;
      sum = std::fma(yi, yi, sum);
    }
    out[l] = sum;
  }
}

void accumulate_max_abs(std::span<const double> x, int n, int lanes, std::span<double> max_abs) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const int vec_end = lanes - lanes % kWidth;
  for (int i = 0; i < n; ++i) {
    const double* xi = x.data() + i * lanes;
    __m256d m = _mm256_set1_pd(max_abs[i]);
    int l = 0;
    for (; l < vec_end; l += kWidth) {
      m = _mm256_max_pd(m, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(xi + l)));
    }
    alignas(32) double buf[kWidth];
    _mm256_store_pd(buf, m);
    double best = std::fmax(std::fmax(buf[0], buf[1]), std::fmax(buf[2], buf[3]));
    for (; l < lanes; ++l) best = std::fmax(best, std::fabs(xi[l]));
    max_abs[i] = best;
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", affine_step, whitened_norm_sq, accumulate_max_abs};
  return table;
}

}  // namespace resilient::kernels
