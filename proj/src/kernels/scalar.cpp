#include "resilient/kernels.hpp"

#include <cmath>

namespace resilient::kernels {

namespace {

void affine_step(std::span<const double> a, std::span<const double> g, int n, int q,
                 std::span<const double> x, std::span<const double> w, std::span<double> out,
                 int lanes) {
  for (int i = 0; i < n; ++i) {
    double* row = out.data() + i * lanes;
    for (int l = 0; l < lanes; ++l) row[l] = 0.0;
    for (int j = 0; j < n; ++j) {
      const double coeff = a[i * n + j];
      const double* xj = x.data() + j * lanes;
      for (int l = 0; l < lanes; ++l) row[l] += coeff * xj[l];
    }
    for (int p = 0; p < q; ++p) {
      const double coeff = g[i * q + p];
      const double* wp = w.data() + p * lanes;
      for (int l = 0; l < lanes; ++l) row[l] += coeff * wp[l];
    }
  }
}

void whitened_norm_sq(std::span<const double> lower, int n, std::span<const double> x,
                      std::span<double> scratch, std::span<double> out, int lanes) {
  for (int l = 0; l < lanes; ++l) out[l] = 0.0;
  // Forward substitution L y = x, one lane at a time in lockstep.
  for (int i = 0; i < n; ++i) {
    double* yi = scratch.data() + i * lanes;
    const double* xi = x.data() + i * lanes;
    for (int l = 0; l < lanes; ++l) yi[l] = xi[l];
    for (int j = 0; j < i; ++j) {
      const double coeff = lower[i * n + j];
      const double* yj = scratch.data() + j * lanes;
      for (int l = 0; l < lanes; ++l) yi[l] -= coeff * yj[l];
    }
    const double inv_diag = 1.0 / lower[i * n + i];
    for (int l = 0; l < lanes; ++l) {
      yi[l] *= inv_diag;
      out[l] += yi[l] * yi[l];
    }
  }
}

void accumulate_max_abs(std::span<const double> x, int n, int lanes, std::span<double> max_abs) {
  for (int i = 0; i < n; ++i) {
    double m = max_abs[i];
    const double* xi = x.data() + i * lanes;
    for (int l = 0; l < lanes; ++l) m = std::fmax(m, std::fabs(xi[l]));
    max_abs[i] = m;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", affine_step, whitened_norm_sq, accumulate_max_abs};
  return table;
}

}  // namespace resilient::kernels
