#pragma once

// Batched inner loops of the Monte Carlo reachability engine.
//
// Trajectory batches are stored structure-of-arrays: component i of lane l
// lives at data[i * lanes + l]. Every kernel has a scalar reference version;
// vector variants are selected at runtime and must agree with the reference
// up to floating-point reassociation (FMA contraction).

#include <span>

namespace resilient::kernels {

struct KernelTable {
  const char* name;

  /// out = A x + G w for every lane. A is n x n and G is n x q, both
  /// row-major; x has n rows and w has q rows. out must not alias x.
  void (*affine_step)(std::span<const double> a, std::span<const double> g, int n, int q,
                      std::span<const double> x, std::span<const double> w,
                      std::span<double> out, int lanes);

  /// out[l] = |L^{-1} x_l|^2 with L lower triangular row-major (Cholesky
  /// factor of W, so out is x^T W^{-1} x). scratch holds n * lanes doubles.
  void (*whitened_norm_sq)(std::span<const double> lower, int n, std::span<const double> x,
                           std::span<double> scratch, std::span<double> out, int lanes);

  /// max_abs[i] = max(max_abs[i], |x[i, l]|) over all lanes.
  void (*accumulate_max_abs)(std::span<const double> x, int n, int lanes,
                             std::span<double> max_abs);
};

const KernelTable& scalar_kernels();

/// Null when the binary was built without the AVX2 variant or the CPU lacks
/// AVX2/FMA.
const KernelTable* avx2_kernels();

/// Best table for this machine unless scalar execution has been forced.
const KernelTable& active_kernels();

/// Force the scalar reference path (also enabled by RESILIENT_SIMD=scalar).
void force_scalar(bool enabled);

}  // namespace resilient::kernels
