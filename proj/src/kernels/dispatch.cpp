#include <atomic>
#include <cstdlib>
#include <cstring>

#include "resilient/kernels.hpp"

namespace resilient::kernels {

#if defined(RESILIENT_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

namespace {

bool env_forces_scalar() {
  const char* value = std::getenv("RESILIENT_SIMD");
  return value != nullptr && std::strcmp(value, "scalar") == 0;
}

std::atomic<bool>& scalar_forced() {
  static std::atomic<bool> forced{env_forces_scalar()};
  return forced;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(RESILIENT_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  if (!scalar_forced().load(std::memory_order_relaxed)) {
    if (const KernelTable* table = avx2_kernels()) return *table;
  }
  return scalar_kernels();
}

void force_scalar(bool enabled) { scalar_forced().store(enabled, std::memory_order_relaxed); }

}  // namespace resilient::kernels
