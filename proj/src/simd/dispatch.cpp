#include <cstdlib>
#include <cstring>

#include "nvscat/simd/kernels.hpp"

namespace nvscat::simd {

bool avx2_available() {
  if (!avx2_kernels()) return false;
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const KernelTable& kernels() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("NVSCAT_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    return avx2_available() ? avx2_kernels() : &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace nvscat::simd
