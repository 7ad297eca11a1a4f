#include <atomic>
#include <cstdlib>
#include <cstring>

#include "dycore/common.hpp"
#include "dycore/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace dycore::simd {

namespace detail {
double pairwise_sum(const double* partial, std::size_t count) {
  if (count == 1) return partial[0];
  const std::size_t half = count / 2;
  return pairwise_sum(partial, half) + pairwise_sum(partial + half, count - half);
}
}  // namespace detail

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

const KernelTable* avx2_kernels() { return avx2_supported() ? avx2_table_unchecked() : nullptr; }

namespace {
const KernelTable* initial_table() {
  const char* env = std::getenv("DYCORE_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}
}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

void select_backend(Backend backend) {
  if (backend == Backend::kScalar) {
    active().store(&scalar_kernels());
    return;
  }
  const KernelTable* t = avx2_kernels();
  if (t == nullptr) throw Error("AVX2 kernels requested but the CPU does not support AVX2");
  active().store(t);
}

Backend active_backend() { return kernels().backend; }

}  // namespace dycore::simd
