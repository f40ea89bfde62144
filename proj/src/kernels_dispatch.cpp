#include <atomic>
#include <cstdlib>
#include <string>

#include "lriso/errors.hpp"
#include "lriso/kernels.hpp"

namespace lriso::kernels {

#ifndef LRISO_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(LRISO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

const KernelTable* detect() {
  if (const char* forced = std::getenv("LRISO_SIMD")) {
    if (std::string(forced) == "scalar") return &scalar_table();
  }
  if (cpu_supports(Backend::avx2)) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_backend(Backend backend) {
  if (!cpu_supports(backend)) {
    throw ArgumentError("kernel backend '" + std::string(backend_name(backend)) +
                        "' is not available on this machine");
  }
  slot().store(backend == Backend::avx2 ? avx2_table() : &scalar_table(),
               std::memory_order_release);
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace lriso::kernels
