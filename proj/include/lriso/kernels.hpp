#pragma once

// Data-parallel inner loops shared by the distance, clustering and
// thresholding code. Each kernel has a portable scalar reference and, on
// x86-64, an AVX2+FMA variant. The variant is picked once at runtime from the
// CPU feature flags; LRISO_SIMD=scalar in the environment forces the
// reference path.

#include <cstddef>
#include <string_view>

namespace lriso::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;

  // sum_k (a[k] - b[k])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);

  // out[r] = squared_distance(x, rows + r * dim, dim) for r in [0, n_rows)
  void (*squared_distances_to_rows)(const double* x, const double* rows, std::size_t n_rows,
                                    std::size_t dim, double* out);

  // out[k] = sgn(in[k]) * max(|in[k]| - eps, 0)
  void (*soft_threshold)(const double* in, double* out, std::size_t n, double eps);

  // out[k] = max(in[k] - eps, 0); equals max(soft_threshold(in, eps), 0)
  void (*nonneg_soft_threshold)(const double* in, double* out, std::size_t n, double eps);
};

const KernelTable& scalar_table();

// Null when the variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_supports(Backend backend);

// The table chosen for this process.
const KernelTable& active();

// Overrides the runtime choice; throws ArgumentError if the backend is not
// available on this machine. Intended for tests and benchmarks.
void set_backend(Backend backend);

std::string_view backend_name(Backend backend);

}  // namespace lriso::kernels
