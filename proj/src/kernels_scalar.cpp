#include "lriso/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace lriso::kernels {
namespace {

double squared_distance(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return sum;
}

void squared_distances_to_rows(const double* x, const double* rows, std::size_t n_rows,
                               std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = squared_distance(x, rows + r * dim, dim);
}

void soft_threshold(const double* in, double* out, std::size_t n, double eps) {
  for (std::size_t k = 0; k < n; ++k) {
    const double shrunk = std::max(std::abs(in[k]) - eps, 0.0);
    out[k] = std::copysign(shrunk, in[k]);
  }
}

void nonneg_soft_threshold(const double* in, double* out, std::size_t n, double eps) {
  for (std::size_t k = 0; k < n; ++k) out[k] = std::max(in[k] - eps, 0.0);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::scalar, &squared_distance, &squared_distances_to_rows,
                                 &soft_threshold, &nonneg_soft_threshold};
  return table;
}

}  // namespace lriso::kernels
