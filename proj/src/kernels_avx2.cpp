// Compiled with -mavx2 -mfma. Nothing in here may be called unless
// cpu_supports(Backend::avx2) is true.
#include "lriso/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace lriso::kernels {
namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; k + 4 <= n; k += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) {
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
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d threshold = _mm256_set1_pd(eps);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d v = _mm256_loadu_pd(in + k);
    const __m256d sign = _mm256_and_pd(v, sign_mask);
    const __m256d magnitude = _mm256_andnot_pd(sign_mask, v);
    const __m256d shrunk = _mm256_max_pd(_mm256_sub_pd(magnitude, threshold), zero);
    _mm256_storeu_pd(out + k, _mm256_or_pd(shrunk, sign));
  }
  for (; k < n; ++k) {
    const double shrunk = std::max(std::abs(in[k]) - eps, 0.0);
    out[k] = std::copysign(shrunk, in[k]);
  }
}

void nonneg_soft_threshold(const double* in, double* out, std::size_t n, double eps) {
  const __m256d threshold = _mm256_set1_pd(eps);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d v = _mm256_loadu_pd(in + k);
    _mm256_storeu_pd(out + k, _mm256_max_pd(_mm256_sub_pd(v, threshold), zero));
  }
  for (; k < n; ++k) out[k] = std::max(in[k] - eps, 0.0);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Backend::avx2, &squared_distance, &squared_distances_to_rows,
                                 &soft_threshold, &nonneg_soft_threshold};
  return &table;
}

}  // namespace lriso::kernels
