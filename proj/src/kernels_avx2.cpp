// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>
#include <bit>

#include "kernels_impl.hpp"

namespace socmarket::kernels::detail {

double sum_avx2(const double* x, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kSumLanes <= n; i += kSumLanes) {
    lo = _mm256_add_pd(lo, _mm256_loadu_pd(x + i));
    hi = _mm256_add_pd(hi, _mm256_loadu_pd(x + i + 4));
  }
  alignas(32) double lane[kSumLanes];
  _mm256_store_pd(lane, lo);
  _mm256_store_pd(lane + 4, hi);
  double total = fold_lanes(lane);
  for (; i < n; ++i) total += x[i];
  return total;
}

std::size_t count_below_scaled_avx2(const double* x, std::size_t n, double divisor,
                                    double threshold) {
  const __m256d d = _mm256_set1_pd(divisor);
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d q = _mm256_div_pd(_mm256_loadu_pd(x + i), d);
    int mask = _mm256_movemask_pd(_mm256_cmp_pd(q, t, _CMP_LT_OQ));
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) count += (x[i] / divisor < threshold) ? 1 : 0;
  return count;
}

std::size_t argmin_avx2(const double* x, std::size_t n) {
  if (n < 8) return argmin_scalar(x, n);
  __m256d m = _mm256_loadu_pd(x);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) m = _mm256_min_pd(m, _mm256_loadu_pd(x + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double best = std::min(std::min(lane[0], lane[1]), std::min(lane[2], lane[3]));
  for (; i < n; ++i) best = std::min(best, x[i]);

  // Second pass: first index equal to the minimum.
  const __m256d b = _mm256_set1_pd(best);
  i = 0;
  for (; i + 4 <= n; i += 4) {
    int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), b, _CMP_EQ_OQ));
    if (mask != 0) return i + static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) {
    if (x[i] == best) return i;
  }
  return argmin_scalar(x, n);  // only reachable with NaN input
}

void divide_avx2(double* out, const double* x, std::size_t n, double divisor) {
  const __m256d d = _mm256_set1_pd(divisor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(x + i), d));
  for (; i < n; ++i) out[i] = x[i] / divisor;
}

}  // namespace socmarket::kernels::detail
