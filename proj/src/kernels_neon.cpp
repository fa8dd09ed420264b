#if defined(__aarch64__)
#include <arm_neon.h>

#include <algorithm>

#include "kernels_impl.hpp"

namespace socmarket::kernels::detail {

double sum_neon(const double* x, std::size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0);
  float64x2_t a1 = vdupq_n_f64(0.0);
  float64x2_t a2 = vdupq_n_f64(0.0);
  float64x2_t a3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + kSumLanes <= n; i += kSumLanes) {
    a0 = vaddq_f64(a0, vld1q_f64(x + i));
    a1 = vaddq_f64(a1, vld1q_f64(x + i + 2));
    a2 = vaddq_f64(a2, vld1q_f64(x + i + 4));
    a3 = vaddq_f64(a3, vld1q_f64(x + i + 6));
  }
  double lane[kSumLanes];
  vst1q_f64(lane, a0);
  vst1q_f64(lane + 2, a1);
  vst1q_f64(lane + 4, a2);
  vst1q_f64(lane + 6, a3);
  double total = fold_lanes(lane);
  for (; i < n; ++i) total += x[i];
  return total;
}

std::size_t count_below_scaled_neon(const double* x, std::size_t n, double divisor,
                                    double threshold) {
  const float64x2_t d = vdupq_n_f64(divisor);
  const float64x2_t t = vdupq_n_f64(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64x2_t lt = vcltq_f64(vdivq_f64(vld1q_f64(x + i), d), t);
    count += static_cast<std::size_t>((vgetq_lane_u64(lt, 0) & 1u) + (vgetq_lane_u64(lt, 1) & 1u));
  }
  for (; i < n; ++i) count += (x[i] / divisor < threshold) ? 1 : 0;
  return count;
}

std::size_t argmin_neon(const double* x, std::size_t n) {
  if (n < 4) return argmin_scalar(x, n);
  float64x2_t m = vld1q_f64(x);
  std::size_t i = 2;
  for (; i + 2 <= n; i += 2) m = vminq_f64(m, vld1q_f64(x + i));
  double best = std::min(vgetq_lane_f64(m, 0), vgetq_lane_f64(m, 1));
  for (; i < n; ++i) best = std::min(best, x[i]);
  for (i = 0; i < n; ++i) {
    if (x[i] == best) return i;
  }
  return argmin_scalar(x, n);
}

void divide_neon(double* out, const double* x, std::size_t n, double divisor) {
  const float64x2_t d = vdupq_n_f64(divisor);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vdivq_f64(vld1q_f64(x + i), d));
  for (; i < n; ++i) out[i] = x[i] / divisor;
}

}  // namespace socmarket::kernels::detail
#endif
