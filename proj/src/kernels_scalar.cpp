#include "kernels_impl.hpp"

namespace socmarket::kernels::detail {

double sum_scalar(const double* x, std::size_t n) {
  double lane[kSumLanes] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + kSumLanes <= n; i += kSumLanes) {
    for (std::size_t k = 0; k < kSumLanes; ++k) lane[k] += x[i + k];
  }
  double total = fold_lanes(lane);
  for (; i < n; ++i) total += x[i];
  return total;
}

std::size_t count_below_scaled_scalar(const double* x, std::size_t n, double divisor,
                                      double threshold) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (x[i] / divisor < threshold) ? 1 : 0;
  return count;
}

std::size_t argmin_scalar(const double* x, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < x[best]) best = i;
  }
  return best;
}

void divide_scalar(double* out, const double* x, std::size_t n, double divisor) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] / divisor;
}

}  // namespace socmarket::kernels::detail
