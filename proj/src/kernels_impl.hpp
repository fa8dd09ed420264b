#pragma once

#include <cstddef>

#include "socmarket/kernels.hpp"

namespace socmarket::kernels::detail {

inline constexpr std::size_t kSumLanes = 8;

inline double fold_lanes(const double* lane) {
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
         ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

double sum_scalar(const double* x, std::size_t n);
std::size_t count_below_scaled_scalar(const double* x, std::size_t n, double divisor,
                                      double threshold);
std::size_t argmin_scalar(const double* x, std::size_t n);
void divide_scalar(double* out, const double* x, std::size_t n, double divisor);

#if defined(SOCMARKET_HAVE_AVX2)
double sum_avx2(const double* x, std::size_t n);
std::size_t count_below_scaled_avx2(const double* x, std::size_t n, double divisor,
                                    double threshold);
std::size_t argmin_avx2(const double* x, std::size_t n);
void divide_avx2(double* out, const double* x, std::size_t n, double divisor);
#endif

#if defined(__aarch64__)
double sum_neon(const double* x, std::size_t n);
std::size_t count_below_scaled_neon(const double* x, std::size_t n, double divisor,
                                    double threshold);
std::size_t argmin_neon(const double* x, std::size_t n);
void divide_neon(double* out, const double* x, std::size_t n, double divisor);
#endif

}  // namespace socmarket::kernels::detail
