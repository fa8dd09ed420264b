#pragma once

// Data-parallel inner loops used once per simulation step over all agents.
//
// Every kernel has a scalar reference implementation and optional SIMD
// variants (AVX2 on x86-64, NEON on AArch64). The variant is chosen at
// runtime from CPU features; results are bit-identical across variants:
//
//   * sum() uses a fixed 8-lane canonical order. Element i is accumulated
//     into lane i % 8 over the full 8-blocks, lanes are folded as
//     ((l0+l1)+(l2+l3)) + ((l4+l5)+(l6+l7)), then the tail is added in
//     index order. The scalar path emulates the lanes explicitly.
//   * count_below_scaled() and divide() are element-wise IEEE operations.
//   * argmin() returns the lowest index attaining the minimum.
//
// Set SOCMARKET_ISA=scalar|avx2|neon in the environment to force a variant.

#include <cstddef>
#include <span>
#include <string_view>

namespace socmarket::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  double (*sum)(const double* x, std::size_t n);
  std::size_t (*count_below_scaled)(const double* x, std::size_t n,
                                    double divisor, double threshold);
  std::size_t (*argmin)(const double* x, std::size_t n);
  void (*divide)(double* out, const double* x, std::size_t n, double divisor);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

// Best available table, honoring SOCMARKET_ISA. Resolved once.
const KernelTable& active() noexcept;

inline double sum(std::span<const double> x) {
  return active().sum(x.data(), x.size());
}

// Number of i with x[i] / divisor < threshold.
inline std::size_t count_below_scaled(std::span<const double> x, double divisor,
                                      double threshold) {
  return active().count_below_scaled(x.data(), x.size(), divisor, threshold);
}

// Lowest index of the minimum; n must be > 0.
inline std::size_t argmin(std::span<const double> x) {
  return active().argmin(x.data(), x.size());
}

inline void divide(std::span<double> out, std::span<const double> x, double divisor) {
  active().divide(out.data(), x.data(), x.size(), divisor);
}

}  // namespace socmarket::kernels
