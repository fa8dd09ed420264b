#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace socmarket::kernels {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::scalar, detail::sum_scalar,
                                 detail::count_below_scaled_scalar, detail::argmin_scalar,
                                 detail::divide_scalar};
  return table;
}

const KernelTable* avx2_table() noexcept {
#if defined(SOCMARKET_HAVE_AVX2)
  static const KernelTable table{Isa::avx2, detail::sum_avx2, detail::count_below_scaled_avx2,
                                 detail::argmin_avx2, detail::divide_avx2};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() noexcept {
#if defined(__aarch64__)
  static const KernelTable table{Isa::neon, detail::sum_neon, detail::count_below_scaled_neon,
                                 detail::argmin_neon, detail::divide_neon};
  return &table;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& resolve() noexcept {
  const char* forced = std::getenv("SOCMARKET_ISA");
  if (forced != nullptr) {
    std::string_view want(forced);
    if (want == "scalar") return scalar_table();
    if (want == "avx2" && avx2_table() != nullptr) return *avx2_table();
    if (want == "neon" && neon_table() != nullptr) return *neon_table();
  }
  if (const KernelTable* t = avx2_table()) return *t;
  if (const KernelTable* t = neon_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = resolve();
  return table;
}

}  // namespace socmarket::kernels
