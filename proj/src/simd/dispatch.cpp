#include "airfi/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace airfi::simd {
namespace {

constexpr KernelTable kScalarTable{
    scalar::apply_taper, scalar::accumulate_power, scalar::complex_dot, scalar::abs_sum_iq,
    scalar::gate_and_add, scalar::sum_squares,     scalar::stream_copy,
};

#ifdef AIRFI_HAVE_AVX2_TU
constexpr KernelTable kAvx2Table{
    avx2::apply_taper, avx2::accumulate_power, avx2::complex_dot, avx2::abs_sum_iq,
    avx2::gate_and_add, avx2::sum_squares,     avx2::stream_copy,
};
#endif

bool cpu_has_avx2() {
#if defined(AIRFI_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Level detect() {
  if (const char* env = std::getenv("AIRFI_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Level::kScalar;
  }
  return cpu_has_avx2() ? Level::kAvx2 : Level::kScalar;
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{detect()};
  return level;
}

}  // namespace

bool level_supported(Level level) {
  switch (level) {
    case Level::kScalar:
      return true;
    case Level::kAvx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels(Level level) {
#ifdef AIRFI_HAVE_AVX2_TU
  if (level == Level::kAvx2 && level_supported(Level::kAvx2)) return kAvx2Table;
#else
  (void)level;
#endif
  return kScalarTable;
}

const KernelTable& kernels() { return kernels(active_level()); }

Level active_level() { return current().load(std::memory_order_relaxed); }

void force_level(Level level) {
  if (!level_supported(level)) {
    throw std::invalid_argument("SIMD level not supported on this CPU: " + std::string(level_name(level)));
  }
  current().store(level, std::memory_order_relaxed);
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kScalar:
      return "scalar";
    case Level::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace airfi::simd
