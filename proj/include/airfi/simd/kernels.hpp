#pragma once

// Data-parallel inner loops used by the channel synthesizer, the Welch
// estimator and the stress transmitter. Every kernel has a scalar reference
// implementation; wider variants are picked once at startup based on what
// the CPU reports. Set AIRFI_SIMD=scalar in the environment to pin the
// reference path.

#include <complex>
#include <cstddef>
#include <string_view>

namespace airfi::simd {

using cf32 = std::complex<float>;

enum class Level { kScalar, kAvx2 };

struct KernelTable {
  // out[i] = x[i] * taper[i]
  void (*apply_taper)(const cf32* x, const float* taper, cf32* out, std::size_t n);
  // acc[i] += |x[i]|^2
  void (*accumulate_power)(const cf32* x, float* acc, std::size_t n);
  // sum_i a[i] * b[i]
  cf32 (*complex_dot)(const cf32* a, const cf32* b, std::size_t n);
  // out[i] = |re(x[i])| + |im(x[i])|
  void (*abs_sum_iq)(const cf32* x, float* out, std::size_t n);
  // out[i] = envelope[i] * tone[i] + noise_scale * noise[i]
  void (*gate_and_add)(const float* envelope, const cf32* tone, const cf32* noise,
                       float noise_scale, cf32* out, std::size_t n);
  // sum_i |x[i]|^2, accumulated in double
  double (*sum_squares)(const cf32* x, std::size_t n);
  // memcpy; the wide variant uses non-temporal stores so the copy reaches DRAM
  void (*stream_copy)(void* dst, const void* src, std::size_t bytes);
};

/// Kernels for the active level.
const KernelTable& kernels();
/// Kernels for an explicit level; falls back to scalar when unsupported.
const KernelTable& kernels(Level level);

Level active_level();
bool level_supported(Level level);
/// Overrides runtime selection. Throws std::invalid_argument if the CPU lacks the level.
void force_level(Level level);
std::string_view level_name(Level level);

namespace scalar {
void apply_taper(const cf32* x, const float* taper, cf32* out, std::size_t n);
void accumulate_power(const cf32* x, float* acc, std::size_t n);
cf32 complex_dot(const cf32* a, const cf32* b, std::size_t n);
void abs_sum_iq(const cf32* x, float* out, std::size_t n);
void gate_and_add(const float* envelope, const cf32* tone, const cf32* noise,
                  float noise_scale, cf32* out, std::size_t n);
double sum_squares(const cf32* x, std::size_t n);
void stream_copy(void* dst, const void* src, std::size_t bytes);
}  // namespace scalar

namespace avx2 {
void apply_taper(const cf32* x, const float* taper, cf32* out, std::size_t n);
void accumulate_power(const cf32* x, float* acc, std::size_t n);
cf32 complex_dot(const cf32* a, const cf32* b, std::size_t n);
void abs_sum_iq(const cf32* x, float* out, std::size_t n);
void gate_and_add(const float* envelope, const cf32* tone, const cf32* noise,
                  float noise_scale, cf32* out, std::size_t n);
double sum_squares(const cf32* x, std::size_t n);
void stream_copy(void* dst, const void* src, std::size_t bytes);
}  // namespace avx2

}  // namespace airfi::simd
