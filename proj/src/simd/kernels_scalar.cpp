#include "airfi/simd/kernels.hpp"

#include <cmath>
#include <cstring>

namespace airfi::simd::scalar {

void apply_taper(const cf32* x, const float* taper, cf32* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * taper[i];
}

void accumulate_power(const cf32* x, float* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float re = x[i].real();
    const float im = x[i].imag();
    acc[i] += re * re + im * im;
  }
}

cf32 complex_dot(const cf32* a, const cf32* b, std::size_t n) {
  float re = 0.0f;
  float im = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

void abs_sum_iq(const cf32* x, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(x[i].real()) + std::fabs(x[i].imag());
}

void gate_and_add(const float* envelope, const cf32* tone, const cf32* noise,
                  float noise_scale, cf32* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {envelope[i] * tone[i].real() + noise_scale * noise[i].real(),
              envelope[i] * tone[i].imag() + noise_scale * noise[i].imag()};
  }
}

double sum_squares(const cf32* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = x[i].real();
    const double im = x[i].imag();
    acc += re * re + im * im;
  }
  return acc;
}

void stream_copy(void* dst, const void* src, std::size_t bytes) { std::memcpy(dst, src, bytes); }

}  // namespace airfi::simd::scalar
