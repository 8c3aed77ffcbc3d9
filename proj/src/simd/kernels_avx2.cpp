// Compiled with -mavx2 -mfma. Only reached when the dispatcher has confirmed
// both features at runtime.

#include "airfi/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <cstring>

namespace airfi::simd::avx2 {
namespace {

inline const float* as_floats(const cf32* p) { return reinterpret_cast<const float*>(p); }
inline float* as_floats(cf32* p) { return reinterpret_cast<float*>(p); }

// (a0 b0, a1 b1, a2 b2, a3 b3) for four interleaved complex pairs
inline __m256 complex_mul(__m256 a, __m256 b) {
  const __m256 b_re = _mm256_moveldup_ps(b);
  const __m256 b_im = _mm256_movehdup_ps(b);
  const __m256 a_swapped = _mm256_permute_ps(a, 0xB1);
  return _mm256_fmaddsub_ps(a, b_re, _mm256_mul_ps(a_swapped, b_im));
}

// Pairwise sums of two vectors of four complex values each, in element order.
inline __m256 pair_sums(__m256 lo, __m256 hi) {
  const __m256 h = _mm256_hadd_ps(lo, hi);
  return _mm256_castpd_ps(_mm256_permute4x64_pd(_mm256_castps_pd(h), _MM_SHUFFLE(3, 1, 2, 0)));
}

// Each of four floats duplicated into adjacent lanes: e0 e0 e1 e1 e2 e2 e3 e3.
inline __m256 duplicate_pairs(const float* p) {
  const __m256 v = _mm256_castps128_ps256(_mm_loadu_ps(p));
  return _mm256_permutevar8x32_ps(v, _mm256_setr_epi32(0, 0, 1, 1, 2, 2, 3, 3));
}

}  // namespace

void apply_taper(const cf32* x, const float* taper, cf32* out, std::size_t n) {
  const float* in = as_floats(x);
  float* dst = as_floats(out);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256 w = duplicate_pairs(taper + i);
    _mm256_storeu_ps(dst + 2 * i, _mm256_mul_ps(_mm256_loadu_ps(in + 2 * i), w));
  }
  for (; i < n; ++i) out[i] = x[i] * taper[i];
}

void accumulate_power(const cf32* x, float* acc, std::size_t n) {
  const float* in = as_floats(x);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 lo = _mm256_loadu_ps(in + 2 * i);
    const __m256 hi = _mm256_loadu_ps(in + 2 * i + 8);
    const __m256 p = pair_sums(_mm256_mul_ps(lo, lo), _mm256_mul_ps(hi, hi));
    _mm256_storeu_ps(acc + i, _mm256_add_ps(_mm256_loadu_ps(acc + i), p));
  }
  for (; i < n; ++i) {
    const float re = x[i].real();
    const float im = x[i].imag();
    acc[i] += re * re + im * im;
  }
}

cf32 complex_dot(const cf32* a, const cf32* b, std::size_t n) {
  const float* pa = as_floats(a);
  const float* pb = as_floats(b);
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_ps(acc0, complex_mul(_mm256_loadu_ps(pa + 2 * i), _mm256_loadu_ps(pb + 2 * i)));
    acc1 = _mm256_add_ps(acc1, complex_mul(_mm256_loadu_ps(pa + 2 * i + 8), _mm256_loadu_ps(pb + 2 * i + 8)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_ps(acc0, complex_mul(_mm256_loadu_ps(pa + 2 * i), _mm256_loadu_ps(pb + 2 * i)));
  }
  alignas(32) float lanes[8];
  _mm256_store_ps(lanes, _mm256_add_ps(acc0, acc1));
  float re = lanes[0] + lanes[2] + lanes[4] + lanes[6];
  float im = lanes[1] + lanes[3] + lanes[5] + lanes[7];
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

void abs_sum_iq(const cf32* x, float* out, std::size_t n) {
  const float* in = as_floats(x);
  const __m256 abs_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7FFFFFFF));
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 lo = _mm256_and_ps(_mm256_loadu_ps(in + 2 * i), abs_mask);
    const __m256 hi = _mm256_and_ps(_mm256_loadu_ps(in + 2 * i + 8), abs_mask);
    _mm256_storeu_ps(out + i, pair_sums(lo, hi));
  }
  for (; i < n; ++i) out[i] = std::fabs(x[i].real()) + std::fabs(x[i].imag());
}

void gate_and_add(const float* envelope, const cf32* tone, const cf32* noise,
                  float noise_scale, cf32* out, std::size_t n) {
  const float* pt = as_floats(tone);
  const float* pn = as_floats(noise);
  float* dst = as_floats(out);
  const __m256 scale = _mm256_set1_ps(noise_scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256 env = duplicate_pairs(envelope + i);
    const __m256 scaled_noise = _mm256_mul_ps(scale, _mm256_loadu_ps(pn + 2 * i));
    _mm256_storeu_ps(dst + 2 * i, _mm256_fmadd_ps(env, _mm256_loadu_ps(pt + 2 * i), scaled_noise));
  }
  for (; i < n; ++i) {
    out[i] = {envelope[i] * tone[i].real() + noise_scale * noise[i].real(),
              envelope[i] * tone[i].imag() + noise_scale * noise[i].imag()};
  }
}

double sum_squares(const cf32* x, std::size_t n) {
  const float* in = as_floats(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256 v = _mm256_loadu_ps(in + 2 * i);
    const __m256 sq = _mm256_mul_ps(v, v);
    acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm256_castps256_ps128(sq)));
    acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm256_extractf128_ps(sq, 1)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    const double re = x[i].real();
    const double im = x[i].imag();
    total += re * re + im * im;
  }
  return total;
}

void stream_copy(void* dst, const void* src, std::size_t bytes) {
  auto* d = static_cast<std::uint8_t*>(dst);
  const auto* s = static_cast<const std::uint8_t*>(src);
  const std::size_t misalign = reinterpret_cast<std::uintptr_t>(d) & 31u;
  std::size_t head = misalign == 0 ? 0 : 32 - misalign;
  if (head > bytes) head = bytes;
  std::memcpy(d, s, head);
  std::size_t i = head;
  for (; i + 128 <= bytes; i += 128) {
    const __m256i v0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i));
    const __m256i v1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i + 32));
    const __m256i v2 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i + 64));
    const __m256i v3 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i + 96));
    _mm256_stream_si256(reinterpret_cast<__m256i*>(d + i), v0);
    _mm256_stream_si256(reinterpret_cast<__m256i*>(d + i + 32), v1);
    _mm256_stream_si256(reinterpret_cast<__m256i*>(d + i + 64), v2);
    _mm256_stream_si256(reinterpret_cast<__m256i*>(d + i + 96), v3);
  }
  for (; i + 32 <= bytes; i += 32) {
    _mm256_stream_si256(reinterpret_cast<__m256i*>(d + i),
                        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i)));
  }
  _mm_sfence();
  std::memcpy(d + i, s + i, bytes - i);
}

}  // namespace airfi::simd::avx2
