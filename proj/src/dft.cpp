#include "airfi/dft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "airfi/simd/kernels.hpp"

namespace airfi::demod {
namespace {

constexpr std::size_t kMatrixLimit = 512;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

Dft::Dft(std::size_t size) : size_(size), radix2_(is_power_of_two(size)) {
  if (size == 0) throw std::invalid_argument("DFT size must be positive");
  twiddles_.resize(size);
  for (std::size_t m = 0; m < size; ++m) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(size);
    twiddles_[m] = {static_cast<float>(std::cos(angle)), static_cast<float>(std::sin(angle))};
  }
  if (radix2_) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < size) ++bits;
    bit_reverse_.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bit_reverse_[i] = r;
    }
  } else if (size <= kMatrixLimit) {
    matrix_.resize(size * size);
    for (std::size_t k = 0; k < size; ++k) {
      for (std::size_t n = 0; n < size; ++n) matrix_[k * size + n] = twiddles_[(k * n) % size];
    }
  }
}

void Dft::forward(std::span<const std::complex<float>> in, std::span<std::complex<float>> out) const {
  if (in.size() != size_ || out.size() != size_) throw std::invalid_argument("DFT input/output size mismatch");
  if (radix2_) {
    for (std::size_t i = 0; i < size_; ++i) out[bit_reverse_[i]] = in[i];
    for (std::size_t len = 2; len <= size_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = size_ / len;
      for (std::size_t start = 0; start < size_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const std::complex<float> t = twiddles_[j * stride] * out[start + j + half];
          const std::complex<float> u = out[start + j];
          out[start + j] = u + t;
          out[start + j + half] = u - t;
        }
      }
    }
    return;
  }
  const auto dot = simd::kernels().complex_dot;
  if (!matrix_.empty()) {
    for (std::size_t k = 0; k < size_; ++k) out[k] = dot(matrix_.data() + k * size_, in.data(), size_);
    return;
  }
  std::vector<std::complex<float>> row(size_);
  for (std::size_t k = 0; k < size_; ++k) {
    for (std::size_t n = 0; n < size_; ++n) row[n] = twiddles_[(k * n) % size_];
    out[k] = dot(row.data(), in.data(), size_);
  }
}

}  // namespace airfi::demod
