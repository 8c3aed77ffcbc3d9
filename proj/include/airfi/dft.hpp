#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace airfi::demod {

/// Forward DFT of a fixed length, X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
/// Radix-2 for powers of two, direct evaluation otherwise.
class Dft {
 public:
  explicit Dft(std::size_t size);

  std::size_t size() const { return size_; }
  void forward(std::span<const std::complex<float>> in, std::span<std::complex<float>> out) const;

 private:
  std::size_t size_;
  bool radix2_;
  std::vector<std::complex<float>> twiddles_;  // e^{-j 2 pi m / N}, m < N
  std::vector<std::complex<float>> matrix_;    // direct path, row-major N x N when small
  std::vector<std::size_t> bit_reverse_;
};

}  // namespace airfi::demod
