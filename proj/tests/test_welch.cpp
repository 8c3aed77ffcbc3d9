#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "airfi/demod.hpp"

using namespace airfi::demod;
using cd = std::complex<double>;

namespace {

std::vector<cd> naive_dft(const std::vector<cf32>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t m = 0; m < n; ++m) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>((k * m) % n) / static_cast<double>(n);
      out[k] += cd(x[m]) * cd(std::cos(a), std::sin(a));
    }
  }
  return out;
}

std::vector<cf32> tone(std::size_t n, double cycles_per_sample, double phase = 0.3) {
  std::vector<cf32> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * cycles_per_sample * static_cast<double>(i) + phase;
    x[i] = {static_cast<float>(std::cos(a)), static_cast<float>(std::sin(a))};
  }
  return x;
}

std::vector<cf32> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, std::sqrt(0.5f));
  std::vector<cf32> x(n);
  for (auto& z : x) z = {g(rng), g(rng)};
  return x;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_SUITE("welch") {

TEST_CASE("DFT matches direct evaluation") {
  for (std::size_t n : {1, 2, 3, 8, 56, 64, 100, 512, 1024}) {
    CAPTURE(n);
    const auto x = noise(n, n);
    std::vector<cf32> out(n);
    Dft(n).forward(x, out);
    const auto ref = naive_dft(x);
    double err = 0, scale = 0;
    for (std::size_t k = 0; k < n; ++k) {
      err = std::max(err, std::abs(cd(out[k]) - ref[k]));
      scale = std::max(scale, std::abs(ref[k]));
    }
    CHECK(err <= 1e-4 * (1 + scale));
  }
  std::vector<cf32> in(8), out(4);
  CHECK_THROWS_AS(Dft(8).forward(in, out), std::invalid_argument);
  CHECK_THROWS_AS(Dft(0), std::invalid_argument);
}

TEST_CASE("a tone on a bin frequency peaks in that bin") {
  for (std::size_t n : {56, 64}) {
    const WelchEstimator welch(n, 0.5);
    for (std::size_t k = 0; k < n; ++k) {
      CAPTURE(n);
      CAPTURE(k);
      CHECK(argmax(welch.psd(tone(8 * n, static_cast<double>(k) / static_cast<double>(n)))) == k);
    }
  }
}

TEST_CASE("zero input gives a zero spectrum") {
  const WelchEstimator welch(32, 0.5);
  for (double p : welch.psd(std::vector<cf32>(256))) CHECK(p == 0.0);
  CHECK_THROWS_AS(welch.psd(std::vector<cf32>(31)), std::invalid_argument);
  CHECK_THROWS_AS(WelchEstimator(1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(WelchEstimator(8, 1.0), std::invalid_argument);
}

TEST_CASE("bins sum to the mean tapered power") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t seg = 8 + rng() % 120;
    const auto x = noise(seg * (2 + rng() % 10) + rng() % seg, rng());
    const WelchEstimator welch(seg, 0.5);
    const auto psd = welch.psd(x);

    // Direct time-domain evaluation with the same periodic Hann taper.
    std::vector<double> w(seg);
    double wsum = 0;
    for (std::size_t i = 0; i < seg; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg));
      wsum += w[i] * w[i];
    }
    const std::size_t count = welch.segment_count(x.size());
    double expected = 0;
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t i = 0; i < seg; ++i) expected += std::norm(cd(x[s * welch.hop() + i])) * w[i] * w[i];
    }
    expected /= static_cast<double>(count) * wsum;
    CHECK(std::accumulate(psd.begin(), psd.end(), 0.0) == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("averaging 64 segments cuts the bin variance at least 32-fold") {
  const std::size_t seg = 64;
  const WelchEstimator welch(seg, 0.5);
  const std::size_t averaged_len = seg + 63 * welch.hop();
  REQUIRE(welch.segment_count(averaged_len) == 64);

  auto bin_variance = [&](std::size_t len) {
    std::vector<double> sum(seg, 0.0), sum2(seg, 0.0);
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
      const auto psd = welch.psd(noise(len, 1000 + static_cast<std::uint64_t>(s)));
      for (std::size_t k = 0; k < seg; ++k) {
        sum[k] += psd[k];
        sum2[k] += psd[k] * psd[k];
      }
    }
    double v = 0;
    for (std::size_t k = 0; k < seg; ++k) {
      const double m = sum[k] / seeds;
      v += sum2[k] / seeds - m * m;
    }
    return v / static_cast<double>(seg);
  };
  const double single = bin_variance(seg);
  const double averaged = bin_variance(averaged_len);
  CHECK(single / averaged >= 32.0);
}

}
