#include <cmath>
#include <numbers>
#include <stdexcept>

#include "airfi/demod.hpp"
#include "airfi/simd/kernels.hpp"

namespace airfi::demod {

DemodConfig DemodConfig::for_stream(double sample_rate_hz, double bit_time_ms, double freq_offset_hz) {
  DemodConfig cfg;
  cfg.sample_rate_hz = sample_rate_hz;
  cfg.bit_time_ms = bit_time_ms;
  cfg.freq_offset_hz = freq_offset_hz;
  const double samples_per_bit = bit_time_ms * sample_rate_hz / 1000.0;
  cfg.window_size = static_cast<std::size_t>(std::floor(samples_per_bit / 4.0));
  cfg.welch_segment = std::max<std::size_t>(2, cfg.window_size / 8);
  cfg.buffer_size = cfg.window_size * 16;
  cfg.validate();
  return cfg;
}

void DemodConfig::validate() const {
  if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample_rate_hz must be positive");
  if (!(bit_time_ms > 0.0)) throw std::invalid_argument("bit_time_ms must be positive");
  if (window_size == 0) throw std::invalid_argument("window_size must be positive");
  if (window_size > buffer_size) throw std::invalid_argument("window_size must not exceed buffer_size");
  if (static_cast<double>(window_size) > bit_time_ms * sample_rate_hz / 1000.0 / 4.0 + 1e-9) {
    throw std::invalid_argument("window_size allows fewer than 4 windows per bit");
  }
  if (!(corr_thresh > 0.0 && corr_thresh < 1.0)) throw std::invalid_argument("corr_thresh must lie in (0, 1)");
  if (welch_segment < 2 || welch_segment > window_size) {
    throw std::invalid_argument("welch_segment must be in [2, window_size]");
  }
  if (!(welch_overlap >= 0.0 && welch_overlap < 1.0)) throw std::invalid_argument("welch_overlap must lie in [0, 1)");
  if (!(tie_tolerance >= 0.0)) throw std::invalid_argument("tie_tolerance must be >= 0");
  if (!(std::abs(freq_offset_hz) < sample_rate_hz / 2.0)) {
    throw std::invalid_argument("freq_offset_hz is beyond the Nyquist limit");
  }
}

void SampleSeries::push(std::int64_t t_ns, double value) {
  if (!points_.empty() && t_ns <= points_.back().t_ns) {
    throw std::invalid_argument("sample timestamps must be strictly increasing");
  }
  if (!(value >= 0.0)) throw std::invalid_argument("sample power must be >= 0");
  points_.push_back({t_ns, value});
}

void SampleSeries::drop_front(std::size_t count) {
  count = std::min(count, points_.size());
  points_.erase(points_.begin(), points_.begin() + static_cast<std::ptrdiff_t>(count));
}

WelchEstimator::WelchEstimator(std::size_t segment, double overlap)
    : segment_(segment),
      hop_(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(segment) * (1.0 - overlap))))),
      taper_(segment),
      taper_energy_(0.0),
      dft_(segment) {
  if (segment < 2) throw std::invalid_argument("Welch segment must hold at least 2 samples");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("Welch overlap must lie in [0, 1)");
  for (std::size_t n = 0; n < segment; ++n) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(segment));
    taper_[n] = static_cast<float>(w);
    taper_energy_ += static_cast<double>(taper_[n]) * taper_[n];
  }
}

std::size_t WelchEstimator::segment_count(std::size_t samples) const {
  return samples < segment_ ? 0 : (samples - segment_) / hop_ + 1;
}

std::vector<double> WelchEstimator::psd(std::span<const cf32> window) const {
  const std::size_t segments = segment_count(window.size());
  if (segments == 0) throw std::invalid_argument("window is shorter than one Welch segment");
  const auto& kern = simd::kernels();
  std::vector<cf32> tapered(segment_);
  std::vector<cf32> spectrum(segment_);
  std::vector<float> acc(segment_, 0.0f);
  for (std::size_t s = 0; s < segments; ++s) {
    kern.apply_taper(window.data() + s * hop_, taper_.data(), tapered.data(), segment_);
    dft_.forward(tapered, spectrum);
    kern.accumulate_power(spectrum.data(), acc.data(), segment_);
  }
  // sum_k |X_k|^2 = N * sum_n |w x|^2, so this scaling makes the bins sum to
  // the mean over segments of sum_n |w x|^2 / sum_n w^2.
  const double scale = 1.0 / (static_cast<double>(segments) * static_cast<double>(segment_) * taper_energy_);
  std::vector<double> out(segment_);
  for (std::size_t k = 0; k < segment_; ++k) out[k] = static_cast<double>(acc[k]) * scale;
  return out;
}

std::vector<double> welch_psd(std::span<const cf32> window, const DemodConfig& cfg) {
  if (cfg.welch_segment < 2) throw std::invalid_argument("welch_segment must be >= 2");
  return WelchEstimator(cfg.welch_segment, cfg.welch_overlap).psd(window);
}

SampleSeries power_series(const channel::IqStream& stream, const DemodConfig& cfg) {
  cfg.validate();
  if (std::abs(stream.sample_rate_hz - cfg.sample_rate_hz) > 1e-6 * cfg.sample_rate_hz) {
    throw std::invalid_argument("demod sample rate does not match the stream");
  }
  const WelchEstimator welch(cfg.welch_segment, cfg.welch_overlap);
  const double step = -2.0 * std::numbers::pi * cfg.freq_offset_hz / cfg.sample_rate_hz;
  SampleSeries series;
  std::vector<cf32> window(cfg.window_size);
  const std::size_t windows = stream.samples.size() / cfg.window_size;
  for (std::size_t w = 0; w < windows; ++w) {
    const std::size_t first = w * cfg.window_size;
    for (std::size_t i = 0; i < cfg.window_size; ++i) {
      const double phase = std::fmod(step * static_cast<double>(first + i), 2.0 * std::numbers::pi);
      window[i] = stream.samples[first + i] * cf32{static_cast<float>(std::cos(phase)), static_cast<float>(std::sin(phase))};
    }
    const auto t_ns = static_cast<std::int64_t>(std::llround(static_cast<double>(first) * 1e9 / cfg.sample_rate_hz));
    series.push(t_ns, welch.psd(window)[0]);
  }
  return series;
}

SampleSeries fft_bin_series(std::span<const channel::FftFrame> frames, int bin, std::optional<int> channel_index) {
  if (bin < 0 || bin >= static_cast<int>(channel::kFftBins)) throw std::out_of_range("FFT bin must be in [0, 56)");
  SampleSeries series;
  for (const auto& f : frames) {
    if (channel_index && f.channel_index != *channel_index) continue;
    series.push(f.timestamp_ns, f.bins[static_cast<std::size_t>(bin)]);
  }
  return series;
}

}  // namespace airfi::demod
