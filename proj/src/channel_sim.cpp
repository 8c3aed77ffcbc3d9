#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "airfi/channel.hpp"
#include "airfi/simd/kernels.hpp"

namespace airfi::channel {
namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Envelope value for output sample n at rate fs, sampled at the sample midpoint.
float envelope_at_sample(const tx::EmissionTimeline& tl, std::size_t n, double fs) {
  const double pos = (static_cast<double>(n) + 0.5) * tl.sample_rate_hz / fs;
  const auto idx = static_cast<std::size_t>(pos);
  return idx < tl.envelope.size() ? tl.envelope[idx] : 0.0f;
}

}  // namespace

double ChannelModel::effective_snr_db() const { return snr_db - jammer_snr_penalty_db; }

bool ChannelModel::noiseless() const { return std::isinf(effective_snr_db()) && effective_snr_db() > 0; }

void ChannelModel::validate() const {
  if (!(signal_bandwidth_hz > 0.0)) throw std::invalid_argument("signal_bandwidth_hz must be positive");
  if (std::isnan(snr_db) || std::isnan(effective_snr_db())) throw std::invalid_argument("snr_db must be a number");
  if (jammer_snr_penalty_db < 0.0) throw std::invalid_argument("jammer_snr_penalty_db must be >= 0");
}

ChannelModel apply_jammer(ChannelModel ch, int cores) {
  if (cores < 0 || cores > 8) throw std::invalid_argument("jammer cores must be in 0..8");
  if (cores == 0) return ch;
  const double base = ch.effective_snr_db();
  double cap;
  if (cores <= 6) {
    cap = std::isinf(base) ? (cores == 6 ? kJammedSnr6CoresDb : base)
                           : base + (kJammedSnr6CoresDb - base) * cores / 6.0;
  } else {
    cap = kJammedSnr6CoresDb + (kJammedSnr8CoresDb - kJammedSnr6CoresDb) * (cores - 6) / 2.0;
  }
  if (cap >= base) return ch;
  if (std::isinf(ch.snr_db)) {
    ch.snr_db = cap;
    ch.jammer_snr_penalty_db = 0.0;
  } else {
    ch.jammer_snr_penalty_db = ch.snr_db - cap;
  }
  return ch;
}

double default_center_mhz(double carrier_mhz, double sample_rate_hz) {
  return carrier_mhz - sample_rate_hz / 8.0 / 1e6;
}

IqStream synthesize_iq(const tx::EmissionTimeline& tl, const ChannelModel& ch, double sample_rate_hz,
                       double duration_s, double center_freq_mhz) {
  ch.validate();
  if (!(sample_rate_hz >= 4.0 * ch.signal_bandwidth_hz)) {
    throw std::invalid_argument("sample rate must be at least 4x the signal bandwidth");
  }
  const double offset_hz = (ch.carrier_freq_mhz - center_freq_mhz) * 1e6;
  if (!(std::abs(offset_hz) < sample_rate_hz / 2.0)) {
    throw std::invalid_argument("carrier offset is beyond the Nyquist limit of the stream");
  }
  if (!(duration_s >= 0.0)) throw std::invalid_argument("duration must be >= 0");

  IqStream stream;
  stream.sample_rate_hz = sample_rate_hz;
  stream.center_freq_mhz = center_freq_mhz;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));

  std::vector<float> envelope(n);
  for (std::size_t i = 0; i < n; ++i) envelope[i] = envelope_at_sample(tl, i, sample_rate_hz);

  std::vector<cf32> tone(n);
  const double step = 2.0 * std::numbers::pi * offset_hz / sample_rate_hz;
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = std::fmod(step * static_cast<double>(i), 2.0 * std::numbers::pi);
    tone[i] = {static_cast<float>(std::cos(phase)), static_cast<float>(std::sin(phase))};
  }

  // Unit-amplitude tone: P = 1, so N0 = 1 / (snr * B) and the per-sample
  // complex noise variance is N0 * fs.
  std::vector<cf32> noise(n);
  float noise_scale = 0.0f;
  if (!ch.noiseless()) {
    const double variance = sample_rate_hz / (db_to_linear(ch.effective_snr_db()) * ch.signal_bandwidth_hz);
    noise_scale = static_cast<float>(std::sqrt(variance / 2.0));
    std::mt19937_64 rng(ch.noise_seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    for (auto& z : noise) {
      const float re = gauss(rng);
      z = {re, gauss(rng)};
    }
  }
  stream.samples.resize(n);
  simd::kernels().gate_and_add(envelope.data(), tone.data(), noise.data(), noise_scale, stream.samples.data(), n);
  return stream;
}

void FftFrame::update_max() {
  const auto it = std::max_element(bins.begin(), bins.end());
  max_bin_index = static_cast<int>(it - bins.begin());
  max_magnitude = *it;
}

std::string to_string(ScanMode mode) { return mode == ScanMode::kScanning ? "scanning" : "triggering"; }

std::optional<int> bin_for_frequency(const WifiChannel& channel, double freq_mhz) {
  const double lo = channel.center_mhz - kScanSpanMhz / 2.0;
  const double pos = (freq_mhz - lo) / (kScanSpanMhz / static_cast<double>(kFftBins));
  if (pos < 0.0 || pos >= static_cast<double>(kFftBins)) return std::nullopt;
  return static_cast<int>(pos);
}

double bin_center_mhz(const WifiChannel& channel, int bin) {
  const double width = kScanSpanMhz / static_cast<double>(kFftBins);
  return channel.center_mhz - kScanSpanMhz / 2.0 + (bin + 0.5) * width;
}

std::vector<FftFrame> synthesize_fft_frames(const tx::EmissionTimeline& tl, const ChannelModel& ch, ScanMode mode,
                                            std::span<const int> channels, double duration_s,
                                            const FrameCadence& cadence) {
  ch.validate();
  if (channels.empty()) throw std::invalid_argument("at least one channel is required");
  if (mode == ScanMode::kTriggering && channels.size() != 1) {
    throw std::invalid_argument("triggering mode samples exactly one channel");
  }
  const double fps = mode == ScanMode::kScanning ? cadence.scanning_fps : cadence.triggering_fps;
  if (!(fps > 0.0)) throw std::invalid_argument("frame cadence must be positive");

  std::vector<std::optional<int>> carrier_bins;
  for (int idx : channels) carrier_bins.push_back(bin_for_frequency(wifi_channel(idx), ch.carrier_freq_mhz));

  const bool noiseless = ch.noiseless();
  const double amplitude = noiseless ? 1.0 : std::sqrt(db_to_linear(ch.effective_snr_db()));
  const float noise_scale = noiseless ? 0.0f : static_cast<float>(std::sqrt(0.5));

  std::mt19937_64 rng(ch.noise_seed);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  const auto count = static_cast<std::size_t>(std::floor(duration_s * fps + 1e-9));
  std::vector<FftFrame> frames;
  frames.reserve(count);

  std::array<float, kFftBins> gate{};
  std::array<cf32, kFftBins> tone{};
  std::array<cf32, kFftBins> noise{};
  std::array<cf32, kFftBins> field{};
  const auto& kern = simd::kernels();
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t slot = k % channels.size();
    const double t = static_cast<double>(k) / fps;
    FftFrame frame;
    frame.timestamp_ns = static_cast<std::int64_t>(std::llround(t * 1e9));
    frame.channel_index = channels[slot];

    gate.fill(0.0f);
    tone.fill(cf32{});
    const double phase = phase_dist(rng);
    if (carrier_bins[slot] && tl.at(t) > 0.0f) {
      const auto b = static_cast<std::size_t>(*carrier_bins[slot]);
      gate[b] = tl.at(t);
      tone[b] = {static_cast<float>(amplitude * std::cos(phase)), static_cast<float>(amplitude * std::sin(phase))};
    }
    if (!noiseless) {
      for (auto& z : noise) {
        const float re = gauss(rng);
        z = {re, gauss(rng)};
      }
    }
    kern.gate_and_add(gate.data(), tone.data(), noise.data(), noise_scale, field.data(), kFftBins);
    kern.abs_sum_iq(field.data(), frame.bins.data(), kFftBins);
    frame.update_max();
    frames.push_back(frame);
  }
  return frames;
}

}  // namespace airfi::channel
