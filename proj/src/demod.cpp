#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "airfi/demod.hpp"

namespace airfi::demod {
namespace {

constexpr std::size_t kEnableBits = codec::kPreambleBits;

double bit_ns(double bit_time_ms) { return bit_time_ms * 1e6; }

// Nominal sample spacing near index i, used to tell whether a span is covered.
double spacing(const SampleSeries& s, std::size_t i) {
  if (s.size() < 2) return 0.0;
  if (i + 1 < s.size()) return static_cast<double>(s[i + 1].t_ns - s[i].t_ns);
  return static_cast<double>(s[i].t_ns - s[i - 1].t_ns);
}

double covered_until(const SampleSeries& s) {
  return static_cast<double>(s[s.size() - 1].t_ns) + spacing(s, s.size() - 1);
}

bool template_high(std::int64_t t, std::int64_t t0, double bit) {
  return static_cast<std::int64_t>(std::floor(static_cast<double>(t - t0) / bit)) % 2 == 0;
}

struct EnableLevels {
  double on_mean = 0.0;
  double off_mean = 0.0;
};

EnableLevels enable_levels(const SampleSeries& s, std::size_t index, double bit) {
  const std::int64_t t0 = s[index].t_ns;
  const double span = bit * kEnableBits;
  double on = 0.0, off = 0.0;
  std::size_t n_on = 0, n_off = 0;
  for (std::size_t j = index; j < s.size() && static_cast<double>(s[j].t_ns - t0) < span; ++j) {
    if (template_high(s[j].t_ns, t0, bit)) {
      on += s[j].value;
      ++n_on;
    } else {
      off += s[j].value;
      ++n_off;
    }
  }
  return {n_on ? on / static_cast<double>(n_on) : 0.0, n_off ? off / static_cast<double>(n_off) : 0.0};
}

}  // namespace

double enable_correlation(const SampleSeries& series, std::size_t index, double bit_time_ms) {
  if (index >= series.size()) return 0.0;
  const double bit = bit_ns(bit_time_ms);
  const double span = bit * kEnableBits;
  const std::int64_t t0 = series[index].t_ns;

  std::size_t end = index;
  double sum_x = 0.0, sum_y = 0.0;
  while (end < series.size() && static_cast<double>(series[end].t_ns - t0) < span) {
    sum_x += series[end].value;
    sum_y += template_high(series[end].t_ns, t0, bit) ? 1.0 : 0.0;
    ++end;
  }
  const auto n = static_cast<double>(end - index);
  if (n < 2.0) return 0.0;
  const double mean_x = sum_x / n;
  const double mean_y = sum_y / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t j = index; j < end; ++j) {
    const double dx = series[j].value - mean_x;
    const double dy = (template_high(series[j].t_ns, t0, bit) ? 1.0 : 0.0) - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // Rounding-level wiggle on a flat series must not read as a pattern.
  if (sxx <= 1e-12 * n * mean_x * mean_x || sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

EnableDetection detect_enable(const SampleSeries& series, double bit_time_ms, const DetectOptions& options) {
  if (!(bit_time_ms > 0.0)) throw std::invalid_argument("bit_time_ms must be positive");
  const double bit = bit_ns(bit_time_ms);
  EnableDetection det;
  std::size_t head = options.start_index;
  if (series.empty()) return det;
  const double visible_end = covered_until(series);

  for (; head < series.size(); ++head) {
    const double head_t = static_cast<double>(series[head].t_ns);
    if (visible_end - head_t < 2.0 * kEnableBits * bit) break;
    const double head_corr = enable_correlation(series, head, bit_time_ms);
    if (head_corr < options.corr_thresh) continue;

    // Lock the best offset among those whose enable span fits in the 16-bit view.
    std::vector<double> corr;
    for (std::size_t i = head; i < series.size() && static_cast<double>(series[i].t_ns) - head_t <= kEnableBits * bit;
         ++i) {
      corr.push_back(i == head ? head_corr : enable_correlation(series, i, bit_time_ms));
    }
    const double best = *std::max_element(corr.begin(), corr.end());
    std::size_t chosen = 0;
    while (corr[chosen] < best - options.tie_tolerance) ++chosen;

    det.found = true;
    det.offset_index = head + chosen;
    det.correlation = corr[chosen];
    const EnableLevels levels = enable_levels(series, det.offset_index, bit);
    det.threshold = 0.5 * (levels.on_mean + levels.off_mean);
    det.resume_index = det.offset_index;
    return det;
  }
  det.resume_index = head;
  return det;
}

SliceResult slice_bits(const SampleSeries& series, const EnableDetection& det, double bit_time_ms,
                       std::size_t n_bits) {
  if (!det.found) throw std::invalid_argument("slice_bits needs a locked enable detection");
  if (det.offset_index >= series.size()) throw std::out_of_range("enable offset is past the end of the series");
  const double bit = bit_ns(bit_time_ms);
  const double t0 = static_cast<double>(series[det.offset_index].t_ns);
  const double covered = covered_until(series);

  SliceResult out;
  out.bits.reserve(n_bits);
  std::size_t j = det.offset_index;
  for (std::size_t k = 0; k < n_bits; ++k) {
    const double slot_end = t0 + static_cast<double>(k + 1) * bit;
    if (covered < slot_end) {
      out.underrun = true;
      break;
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (; j < series.size() && static_cast<double>(series[j].t_ns) < slot_end; ++j) {
      sum += series[j].value;
      ++count;
    }
    out.bits.push_back(count > 0 && sum / static_cast<double>(count) > det.threshold ? 1 : 0);
  }
  out.next_index = j;
  return out;
}

std::vector<RecoveredPacket> recover_packets(std::span<const std::uint8_t> bits) {
  static constexpr std::uint8_t kPreamble[] = {1, 0, 1, 0, 1, 0, 1, 0};
  std::vector<RecoveredPacket> out;
  std::size_t i = 0;
  while (i + kEnableBits <= bits.size()) {
    bool aligned = true;
    for (std::size_t b = 0; b < kEnableBits && aligned; ++b) aligned = (bits[i + b] != 0) == (kPreamble[b] != 0);
    if (!aligned) {
      ++i;
      continue;
    }
    const auto candidate = bits.subspan(i, std::min(codec::kFrameBits, bits.size() - i));
    RecoveredPacket rp{i, codec::decode_frame(candidate)};
    const bool accepted = std::holds_alternative<codec::Packet>(rp.result);
    const bool truncated = !accepted && std::get<codec::DecodeError>(rp.result) == codec::DecodeError::kTruncated;
    out.push_back(std::move(rp));
    if (truncated) break;
    i += accepted ? codec::kFrameBits : 1;
  }
  return out;
}

SeriesDemodulator::SeriesDemodulator(double bit_time_ms, DetectOptions options, std::size_t frame_bits)
    : bit_time_ms_(bit_time_ms), options_(options), frame_bits_(frame_bits) {
  if (!(bit_time_ms > 0.0)) throw std::invalid_argument("bit_time_ms must be positive");
  if (frame_bits == 0) throw std::invalid_argument("frame_bits must be positive");
  cursor_ = options_.start_index;
}

void SeriesDemodulator::push(const SamplePoint& point) { series_.push(point.t_ns, point.value); }

void SeriesDemodulator::process(bool final) {
  const double bit = bit_ns(bit_time_ms_);
  while (!series_.empty()) {
    if (!locked_) {
      DetectOptions opts = options_;
      opts.start_index = cursor_;
      const EnableDetection det = detect_enable(series_, bit_time_ms_, opts);
      if (!det.found) {
        cursor_ = det.resume_index;
        break;
      }
      locked_ = det;
      last_enable_ns_ = series_[det.offset_index].t_ns;
    }
    const std::int64_t t0 = series_[locked_->offset_index].t_ns;
    const double frame_end = static_cast<double>(t0) + static_cast<double>(frame_bits_) * bit;
    if (!final && covered_until(series_) < frame_end) break;
    SliceResult sliced = slice_bits(series_, *locked_, bit_time_ms_, frame_bits_);
    // A frame that does not decode may have been a false lock on payload bits
    // that hides the real preamble, so search again right after its start.
    const bool rejected = !sliced.underrun && frame_bits_ == codec::kFrameBits &&
                          !std::holds_alternative<codec::Packet>(codec::decode_frame(sliced.bits));
    cursor_ = rejected ? locked_->offset_index + 1 : sliced.next_index;
    ready_.push_back({t0, locked_->threshold, locked_->correlation, std::move(sliced.bits), sliced.underrun});
    locked_.reset();
    if (sliced.underrun) break;
  }
  if (!locked_ && cursor_ > 4096) {
    series_.drop_front(cursor_);
    cursor_ = 0;
  }
}

std::vector<DecodedSegment> SeriesDemodulator::take() {
  process(false);
  return std::exchange(ready_, {});
}

std::vector<DecodedSegment> SeriesDemodulator::finish() {
  process(true);
  return std::exchange(ready_, {});
}

StreamDemodulator::StreamDemodulator(const DemodConfig& cfg)
    : cfg_(cfg),
      welch_(cfg.welch_segment, cfg.welch_overlap),
      demod_(cfg.bit_time_ms, DetectOptions{cfg.corr_thresh, cfg.tie_tolerance, 0}),
      phase_step_(-2.0 * std::numbers::pi * cfg.freq_offset_hz / cfg.sample_rate_hz) {
  cfg_.validate();
}

std::vector<DecodedSegment> StreamDemodulator::push(std::span<const cf32> buffer) {
  for (const cf32& x : buffer) {
    const double phase = std::fmod(phase_step_ * static_cast<double>(consumed_ + pending_.size()), 2.0 * std::numbers::pi);
    pending_.push_back(x * cf32{static_cast<float>(std::cos(phase)), static_cast<float>(std::sin(phase))});
    if (pending_.size() == cfg_.window_size) {
      const auto t_ns = static_cast<std::int64_t>(std::llround(static_cast<double>(consumed_) * 1e9 / cfg_.sample_rate_hz));
      const double value = welch_.psd(pending_)[0];
      series_.push(t_ns, value);
      demod_.push({t_ns, value});
      consumed_ += pending_.size();
      pending_.clear();
    }
  }
  return demod_.take();
}

std::vector<DecodedSegment> StreamDemodulator::finish() { return demod_.finish(); }

std::vector<DecodedSegment> demodulate_series(const SampleSeries& series, double bit_time_ms,
                                              const DetectOptions& options) {
  SeriesDemodulator demod(bit_time_ms, options);
  for (const auto& p : series.points()) demod.push(p);
  return demod.finish();
}

std::vector<DecodedSegment> demodulate_iq(const channel::IqStream& stream, const DemodConfig& cfg) {
  cfg.validate();
  StreamDemodulator rx(cfg);
  std::vector<DecodedSegment> out;
  const std::span<const cf32> all(stream.samples);
  for (std::size_t i = 0; i < all.size(); i += cfg.buffer_size) {
    auto got = rx.push(all.subspan(i, std::min(cfg.buffer_size, all.size() - i)));
    std::move(got.begin(), got.end(), std::back_inserter(out));
  }
  auto rest = rx.finish();
  std::move(rest.begin(), rest.end(), std::back_inserter(out));
  return out;
}

}  // namespace airfi::demod
