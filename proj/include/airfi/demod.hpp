#pragma once

// OOK demodulation over a power-vs-time series.
//
// The IQ path turns each analysis window into one point: the Welch PSD value
// at the monitored carrier after the stream is shifted so the carrier sits at
// bin 0. The spectral-scan path uses the magnitude of the carrier's FFT bin in
// each frame. Both then share enable-sequence detection, slot slicing and
// packet recovery.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "airfi/channel.hpp"
#include "airfi/codec.hpp"
#include "airfi/dft.hpp"

namespace airfi::demod {

using cf32 = std::complex<float>;

struct DemodConfig {
  double freq_offset_hz = 0.0;
  double sample_rate_hz = 0.0;
  std::size_t buffer_size = 0;
  double bit_time_ms = 0.0;
  std::size_t window_size = 0;
  double corr_thresh = 0.7;
  std::size_t welch_segment = 0;
  double welch_overlap = 0.5;
  /// Offsets whose enable correlation is within this of the best count as ties.
  double tie_tolerance = 0.05;

  /// Four windows per bit, segment = window / 8, 50% overlap, 16 windows per buffer.
  static DemodConfig for_stream(double sample_rate_hz, double bit_time_ms, double freq_offset_hz = 0.0);
  /// Throws std::invalid_argument when any invariant is violated.
  void validate() const;
};

struct SamplePoint {
  std::int64_t t_ns = 0;
  double value = 0.0;
};

class SampleSeries {
 public:
  /// Throws std::invalid_argument on a non-increasing timestamp or negative/NaN value.
  void push(std::int64_t t_ns, double value);
  std::span<const SamplePoint> points() const { return points_; }
  const SamplePoint& operator[](std::size_t i) const { return points_[i]; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  void drop_front(std::size_t count);

 private:
  std::vector<SamplePoint> points_;
};

class WelchEstimator {
 public:
  /// Periodic Hann taper; hop = segment * (1 - overlap), at least 1.
  WelchEstimator(std::size_t segment, double overlap);

  std::size_t segment() const { return segment_; }
  std::size_t hop() const { return hop_; }
  std::size_t segment_count(std::size_t samples) const;
  /// Averaged periodogram, one value per DFT bin, normalised so the bins sum to
  /// the mean taper-weighted power of the input. Throws std::invalid_argument
  /// when the window is shorter than one segment.
  std::vector<double> psd(std::span<const cf32> window) const;

 private:
  std::size_t segment_;
  std::size_t hop_;
  std::vector<float> taper_;
  double taper_energy_;
  Dft dft_;
};

std::vector<double> welch_psd(std::span<const cf32> window, const DemodConfig& cfg);

/// One point per complete window: (window start time, PSD at the carrier bin).
SampleSeries power_series(const channel::IqStream& stream, const DemodConfig& cfg);

/// One point per frame: (timestamp, bins[bin]). With a channel given, frames of
/// other channels are skipped. Throws std::out_of_range for bin outside [0, 56).
SampleSeries fft_bin_series(std::span<const channel::FftFrame> frames, int bin,
                            std::optional<int> channel_index = std::nullopt);

struct DetectOptions {
  double corr_thresh = 0.7;
  double tie_tolerance = 0.05;
  std::size_t start_index = 0;
};

struct EnableDetection {
  bool found = false;
  /// Slicing level; meaningful only when found.
  double threshold = 0.0;
  std::size_t offset_index = 0;
  double correlation = 0.0;
  /// Where the next search should begin when nothing was found.
  std::size_t resume_index = 0;
};

/// Pearson correlation of the points in [t_i, t_i + 8 bits) with the ideal
/// rectangular 10101010 waveform anchored at point i. Zero for degenerate spans.
double enable_correlation(const SampleSeries& series, std::size_t index, double bit_time_ms);

/// Slides a head across the series starting at options.start_index. A head is
/// only tested once 16 bit times of samples are visible from it; a head whose
/// correlation is below the threshold is dropped. On a pass, the best offset
/// within the next 8 bit times is locked (earliest within tie_tolerance) and the
/// slicing threshold is the midpoint of the mean ON-slot and OFF-slot powers.
EnableDetection detect_enable(const SampleSeries& series, double bit_time_ms, const DetectOptions& options = {});

struct SliceResult {
  codec::Bits bits;
  bool underrun = false;
  std::size_t next_index = 0;
};

/// Slot-mean slicing of n_bits slots starting at det.offset_index. Stops early
/// with underrun set when the series ends mid-frame.
SliceResult slice_bits(const SampleSeries& series, const EnableDetection& det, double bit_time_ms,
                       std::size_t n_bits);

struct RecoveredPacket {
  std::size_t bit_index = 0;
  codec::DecodeResult result;
};

/// Scans for the preamble and decodes each aligned 48-bit candidate; skips past
/// accepted frames and one bit past rejected ones.
std::vector<RecoveredPacket> recover_packets(std::span<const std::uint8_t> bits);

struct DecodedSegment {
  std::int64_t start_ns = 0;
  double threshold = 0.0;
  double correlation = 0.0;
  codec::Bits bits;
  bool underrun = false;
};

/// Incremental detect -> slice loop over a growing series. Results only depend
/// on the samples, not on how they were chunked.
class SeriesDemodulator {
 public:
  SeriesDemodulator(double bit_time_ms, DetectOptions options = {}, std::size_t frame_bits = codec::kFrameBits);

  void push(const SamplePoint& point);
  /// Segments completed so far.
  std::vector<DecodedSegment> take();
  /// Ends the stream; a frame in progress is emitted with underrun set.
  std::vector<DecodedSegment> finish();
  /// Time of the most recent enable detection, if any.
  std::optional<std::int64_t> last_enable_ns() const { return last_enable_ns_; }

 private:
  void process(bool final);

  double bit_time_ms_;
  DetectOptions options_;
  std::size_t frame_bits_;
  SampleSeries series_;
  std::size_t cursor_ = 0;
  std::optional<EnableDetection> locked_;
  std::vector<DecodedSegment> ready_;
  std::optional<std::int64_t> last_enable_ns_;
};

/// Buffer-at-a-time IQ receiver: mix down, window, Welch, then SeriesDemodulator.
class StreamDemodulator {
 public:
  explicit StreamDemodulator(const DemodConfig& cfg);

  std::vector<DecodedSegment> push(std::span<const cf32> buffer);
  std::vector<DecodedSegment> finish();
  const SampleSeries& series() const { return series_; }

 private:
  DemodConfig cfg_;
  WelchEstimator welch_;
  SeriesDemodulator demod_;
  SampleSeries series_;
  std::vector<cf32> pending_;
  std::size_t consumed_ = 0;
  double phase_step_;
};

std::vector<DecodedSegment> demodulate_series(const SampleSeries& series, double bit_time_ms,
                                              const DetectOptions& options = {});
std::vector<DecodedSegment> demodulate_iq(const channel::IqStream& stream, const DemodConfig& cfg);

}  // namespace airfi::demod
