#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airfi/modem_tx.hpp"

namespace airfi::channel {

using cf32 = std::complex<float>;

// --- DDR emission model ------------------------------------------------------

struct DdrConfig {
  double clock_rate_mhz = 2400.0;
  int line_width_bits = 64;
  int harmonic = 1;

  /// Throws std::invalid_argument on a non-positive clock, a width outside
  /// {16, 32, 64}, or harmonic < 1.
  void validate() const;
};

/// Peak bus transfer rate f * 2 * l / 8 (two transfers per clock, l-bit line).
/// Only requires clock_rate_mhz >= 0.
double ddr_bandwidth(const DdrConfig& cfg);

/// Carrier produced by bus activity: clock * harmonic, in MHz.
double ddr_emission_frequency(const DdrConfig& cfg);

/// Same module run at a different bus clock (over- or down-clocked).
DdrConfig reclock(DdrConfig cfg, double clock_rate_mhz);

// --- 2.4 GHz Wi-Fi channel plan ---------------------------------------------

enum class Allowance { kYes, kNo, kCanadaOnly, k11bOnly };

struct WifiChannel {
  int index = 0;
  double center_mhz = 0.0;
  double low_mhz = 0.0;
  double high_mhz = 0.0;
  Allowance north_america = Allowance::kYes;
  Allowance japan = Allowance::kYes;
  Allowance others = Allowance::kYes;

  bool allowed_north_america() const { return north_america == Allowance::kYes; }
  bool allowed_japan() const { return japan == Allowance::kYes || japan == Allowance::k11bOnly; }
};

std::span<const WifiChannel> wifi_channels();
/// Throws std::out_of_range for indices outside 1..14.
const WifiChannel& wifi_channel(int index);
std::string to_string(Allowance a);
/// The channel plan as CSV: channel,center_mhz,low_mhz,high_mhz,north_america,japan,others
std::string wifi_channel_table_csv();

inline constexpr double kInterferenceMarginMhz = 10.0;
inline constexpr double kBandLowMhz = 2300.0;
inline constexpr double kBandHighMhz = 2600.0;

struct ChannelOverlap {
  /// Channels whose regulated range intersects the emission band.
  std::vector<WifiChannel> overlapping;
  /// Channels whose nominal occupied band (center +/- margin) intersects the
  /// emission band, i.e. whose center lies within margin of the emission.
  std::vector<WifiChannel> interfering;
};

/// Empty result for carriers outside 2300-2600 MHz.
ChannelOverlap overlapping_channels(double carrier_mhz, double bandwidth_hz,
                                    double margin_mhz = kInterferenceMarginMhz);

// --- Channel model -----------------------------------------------------------

struct ChannelModel {
  double carrier_freq_mhz = 2424.0;
  double signal_bandwidth_hz = 1000.0;
  /// Tone power over noise power within signal_bandwidth_hz. +inf disables noise.
  double snr_db = 20.0;
  double jammer_snr_penalty_db = 0.0;
  std::uint64_t noise_seed = 1;

  double effective_snr_db() const;
  bool noiseless() const;
  void validate() const;
};

inline constexpr double kJammedSnr6CoresDb = 4.8;
inline constexpr double kJammedSnr8CoresDb = 3.1;

/// Background CPU load on `cores` cores (1..8) caps the effective SNR. Never raises it.
ChannelModel apply_jammer(ChannelModel ch, int cores);

// --- IQ path -----------------------------------------------------------------

struct IqStream {
  double sample_rate_hz = 0.0;
  double center_freq_mhz = 0.0;
  std::vector<cf32> samples;

  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

/// Tuning that places the carrier fs/8 above the stream center.
double default_center_mhz(double carrier_mhz, double sample_rate_hz);

/// Envelope-gated tone at (carrier - center) plus circular white Gaussian noise
/// scaled so the in-band SNR matches the model. Throws std::invalid_argument when
/// sample_rate_hz < 4 * bandwidth or the tone offset is beyond Nyquist.
IqStream synthesize_iq(const tx::EmissionTimeline& tl, const ChannelModel& ch, double sample_rate_hz,
                       double duration_s, double center_freq_mhz);

// --- Spectral-scan path ------------------------------------------------------

inline constexpr std::size_t kFftBins = 56;
inline constexpr double kScanSpanMhz = 20.0;

struct FftFrame {
  std::int64_t timestamp_ns = 0;
  int channel_index = 0;
  std::array<float, kFftBins> bins{};
  int max_bin_index = 0;
  float max_magnitude = 0.0f;

  /// Recomputes max_bin_index / max_magnitude from bins (first maximum wins).
  void update_max();
  friend bool operator==(const FftFrame&, const FftFrame&) = default;
};

enum class ScanMode { kScanning, kTriggering };

std::string to_string(ScanMode mode);

struct FrameCadence {
  /// Aggregate over the whole scanned set.
  double scanning_fps = 20.0;
  double triggering_fps = 400.0;
};

/// Bin of the 56-bin scan that contains freq_mhz, if the channel's span covers it.
std::optional<int> bin_for_frequency(const WifiChannel& channel, double freq_mhz);
double bin_center_mhz(const WifiChannel& channel, int bin);

/// Frames for duration_s seconds. Scanning mode round-robins `channels`;
/// triggering mode requires exactly one channel. Bin magnitudes are |I| + |Q|
/// of unit-power complex noise per bin plus, while the envelope is ON, the
/// carrier tone in its bin at the model's effective SNR. Throws
/// std::invalid_argument on an empty channel list or a multi-channel trigger.
std::vector<FftFrame> synthesize_fft_frames(const tx::EmissionTimeline& tl, const ChannelModel& ch, ScanMode mode,
                                            std::span<const int> channels, double duration_s,
                                            const FrameCadence& cadence = {});

}  // namespace airfi::channel
