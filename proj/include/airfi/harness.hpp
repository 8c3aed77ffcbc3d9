#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "airfi/channel.hpp"
#include "airfi/codec.hpp"
#include "airfi/demod.hpp"
#include "airfi/modem_tx.hpp"

namespace airfi::harness {

enum class ReceiverPath { kIq, kFftScanning, kFftTriggering };

std::string to_string(ReceiverPath path);
/// Accepts "iq", "fft_scanning", "fft_triggering". Throws std::invalid_argument otherwise.
ReceiverPath parse_path(std::string_view text);

/// Bit-rate presets: SDR 100 bit/s, scanning 1 bit/s, triggering 10 bit/s
/// (16 bit/s is the faster triggering preset).
double preset_bit_rate(ReceiverPath path);
inline constexpr double kFastTriggeringBitRate = 16.0;

struct ExperimentConfig {
  std::vector<double> snr_points_db{0, 3, 6, 9, 12, 15, 18};
  double bit_rate_bps = 100.0;
  ReceiverPath receiver_path = ReceiverPath::kIq;
  std::size_t packets_per_point = 25;
  std::uint64_t seed = 1;
  int jammer_cores = 0;

  double carrier_mhz = 2424.0;
  double signal_bandwidth_hz = 1000.0;
  std::size_t gap_bits = 8;
  /// Silence before the first frame and after the last one.
  std::size_t lead_bits = 16;
  std::size_t tail_bits = 16;
  /// 0 picks max(4 * bandwidth, 320 * bit rate).
  double iq_sample_rate_hz = 0.0;
  /// Scanned set for fft_scanning; empty means the channels the carrier interferes with.
  std::vector<int> scan_channels;
  channel::FrameCadence cadence;
  double corr_thresh = 0.7;

  void validate() const;
};

/// Keys mirror the field names. snr values may be numbers or "inf".
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct BerReport {
  double snr_db = 0.0;
  double effective_snr_db = 0.0;
  double bit_rate_bps = 0.0;
  ReceiverPath receiver_path = ReceiverPath::kIq;
  std::size_t bits_sent = 0;
  /// Wrong or undelivered frame bits.
  std::size_t bit_errors = 0;
  double ber = 0.0;
  std::size_t packets_sent = 0;
  std::size_t packets_recovered = 0;
  std::size_t packets_rejected = 0;
  /// CRC-valid packets that do not match the frame sent at that position.
  std::size_t false_packets = 0;
  std::uint64_t seed = 0;
  /// Empty unless the point aborted.
  std::string diagnostic;
};

/// Per-position receiver output over the whole schedule: 0/1, or -1 where
/// nothing was delivered.
using ReceivedBits = std::vector<std::int8_t>;


struct PointRun {
  BerReport report;
  codec::Bits sent;
  ReceivedBits received;
  std::vector<std::size_t> frame_starts;
};

/// Random payloads drawn from cfg.seed, framed and laid out with lead/tail silence.
struct Transmission {
  std::vector<codec::Packet> packets;
  /// Schedule index of each frame's first bit.
  std::vector<std::size_t> frame_starts;
  tx::BitSchedule schedule;
};

Transmission make_transmission(const ExperimentConfig& cfg);

/// Ground truth as JSON: bit_rate_bps, bits ("0101..."), frame_starts, payloads (hex).
nlohmann::json transmission_to_json(const Transmission& t);
Transmission transmission_from_json(const nlohmann::json& j);

/// Places every segment at round(start / bit time) in the schedule and scores
/// frame bits and packets against the transmission. Fills the count fields of
/// run.report and run.received/sent/frame_starts.
void score_segments(const Transmission& t, std::span<const demod::DecodedSegment> segments, PointRun& run);

/// One SNR point end to end: random payloads -> frames -> schedule -> channel ->
/// receiver path -> demod -> alignment against the known schedule.
PointRun run_point(const ExperimentConfig& cfg, double snr_db, std::size_t point_index);

/// Reports in SNR-point order. A failing point yields a row with a diagnostic.
std::vector<BerReport> run_ber_sweep(const ExperimentConfig& cfg);

struct ModeStats {
  channel::ScanMode mode = channel::ScanMode::kScanning;
  std::size_t frames = 0;
  double frames_per_s = 0.0;
  std::size_t channels = 0;
  double per_channel_fps = 0.0;
  /// Per-channel frame rate over the minimum of 4 samples per bit.
  double achievable_bit_rate_bps = 0.0;
};

struct ModeComparison {
  double duration_s = 5.0;
  ModeStats scanning;
  ModeStats triggering;
  std::vector<BerReport> scanning_ber;
  std::vector<BerReport> triggering_ber;
};

/// Frame throughput of both modes over duration_s, plus a BER sweep of each at
/// its preset bit rate over cfg.snr_points_db.
ModeComparison compare_modes(const ExperimentConfig& cfg, double duration_s = 5.0, bool with_ber = true);

enum class ReportFormat { kCsv, kJson };

inline constexpr std::string_view kCsvHeader =
    "snr_db,bit_rate_bps,receiver_path,bits_sent,bit_errors,ber,packets_sent,packets_recovered,packets_rejected,seed";

std::string format_csv(const std::vector<BerReport>& reports);
nlohmann::json reports_to_json(const std::vector<BerReport>& reports);
/// Throws std::invalid_argument for an empty report list and std::runtime_error
/// naming the path when it cannot be written.
void emit_report(const std::vector<BerReport>& reports, ReportFormat format, const std::filesystem::path& path);

/// Channels the harness scans for a carrier, and the one it demodulates.
std::vector<int> default_scan_channels(double carrier_mhz);
int monitor_channel(double carrier_mhz, const std::vector<int>& candidates);

}  // namespace airfi::harness
