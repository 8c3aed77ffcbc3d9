#pragma once

// Spectral-scan receiver mode management: sweep channels looking for on-off
// keyed activity, lock onto the strongest one and demodulate it, fall back to
// sweeping when the enable sequence stops showing up.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airfi/channel.hpp"
#include "airfi/demod.hpp"

namespace airfi::rx {

enum class Mode { kScanning, kTriggering };

std::string to_string(Mode mode);

struct ReceiverState {
  Mode mode = Mode::kScanning;
  std::optional<int> locked_channel;
  double detection_score = 0.0;
  /// Channel that topped the previous window and how many windows in a row it did.
  std::optional<int> candidate_channel;
  int consecutive_hits = 0;

  /// Throws std::logic_error when a channel is held while scanning or missing while triggering.
  void check_invariant() const;
};

struct ReceiverConfig {
  double detection_threshold = 3.0;
  int windows_required = 2;
  /// Loss of signal after this many bit times without an enable detection.
  double loss_timeout_bits = 10.0;
};

/// Scan window in bit times. The score only rises while fewer than half of a
/// window's frames are ON, and a random-payload stream is about 43% ON, so the
/// window spans four frame periods (frame plus 8-bit gap) to keep that share
/// reliably under one half.
inline constexpr double kDefaultScanWindowBits = 224.0;

/// Channel -> p95 / median of max-bin magnitude; nullopt for a requested channel with no frames.
using ActivityScores = std::map<int, std::optional<double>>;

/// Scores the frames in [t_first, t_first + window_s). Channels listed in
/// `channels` always appear in the result.
ActivityScores scan_for_activity(std::span<const channel::FftFrame> frames, double window_s,
                                 std::span<const int> channels = {});

ReceiverState step_state(const ReceiverState& state, const ActivityScores& scores, bool signal_lost = false,
                         const ReceiverConfig& cfg = {});

bool signal_lost(std::int64_t now_ns, std::int64_t reference_ns, double bit_time_ms, const ReceiverConfig& cfg = {});

struct StateTransition {
  std::int64_t t_ns = 0;
  Mode from = Mode::kScanning;
  Mode to = Mode::kScanning;
  std::optional<int> channel;
};

/// {"t_ns":..,"from":"scanning","to":"triggering","channel":3}
std::string format_transition(const StateTransition& t);

/// Frame-driven receiver. Frames must arrive in timestamp order.
class SpectralReceiver {
 public:
  SpectralReceiver(double window_s, double bit_time_ms, ReceiverConfig cfg = {}, demod::DetectOptions detect = {});

  void push(const channel::FftFrame& frame);
  const ReceiverState& state() const { return state_; }
  const std::vector<StateTransition>& transitions() const { return transitions_; }
  std::optional<int> monitored_bin() const { return bin_; }
  std::vector<demod::DecodedSegment> take_segments();

 private:
  void close_window(std::int64_t now_ns);
  void set_state(const ReceiverState& next, std::int64_t now_ns);

  double window_s_;
  double bit_time_ms_;
  ReceiverConfig cfg_;
  demod::DetectOptions detect_;
  ReceiverState state_;
  std::vector<StateTransition> transitions_;
  std::vector<channel::FftFrame> window_;
  std::optional<int> bin_;
  std::optional<demod::SeriesDemodulator> demod_;
  std::int64_t locked_since_ns_ = 0;
  std::vector<demod::DecodedSegment> segments_;
};

}  // namespace airfi::rx
