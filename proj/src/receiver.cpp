#include "airfi/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace airfi::rx {
namespace {

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

constexpr double kDetectorLookaheadBits = 16.0;

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::kScanning ? "scanning" : "triggering"; }

void ReceiverState::check_invariant() const {
  if (mode == Mode::kScanning && locked_channel) throw std::logic_error("scanning receiver holds a locked channel");
  if (mode == Mode::kTriggering && !locked_channel) throw std::logic_error("triggering receiver has no channel");
}

ActivityScores scan_for_activity(std::span<const channel::FftFrame> frames, double window_s,
                                 std::span<const int> channels) {
  ActivityScores scores;
  for (int c : channels) scores[c] = std::nullopt;
  if (frames.empty()) return scores;
  const std::int64_t t0 = frames.front().timestamp_ns;
  const double span_ns = window_s * 1e9;

  std::map<int, std::vector<double>> per_channel;
  for (const auto& f : frames) {
    if (static_cast<double>(f.timestamp_ns - t0) >= span_ns) break;
    per_channel[f.channel_index].push_back(f.max_magnitude);
  }
  for (auto& [ch, mags] : per_channel) {
    std::sort(mags.begin(), mags.end());
    const double median = quantile(mags, 0.5);
    const double p95 = quantile(mags, 0.95);
    if (median > 0.0) {
      scores[ch] = p95 / median;
    } else {
      scores[ch] = p95 > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
  }
  return scores;
}

ReceiverState step_state(const ReceiverState& state, const ActivityScores& scores, bool lost,
                         const ReceiverConfig& cfg) {
  state.check_invariant();
  ReceiverState next = state;
  if (state.mode == Mode::kTriggering) {
    if (lost) next = ReceiverState{};
    next.check_invariant();
    return next;
  }

  std::optional<int> top;
  double top_score = 0.0;
  for (const auto& [ch, score] : scores) {
    if (score && (!top || *score > top_score)) {
      top = ch;
      top_score = *score;
    }
  }
  next.detection_score = top ? top_score : 0.0;
  if (top && top_score > cfg.detection_threshold) {
    // The carrier can fall inside several overlapping channels, so the leader
    // may change between windows; the lock follows the latest one.
    next.consecutive_hits = state.consecutive_hits + 1;
    next.candidate_channel = top;
  } else {
    next.consecutive_hits = 0;
    next.candidate_channel.reset();
  }
  if (next.consecutive_hits >= cfg.windows_required) {
    next.mode = Mode::kTriggering;
    next.locked_channel = next.candidate_channel;
    next.candidate_channel.reset();
    next.consecutive_hits = 0;
  }
  next.check_invariant();
  return next;
}

bool signal_lost(std::int64_t now_ns, std::int64_t reference_ns, double bit_time_ms, const ReceiverConfig& cfg) {
  return static_cast<double>(now_ns - reference_ns) > cfg.loss_timeout_bits * bit_time_ms * 1e6;
}

std::string format_transition(const StateTransition& t) {
  nlohmann::ordered_json j;
  j["t_ns"] = t.t_ns;
  j["from"] = to_string(t.from);
  j["to"] = to_string(t.to);
  j["channel"] = t.channel ? nlohmann::ordered_json(*t.channel) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

SpectralReceiver::SpectralReceiver(double window_s, double bit_time_ms, ReceiverConfig cfg, demod::DetectOptions detect)
    : window_s_(window_s), bit_time_ms_(bit_time_ms), cfg_(cfg), detect_(detect) {
  if (!(window_s > 0.0)) throw std::invalid_argument("window_s must be positive");
  if (!(bit_time_ms > 0.0)) throw std::invalid_argument("bit_time_ms must be positive");
}

void SpectralReceiver::set_state(const ReceiverState& next, std::int64_t now_ns) {
  if (next.mode != state_.mode) {
    transitions_.push_back({now_ns, state_.mode, next.mode, next.mode == Mode::kTriggering ? next.locked_channel : state_.locked_channel});
  }
  state_ = next;
}

void SpectralReceiver::close_window(std::int64_t now_ns) {
  const ActivityScores scores = scan_for_activity(window_, window_s_);
  const ReceiverState next = step_state(state_, scores, false, cfg_);
  if (next.mode == Mode::kTriggering) {
    // Monitor the bin that carried the strongest peaks on the locked channel.
    std::array<double, channel::kFftBins> peak{};
    for (const auto& f : window_) {
      if (f.channel_index != *next.locked_channel) continue;
      for (std::size_t b = 0; b < channel::kFftBins; ++b) peak[b] += f.bins[b] * f.bins[b];
    }
    bin_ = static_cast<int>(std::max_element(peak.begin(), peak.end()) - peak.begin());
    demod_.emplace(bit_time_ms_, detect_);
    locked_since_ns_ = now_ns;
  }
  set_state(next, now_ns);
  window_.clear();
}

void SpectralReceiver::push(const channel::FftFrame& frame) {
  if (state_.mode == Mode::kScanning) {
    if (!window_.empty() && static_cast<double>(frame.timestamp_ns - window_.front().timestamp_ns) >= window_s_ * 1e9) {
      close_window(frame.timestamp_ns);
    }
    if (state_.mode == Mode::kScanning) {
      window_.push_back(frame);
      return;
    }
  }
  if (frame.channel_index != *state_.locked_channel) return;
  demod_->push({frame.timestamp_ns, frame.bins[static_cast<std::size_t>(*bin_)]});
  auto got = demod_->take();
  std::move(got.begin(), got.end(), std::back_inserter(segments_));
  // A frame in flight counts as signal until its last slot. A fresh lock may
  // land mid-frame, so it gets one frame of grace before the first enable.
  const auto bit_ns = bit_time_ms_ * 1e6;
  const auto frame_ns = static_cast<std::int64_t>(static_cast<double>(codec::kFrameBits) * bit_ns);
  std::int64_t reference = locked_since_ns_ + frame_ns;
  if (const auto enable = demod_->last_enable_ns()) reference = std::max(reference, *enable + frame_ns);
  // The detector only judges a head once it sees 16 bit times past it.
  const auto examined_ns = frame.timestamp_ns - static_cast<std::int64_t>(kDetectorLookaheadBits * bit_ns);
  if (signal_lost(examined_ns, reference, bit_time_ms_, cfg_)) {
    set_state(step_state(state_, {}, true, cfg_), frame.timestamp_ns);
    demod_.reset();
    bin_.reset();
  }
}

std::vector<demod::DecodedSegment> SpectralReceiver::take_segments() { return std::exchange(segments_, {}); }

}  // namespace airfi::rx
