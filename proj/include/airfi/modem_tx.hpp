#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "airfi/codec.hpp"

namespace airfi::tx {

class BitSchedule {
 public:
  /// Throws std::invalid_argument unless bit_time_ms > 0 and every symbol is 0 or 1.
  BitSchedule(codec::Bits bits, double bit_time_ms);

  const codec::Bits& bits() const { return bits_; }
  double bit_time_ms() const { return bit_time_ms_; }
  std::size_t size() const { return bits_.size(); }
  double duration_s() const { return static_cast<double>(bits_.size()) * bit_time_ms_ / 1000.0; }

 private:
  codec::Bits bits_;
  double bit_time_ms_;
};

inline double bit_time_ms_for_rate(double bits_per_second) { return 1000.0 / bits_per_second; }

/// Frames back to back, separated (not followed) by gap_bits zero bits.
BitSchedule build_schedule(std::span<const codec::Frame> frames, double bit_time_ms, std::size_t gap_bits);

struct EmissionTimeline {
  double sample_rate_hz = 0.0;
  std::vector<float> envelope;

  double duration_s() const { return static_cast<double>(envelope.size()) / sample_rate_hz; }
  /// Envelope value in effect at time t; zero outside the timeline.
  float at(double t_s) const;
};

/// Rectangular OOK envelope. Throws std::invalid_argument when the rate gives fewer
/// than two samples per bit.
EmissionTimeline simulate_emission(const BitSchedule& schedule, double sample_rate_hz);

enum class WorkerState { kOff, kOn };

struct Transition {
  std::int64_t t_ns = 0;
  WorkerState state = WorkerState::kOff;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct ActivityLog {
  std::vector<Transition> transitions;
  int worker_count = 1;
  /// Measured start of every bit relative to the transmission start.
  std::vector<std::int64_t> bit_starts_ns;
  /// Bits whose start missed the scheduled boundary by more than 10% of the bit time.
  std::vector<std::size_t> timing_violations;
  std::int64_t end_ns = 0;
  bool affinity_applied = false;
};

enum class CopyKernel { kMemcpy, kStreaming };

struct StressOptions {
  int workers = 1;
  std::size_t buffer_bytes = std::size_t{1} << 20;
  CopyKernel copy = CopyKernel::kMemcpy;
  bool pin_cores = true;
  /// Final stretch of every governor sleep that is spun instead of slept.
  /// Ignored when the workers already occupy every core.
  double spin_tail_ms = 1.0;
};

/// Runs the memory-bus workload for the schedule on the calling thread plus
/// options.workers worker threads. Blocks for the full schedule duration.
/// Only one transmission may run per process at a time; a concurrent call
/// throws std::logic_error.
ActivityLog run_stress_transmitter(const BitSchedule& schedule, const StressOptions& options = {});

/// Per bit slot, 1 when the log shows the workload ON for more than half of the
/// slot. The slot count defaults to round(end_ns / bit_time).
codec::Bits measure_duty_cycle(const ActivityLog& log, double bit_time_ms,
                               std::optional<std::size_t> slots = std::nullopt);

/// JSON-lines, one {"t_ns": int, "state": "ON"|"OFF"} per transition.
void write_activity_log(std::ostream& out, const ActivityLog& log);
void write_activity_log(const std::filesystem::path& path, const ActivityLog& log);
/// Rebuilds transitions; end_ns is taken from the last transition.
ActivityLog read_activity_log(std::istream& in);
ActivityLog read_activity_log(const std::filesystem::path& path);

}  // namespace airfi::tx
