#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "airfi/modem_tx.hpp"

namespace airfi::tx {

BitSchedule::BitSchedule(codec::Bits bits, double bit_time_ms) : bits_(std::move(bits)), bit_time_ms_(bit_time_ms) {
  if (!(bit_time_ms > 0.0) || !std::isfinite(bit_time_ms)) throw std::invalid_argument("bit_time_ms must be positive");
  if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
    throw std::invalid_argument("schedule bits must be 0 or 1");
  }
}

BitSchedule build_schedule(std::span<const codec::Frame> frames, double bit_time_ms, std::size_t gap_bits) {
  codec::Bits bits;
  if (!frames.empty()) bits.reserve(frames.size() * (codec::kFrameBits + gap_bits));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0) bits.insert(bits.end(), gap_bits, 0);
    const auto& f = frames[i].bits();
    bits.insert(bits.end(), f.begin(), f.end());
  }
  return BitSchedule(std::move(bits), bit_time_ms);
}

float EmissionTimeline::at(double t_s) const {
  if (t_s < 0.0) return 0.0f;
  const auto idx = static_cast<std::size_t>(std::floor(t_s * sample_rate_hz));
  return idx < envelope.size() ? envelope[idx] : 0.0f;
}

EmissionTimeline simulate_emission(const BitSchedule& schedule, double sample_rate_hz) {
  const double samples_per_bit = schedule.bit_time_ms() * sample_rate_hz / 1000.0;
  if (!(samples_per_bit >= 2.0)) {
    throw std::invalid_argument("sample rate too low for the bit time: need at least 2 samples per bit");
  }
  EmissionTimeline tl;
  tl.sample_rate_hz = sample_rate_hz;
  const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(schedule.size()) * samples_per_bit));
  tl.envelope.resize(total, 0.0f);
  const auto& bits = schedule.bits();
  for (std::size_t bit = 0; bit < bits.size(); ++bit) {
    if (bits[bit] == 0) continue;
    const auto first = static_cast<std::size_t>(std::llround(static_cast<double>(bit) * samples_per_bit));
    const auto last = std::min(total, static_cast<std::size_t>(std::llround(static_cast<double>(bit + 1) * samples_per_bit)));
    std::fill(tl.envelope.begin() + static_cast<std::ptrdiff_t>(first),
              tl.envelope.begin() + static_cast<std::ptrdiff_t>(last), 1.0f);
  }
  return tl;
}

}  // namespace airfi::tx
