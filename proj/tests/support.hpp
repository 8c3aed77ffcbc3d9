#pragma once

#include <cstdint>
#include <random>

#include "airfi/channel.hpp"
#include "airfi/codec.hpp"
#include "airfi/demod.hpp"
#include "airfi/modem_tx.hpp"

namespace airfi::testing {

struct IqCase {
  channel::IqStream stream;
  demod::DemodConfig cfg;
};

// bits -> envelope -> noisy IQ at the default 2424 MHz carrier, with a demod
// configuration tuned to it.
inline IqCase make_iq(const codec::Bits& bits, double bit_ms, double snr_db, std::uint64_t seed,
                      double fs = 0.0) {
  if (fs == 0.0) fs = std::max(4000.0, 320.0 * 1000.0 / bit_ms);
  channel::ChannelModel ch;
  ch.snr_db = snr_db;
  ch.noise_seed = seed;
  const auto tl = tx::simulate_emission(tx::BitSchedule(bits, bit_ms), fs);
  const double center = channel::default_center_mhz(ch.carrier_freq_mhz, fs);
  IqCase out{channel::synthesize_iq(tl, ch, fs, tl.duration_s(), center),
             demod::DemodConfig::for_stream(fs, bit_ms, (ch.carrier_freq_mhz - center) * 1e6)};
  return out;
}

inline codec::Bits silence(std::size_t n) { return codec::Bits(n, 0); }

inline void append(codec::Bits& dst, const codec::Bits& src) { dst.insert(dst.end(), src.begin(), src.end()); }

inline void append(codec::Bits& dst, const codec::Frame& f) { dst.insert(dst.end(), f.bits().begin(), f.bits().end()); }

inline codec::Bits random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  codec::Bits b(n);
  for (auto& x : b) x = rng() & 1;
  return b;
}

}  // namespace airfi::testing
