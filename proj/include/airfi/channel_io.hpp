#pragma once

// On-disk formats shared by the transmitter simulator and the receiver.
//
//   IQ capture:  <base>.json   {"sample_rate_hz": .., "center_freq_mhz": .., "format": "cf32le"}
//                <base>.cf32   interleaved little-endian float32 I,Q pairs
//   FFT frames:  JSON lines, one object per frame with the FftFrame fields.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "airfi/channel.hpp"

namespace airfi::channel {

/// Raw sample file belonging to a sidecar path (same stem, .cf32 extension).
std::filesystem::path iq_data_path(const std::filesystem::path& sidecar);

/// Writes <base>.json and <base>.cf32; returns the sidecar path.
std::filesystem::path write_iq(const std::filesystem::path& base, const IqStream& stream);
/// Throws std::runtime_error on missing files, an unknown format, or a ragged sample file.
IqStream read_iq(const std::filesystem::path& sidecar);

void write_fft_frames(std::ostream& out, const std::vector<FftFrame>& frames);
void write_fft_frames(const std::filesystem::path& path, const std::vector<FftFrame>& frames);
std::vector<FftFrame> read_fft_frames(std::istream& in);
std::vector<FftFrame> read_fft_frames(const std::filesystem::path& path);

}  // namespace airfi::channel
