#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "airfi/channel_io.hpp"

namespace airfi::channel {
namespace {

using nlohmann::json;

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
}

std::runtime_error io_error(const std::string& what, const std::filesystem::path& path) {
  return std::runtime_error(what + ": " + path.string());
}

}  // namespace

std::filesystem::path iq_data_path(const std::filesystem::path& sidecar) {
  auto p = sidecar;
  p.replace_extension(".cf32");
  return p;
}

std::filesystem::path write_iq(const std::filesystem::path& base, const IqStream& stream) {
  auto sidecar = base;
  sidecar.replace_extension(".json");
  nlohmann::ordered_json header;
  header["sample_rate_hz"] = stream.sample_rate_hz;
  header["center_freq_mhz"] = stream.center_freq_mhz;
  header["format"] = "cf32le";
  {
    std::ofstream out(sidecar);
    if (!out) throw io_error("cannot open for writing", sidecar);
    out << header.dump(2) << '\n';
  }
  const auto data = iq_data_path(sidecar);
  std::ofstream out(data, std::ios::binary);
  if (!out) throw io_error("cannot open for writing", data);
  std::vector<std::uint32_t> words(stream.samples.size() * 2);
  for (std::size_t i = 0; i < stream.samples.size(); ++i) {
    words[2 * i] = to_le(std::bit_cast<std::uint32_t>(stream.samples[i].real()));
    words[2 * i + 1] = to_le(std::bit_cast<std::uint32_t>(stream.samples[i].imag()));
  }
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  if (!out) throw io_error("write failed", data);
  return sidecar;
}

IqStream read_iq(const std::filesystem::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw io_error("cannot open IQ sidecar", sidecar);
  const json header = json::parse(in);
  if (header.value("format", std::string{}) != "cf32le") throw io_error("unsupported IQ format (want cf32le)", sidecar);
  IqStream stream;
  stream.sample_rate_hz = header.at("sample_rate_hz").get<double>();
  stream.center_freq_mhz = header.at("center_freq_mhz").get<double>();
  if (!(stream.sample_rate_hz > 0.0)) throw io_error("sample_rate_hz must be positive", sidecar);

  const auto data = iq_data_path(sidecar);
  std::ifstream raw(data, std::ios::binary | std::ios::ate);
  if (!raw) throw io_error("cannot open IQ data", data);
  const auto bytes = static_cast<std::size_t>(raw.tellg());
  if (bytes % 8 != 0) throw io_error("IQ data length is not a whole number of cf32 samples", data);
  raw.seekg(0);
  std::vector<std::uint32_t> words(bytes / 4);
  raw.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  if (!raw) throw io_error("read failed", data);
  stream.samples.resize(words.size() / 2);
  for (std::size_t i = 0; i < stream.samples.size(); ++i) {
    stream.samples[i] = {std::bit_cast<float>(to_le(words[2 * i])), std::bit_cast<float>(to_le(words[2 * i + 1]))};
  }
  return stream;
}

void write_fft_frames(std::ostream& out, const std::vector<FftFrame>& frames) {
  for (const FftFrame& f : frames) {
    nlohmann::ordered_json line;
    line["timestamp_ns"] = f.timestamp_ns;
    line["channel_index"] = f.channel_index;
    line["bins"] = f.bins;
    line["max_bin_index"] = f.max_bin_index;
    line["max_magnitude"] = f.max_magnitude;
    out << line.dump() << '\n';
  }
}

void write_fft_frames(const std::filesystem::path& path, const std::vector<FftFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing", path);
  write_fft_frames(out, frames);
  if (!out) throw io_error("write failed", path);
}

std::vector<FftFrame> read_fft_frames(std::istream& in) {
  std::vector<FftFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    FftFrame f;
    f.timestamp_ns = j.at("timestamp_ns").get<std::int64_t>();
    f.channel_index = j.at("channel_index").get<int>();
    const auto& bins = j.at("bins");
    if (!bins.is_array() || bins.size() != kFftBins) {
      throw std::runtime_error("frame line " + std::to_string(line_no) + ": bins must hold exactly 56 values");
    }
    for (std::size_t i = 0; i < kFftBins; ++i) {
      f.bins[i] = bins[i].get<float>();
      if (!(f.bins[i] >= 0.0f)) throw std::runtime_error("frame line " + std::to_string(line_no) + ": negative magnitude");
    }
    f.update_max();
    frames.push_back(f);
  }
  return frames;
}

std::vector<FftFrame> read_fft_frames(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open", path);
  return read_fft_frames(in);
}

}  // namespace airfi::channel
