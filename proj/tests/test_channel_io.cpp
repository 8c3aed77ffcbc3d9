#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "airfi/channel_io.hpp"

using namespace airfi::channel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "airfi_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("channel_io") {

TEST_CASE("IQ files round trip") {
  IqStream s;
  s.sample_rate_hz = 32000;
  s.center_freq_mhz = 2423.996;
  for (int i = 0; i < 1000; ++i) s.samples.push_back({static_cast<float>(i) * 0.5f, -static_cast<float>(i)});
  const auto sidecar = write_iq(scratch("rt"), s);
  CHECK(sidecar.extension() == ".json");
  CHECK(fs::file_size(iq_data_path(sidecar)) == 8000);

  std::ifstream in(sidecar);
  const auto header = nlohmann::json::parse(in);
  CHECK(header.at("format") == "cf32le");
  CHECK(header.at("sample_rate_hz") == 32000.0);

  const auto back = read_iq(sidecar);
  CHECK(back.sample_rate_hz == s.sample_rate_hz);
  CHECK(back.center_freq_mhz == s.center_freq_mhz);
  CHECK(back.samples == s.samples);
}

TEST_CASE("IQ reader rejects bad inputs") {
  CHECK_THROWS(read_iq(scratch("missing.json")));
  const auto sidecar = scratch("badfmt.json");
  std::ofstream(sidecar) << R"({"sample_rate_hz":1000,"center_freq_mhz":2424,"format":"ci16"})";
  CHECK_THROWS(read_iq(sidecar));

  IqStream s;
  s.sample_rate_hz = 1000;
  s.samples.resize(4);
  const auto good = write_iq(scratch("odd"), s);
  std::ofstream(iq_data_path(good), std::ios::app | std::ios::binary) << "xyz";
  CHECK_THROWS(read_iq(good));
}

TEST_CASE("FFT frames round trip") {
  std::vector<FftFrame> frames(3);
  for (int i = 0; i < 3; ++i) {
    frames[i].timestamp_ns = 2'500'000LL * i;
    frames[i].channel_index = 3 + i;
    for (std::size_t b = 0; b < kFftBins; ++b) frames[i].bins[b] = static_cast<float>((b * 7 + i) % 13) * 0.25f;
    frames[i].update_max();
  }
  std::stringstream io;
  write_fft_frames(io, frames);
  std::string first;
  std::getline(io, first);
  const auto j = nlohmann::json::parse(first);
  for (const char* key : {"timestamp_ns", "channel_index", "bins", "max_bin_index", "max_magnitude"}) CHECK(j.contains(key));
  io.seekg(0);
  CHECK(read_fft_frames(io) == frames);

  const auto path = scratch("frames.jsonl");
  write_fft_frames(path, frames);
  CHECK(read_fft_frames(path) == frames);
}

TEST_CASE("FFT frame reader validates") {
  std::stringstream short_bins(R"({"timestamp_ns":0,"channel_index":3,"bins":[1,2,3],"max_bin_index":2,"max_magnitude":3})");
  CHECK_THROWS(read_fft_frames(short_bins));
  std::string bins = "[-1";
  for (int i = 1; i < 56; ++i) bins += ",0";
  bins += "]";
  std::stringstream negative(R"({"timestamp_ns":0,"channel_index":3,"bins":)" + bins + R"(,"max_bin_index":0,"max_magnitude":0})");
  CHECK_THROWS(read_fft_frames(negative));
  std::stringstream junk("not json\n");
  CHECK_THROWS(read_fft_frames(junk));
}

}
