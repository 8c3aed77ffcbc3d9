#include "airfi/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "airfi/demod.hpp"
#include "airfi/modem_tx.hpp"

namespace airfi::harness {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double parse_snr(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  }
  throw std::invalid_argument("snr values must be numbers or \"inf\"");
}

nlohmann::json snr_to_json(double snr) {
  if (std::isinf(snr)) return "inf";
  return snr;
}

double iq_sample_rate(const ExperimentConfig& cfg) {
  if (cfg.iq_sample_rate_hz > 0.0) return cfg.iq_sample_rate_hz;
  return std::max(4.0 * cfg.signal_bandwidth_hz, 320.0 * cfg.bit_rate_bps);
}

std::vector<demod::DecodedSegment> receive(const ExperimentConfig& cfg, const Transmission& trial,
                                           const channel::ChannelModel& ch) {
  const double bit_ms = trial.schedule.bit_time_ms();
  const double duration = trial.schedule.duration_s();

  if (cfg.receiver_path == ReceiverPath::kIq) {
    const double fs = iq_sample_rate(cfg);
    const auto tl = tx::simulate_emission(trial.schedule, fs);
    const double center = channel::default_center_mhz(cfg.carrier_mhz, fs);
    const auto iq = channel::synthesize_iq(tl, ch, fs, duration, center);
    auto dcfg = demod::DemodConfig::for_stream(fs, bit_ms, (cfg.carrier_mhz - center) * 1e6);
    dcfg.corr_thresh = cfg.corr_thresh;
    return demod::demodulate_iq(iq, dcfg);
  }

  const auto tl = tx::simulate_emission(trial.schedule, 100.0 * cfg.bit_rate_bps);
  const bool scanning = cfg.receiver_path == ReceiverPath::kFftScanning;
  std::vector<int> channels = cfg.scan_channels.empty() ? default_scan_channels(cfg.carrier_mhz) : cfg.scan_channels;
  const int monitor = monitor_channel(cfg.carrier_mhz, channels);
  if (!scanning) channels = {monitor};
  const auto frames = channel::synthesize_fft_frames(
      tl, ch, scanning ? channel::ScanMode::kScanning : channel::ScanMode::kTriggering, channels, duration, cfg.cadence);
  const auto bin = channel::bin_for_frequency(channel::wifi_channel(monitor), cfg.carrier_mhz);
  const auto series = demod::fft_bin_series(frames, *bin, monitor);
  demod::DetectOptions opts;
  opts.corr_thresh = cfg.corr_thresh;
  return demod::demodulate_series(series, bit_ms, opts);
}

}  // namespace

std::string to_string(ReceiverPath path) {
  switch (path) {
    case ReceiverPath::kIq:
      return "iq";
    case ReceiverPath::kFftScanning:
      return "fft_scanning";
    case ReceiverPath::kFftTriggering:
      return "fft_triggering";
  }
  return "unknown";
}

ReceiverPath parse_path(std::string_view text) {
  if (text == "iq") return ReceiverPath::kIq;
  if (text == "fft_scanning") return ReceiverPath::kFftScanning;
  if (text == "fft_triggering") return ReceiverPath::kFftTriggering;
  throw std::invalid_argument("unknown receiver path '" + std::string(text) + "'");
}

double preset_bit_rate(ReceiverPath path) {
  switch (path) {
    case ReceiverPath::kIq:
      return 100.0;
    case ReceiverPath::kFftScanning:
      return 1.0;
    case ReceiverPath::kFftTriggering:
      return 10.0;
  }
  return 1.0;
}

Transmission make_transmission(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::uint32_t> dist;
  std::vector<codec::Packet> packets;
  std::vector<codec::Frame> frames;
  for (std::size_t i = 0; i < cfg.packets_per_point; ++i) {
    packets.push_back({dist(rng)});
    frames.push_back(codec::encode_packet(packets.back()));
  }
  const double bit_ms = tx::bit_time_ms_for_rate(cfg.bit_rate_bps);
  const auto body = tx::build_schedule(frames, bit_ms, cfg.gap_bits);

  codec::Bits bits(cfg.lead_bits, 0);
  bits.insert(bits.end(), body.bits().begin(), body.bits().end());
  bits.insert(bits.end(), cfg.tail_bits, 0);

  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < frames.size(); ++i) starts.push_back(cfg.lead_bits + i * (codec::kFrameBits + cfg.gap_bits));
  return {std::move(packets), std::move(starts), tx::BitSchedule(std::move(bits), bit_ms)};
}

nlohmann::json transmission_to_json(const Transmission& t) {
  std::string bits;
  for (auto b : t.schedule.bits()) bits.push_back(b ? '1' : '0');
  auto payloads = nlohmann::json::array();
  for (const auto& p : t.packets) {
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", p.payload);
    payloads.push_back(hex);
  }
  return {{"bit_rate_bps", 1000.0 / t.schedule.bit_time_ms()},
          {"bits", bits},
          {"frame_starts", t.frame_starts},
          {"payloads", payloads}};
}

Transmission transmission_from_json(const nlohmann::json& j) {
  codec::Bits bits;
  for (char c : j.at("bits").get<std::string>()) {
    if (c != '0' && c != '1') throw std::invalid_argument("ground truth bits must be 0/1");
    bits.push_back(c == '1');
  }
  Transmission t{{}, j.at("frame_starts").get<std::vector<std::size_t>>(),
                 tx::BitSchedule(std::move(bits), tx::bit_time_ms_for_rate(j.at("bit_rate_bps").get<double>()))};
  for (const auto& h : j.at("payloads")) {
    const auto hex = h.get<std::string>();
    std::uint32_t v = 0;
    const auto [end, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
    if (hex.empty() || ec != std::errc{} || end != hex.data() + hex.size()) {
      throw std::invalid_argument("ground truth payload '" + hex + "' is not 32-bit hex");
    }
    t.packets.push_back({v});
  }
  if (t.packets.size() != t.frame_starts.size()) throw std::invalid_argument("ground truth payload/frame count mismatch");
  for (auto s : t.frame_starts) {
    if (s + codec::kFrameBits > t.schedule.size()) throw std::invalid_argument("ground truth frame past end of schedule");
  }
  return t;
}

void score_segments(const Transmission& t, std::span<const demod::DecodedSegment> segments, PointRun& run) {
  run.sent = t.schedule.bits();
  run.frame_starts = t.frame_starts;
  run.received.assign(run.sent.size(), -1);
  const double bit_ns = t.schedule.bit_time_ms() * 1e6;

  auto& r = run.report;
  r.packets_sent = t.packets.size();
  r.packets_recovered = r.packets_rejected = r.false_packets = 0;
  r.bits_sent = r.bit_errors = 0;

  std::vector<bool> recovered(t.packets.size(), false);
  for (const auto& seg : segments) {
    const auto first = std::llround(static_cast<double>(seg.start_ns) / bit_ns);
    for (std::size_t k = 0; k < seg.bits.size(); ++k) {
      const auto pos = first + static_cast<long long>(k);
      // Segments arrive in time order; a retry after a rejected frame does not
      // overwrite what the earlier segment delivered.
      if (pos >= 0 && static_cast<std::size_t>(pos) < run.received.size() && run.received[static_cast<std::size_t>(pos)] < 0) {
        run.received[static_cast<std::size_t>(pos)] = static_cast<std::int8_t>(seg.bits[k]);
      }
    }
    const auto found = demod::recover_packets(seg.bits);
    if (found.empty()) {
      ++r.packets_rejected;
      continue;
    }
    for (const auto& p : found) {
      const auto* packet = std::get_if<codec::Packet>(&p.result);
      if (!packet) {
        ++r.packets_rejected;
        continue;
      }
      const auto at = first + static_cast<long long>(p.bit_index);
      const auto it = at < 0 ? t.frame_starts.end()
                             : std::find(t.frame_starts.begin(), t.frame_starts.end(), static_cast<std::size_t>(at));
      const auto j = static_cast<std::size_t>(it - t.frame_starts.begin());
      if (it != t.frame_starts.end() && t.packets[j] == *packet && !recovered[j]) {
        recovered[j] = true;
        ++r.packets_recovered;
      } else {
        ++r.false_packets;
      }
    }
  }

  for (std::size_t start : t.frame_starts) {
    for (std::size_t k = 0; k < codec::kFrameBits; ++k) {
      ++r.bits_sent;
      if (run.received[start + k] != static_cast<std::int8_t>(run.sent[start + k])) ++r.bit_errors;
    }
  }
  r.ber = r.bits_sent ? static_cast<double>(r.bit_errors) / static_cast<double>(r.bits_sent) : 0.0;
}

void ExperimentConfig::validate() const {
  if (snr_points_db.empty()) throw std::invalid_argument("snr_points_db is empty");
  for (double s : snr_points_db) {
    if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) throw std::invalid_argument("bad snr point");
  }
  if (!(bit_rate_bps > 0.0) || !std::isfinite(bit_rate_bps)) throw std::invalid_argument("bit_rate_bps must be > 0");
  if (packets_per_point == 0) throw std::invalid_argument("packets_per_point must be > 0");
  if (jammer_cores < 0 || jammer_cores > 8) throw std::invalid_argument("jammer_cores must be in 0..8");
  if (!(signal_bandwidth_hz > 0.0)) throw std::invalid_argument("signal_bandwidth_hz must be > 0");
  if (!(corr_thresh > 0.0 && corr_thresh <= 1.0)) throw std::invalid_argument("corr_thresh must be in (0, 1]");
  if (!(cadence.scanning_fps > 0.0) || !(cadence.triggering_fps > 0.0)) throw std::invalid_argument("bad cadence");
  if (receiver_path != ReceiverPath::kIq) {
    const auto channels = scan_channels.empty() ? default_scan_channels(carrier_mhz) : scan_channels;
    for (int c : channels) (void)channel::wifi_channel(c);
    (void)monitor_channel(carrier_mhz, channels);
  }
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "snr_points_db") {
      cfg.snr_points_db.clear();
      for (const auto& s : v) cfg.snr_points_db.push_back(parse_snr(s));
    } else if (key == "bit_rate_bps") {
      cfg.bit_rate_bps = v.get<double>();
    } else if (key == "receiver_path") {
      cfg.receiver_path = parse_path(v.get<std::string>());
    } else if (key == "packets_per_point") {
      cfg.packets_per_point = v.get<std::size_t>();
    } else if (key == "seed") {
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "jammer_cores") {
      cfg.jammer_cores = v.get<int>();
    } else if (key == "carrier_mhz") {
      cfg.carrier_mhz = v.get<double>();
    } else if (key == "signal_bandwidth_hz") {
      cfg.signal_bandwidth_hz = v.get<double>();
    } else if (key == "gap_bits") {
      cfg.gap_bits = v.get<std::size_t>();
    } else if (key == "lead_bits") {
      cfg.lead_bits = v.get<std::size_t>();
    } else if (key == "tail_bits") {
      cfg.tail_bits = v.get<std::size_t>();
    } else if (key == "iq_sample_rate_hz") {
      cfg.iq_sample_rate_hz = v.get<double>();
    } else if (key == "scan_channels") {
      cfg.scan_channels = v.get<std::vector<int>>();
    } else if (key == "scanning_fps") {
      cfg.cadence.scanning_fps = v.get<double>();
    } else if (key == "triggering_fps") {
      cfg.cadence.triggering_fps = v.get<double>();
    } else if (key == "corr_thresh") {
      cfg.corr_thresh = v.get<double>();
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json snrs = nlohmann::json::array();
  for (double s : cfg.snr_points_db) snrs.push_back(snr_to_json(s));
  return {{"snr_points_db", snrs},
          {"bit_rate_bps", cfg.bit_rate_bps},
          {"receiver_path", to_string(cfg.receiver_path)},
          {"packets_per_point", cfg.packets_per_point},
          {"seed", cfg.seed},
          {"jammer_cores", cfg.jammer_cores},
          {"carrier_mhz", cfg.carrier_mhz},
          {"signal_bandwidth_hz", cfg.signal_bandwidth_hz},
          {"gap_bits", cfg.gap_bits},
          {"lead_bits", cfg.lead_bits},
          {"tail_bits", cfg.tail_bits},
          {"iq_sample_rate_hz", cfg.iq_sample_rate_hz},
          {"scan_channels", cfg.scan_channels},
          {"scanning_fps", cfg.cadence.scanning_fps},
          {"triggering_fps", cfg.cadence.triggering_fps},
          {"corr_thresh", cfg.corr_thresh}};
}

std::vector<int> default_scan_channels(double carrier_mhz) {
  std::vector<int> out;
  for (const auto& c : channel::overlapping_channels(carrier_mhz, 1000.0).interfering) out.push_back(c.index);
  return out;
}

int monitor_channel(double carrier_mhz, const std::vector<int>& candidates) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int idx : candidates) {
    const auto& c = channel::wifi_channel(idx);
    if (!channel::bin_for_frequency(c, carrier_mhz)) continue;
    const double d = std::abs(c.center_mhz - carrier_mhz);
    if (d < best_d) {
      best_d = d;
      best = idx;
    }
  }
  if (best == 0) throw std::invalid_argument("no scanned channel covers the carrier");
  return best;
}

PointRun run_point(const ExperimentConfig& cfg, double snr_db, std::size_t point_index) {
  cfg.validate();
  const auto trial = make_transmission(cfg);

  channel::ChannelModel ch;
  ch.carrier_freq_mhz = cfg.carrier_mhz;
  ch.signal_bandwidth_hz = cfg.signal_bandwidth_hz;
  ch.snr_db = snr_db;
  ch.noise_seed = splitmix64(cfg.seed ^ splitmix64(point_index + 1));
  ch = channel::apply_jammer(ch, cfg.jammer_cores);

  PointRun run;
  auto& r = run.report;
  r.snr_db = snr_db;
  r.effective_snr_db = ch.effective_snr_db();
  r.bit_rate_bps = cfg.bit_rate_bps;
  r.receiver_path = cfg.receiver_path;
  r.seed = cfg.seed;
  score_segments(trial, receive(cfg, trial, ch), run);
  return run;
}

std::vector<BerReport> run_ber_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  auto one = [&cfg](std::size_t i) {
    try {
      return run_point(cfg, cfg.snr_points_db[i], i).report;
    } catch (const std::exception& e) {
      BerReport r;
      r.snr_db = cfg.snr_points_db[i];
      r.bit_rate_bps = cfg.bit_rate_bps;
      r.receiver_path = cfg.receiver_path;
      r.seed = cfg.seed;
      r.diagnostic = e.what();
      return r;
    }
  };

  std::vector<BerReport> out(cfg.snr_points_db.size());
  const std::size_t lanes = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t base = 0; base < out.size(); base += lanes) {
    std::vector<std::future<BerReport>> jobs;
    const std::size_t end = std::min(out.size(), base + lanes);
    for (std::size_t i = base; i < end; ++i) jobs.push_back(std::async(lanes > 1 ? std::launch::async : std::launch::deferred, one, i));
    for (std::size_t i = base; i < end; ++i) out[i] = jobs[i - base].get();
  }
  return out;
}

ModeComparison compare_modes(const ExperimentConfig& cfg, double duration_s, bool with_ber) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be > 0");
  ModeComparison out;
  out.duration_s = duration_s;

  const auto channels = cfg.scan_channels.empty() ? default_scan_channels(cfg.carrier_mhz) : cfg.scan_channels;
  const int monitor = monitor_channel(cfg.carrier_mhz, channels);

  // Throughput does not depend on the content; an idle carrier is enough.
  const auto idle = tx::simulate_emission(tx::BitSchedule(codec::Bits(16, 0), duration_s * 1000.0 / 16.0), 64.0 / duration_s);
  channel::ChannelModel ch;
  ch.carrier_freq_mhz = cfg.carrier_mhz;
  ch.noise_seed = cfg.seed;

  auto stats = [&](channel::ScanMode mode, std::span<const int> set) {
    ModeStats s;
    s.mode = mode;
    s.frames = channel::synthesize_fft_frames(idle, ch, mode, set, duration_s, cfg.cadence).size();
    s.frames_per_s = static_cast<double>(s.frames) / duration_s;
    s.channels = set.size();
    s.per_channel_fps = s.frames_per_s / static_cast<double>(set.size());
    s.achievable_bit_rate_bps = s.per_channel_fps / 4.0;
    return s;
  };
  const std::vector<int> single{monitor};
  out.scanning = stats(channel::ScanMode::kScanning, channels);
  out.triggering = stats(channel::ScanMode::kTriggering, single);

  if (with_ber) {
    auto scan_cfg = cfg;
    scan_cfg.receiver_path = ReceiverPath::kFftScanning;
    scan_cfg.bit_rate_bps = preset_bit_rate(ReceiverPath::kFftScanning);
    scan_cfg.scan_channels = channels;
    out.scanning_ber = run_ber_sweep(scan_cfg);

    auto trig_cfg = cfg;
    trig_cfg.receiver_path = ReceiverPath::kFftTriggering;
    trig_cfg.bit_rate_bps = preset_bit_rate(ReceiverPath::kFftTriggering);
    trig_cfg.scan_channels = channels;
    out.triggering_ber = run_ber_sweep(trig_cfg);
  }
  return out;
}

}  // namespace airfi::harness
