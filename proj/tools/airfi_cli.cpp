#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "airfi/channel.hpp"
#include "airfi/channel_io.hpp"
#include "airfi/codec.hpp"
#include "airfi/demod.hpp"
#include "airfi/harness.hpp"
#include "airfi/modem_tx.hpp"
#include "airfi/receiver.hpp"
#include "airfi/simd/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace airfi;

namespace {

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw std::invalid_argument("bad SNR value '" + s + "'");
  return v;
}

std::uint32_t parse_payload(const std::string& s) {
  const std::string_view digits = s.starts_with("0x") ? std::string_view(s).substr(2) : std::string_view(s);
  std::uint32_t v = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, 16);
  if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size()) {
    throw std::invalid_argument("bad payload '" + s + "', expected up to 8 hex digits");
  }
  return v;
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path.string());
}

// Flags shared by the experiment-style subcommands. A --config file is read
// first and explicit flags override it.
struct ExperimentFlags {
  std::string config;
  std::vector<std::string> snr;
  std::optional<double> bit_rate;
  std::optional<std::string> path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> packets;
  std::optional<int> jammer;
  std::optional<double> carrier;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON file with ExperimentConfig keys")->check(CLI::ExistingFile);
    app->add_option("--snr", snr, "SNR point(s) in dB, 'inf' for no noise")->delimiter(',');
    app->add_option("--bit-rate", bit_rate, "Bit rate in bit/s");
    app->add_option("--path", path, "Receiver path: iq, fft_scanning, fft_triggering");
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--packets", packets, "Packets per SNR point");
    app->add_option("--jammer-cores", jammer, "Background load cores 0..8");
    app->add_option("--carrier", carrier, "Carrier frequency in MHz");
  }

  harness::ExperimentConfig build() const {
    harness::ExperimentConfig cfg = config.empty() ? harness::ExperimentConfig{} : harness::config_from_json(load_json(config));
    const bool rate_from_config = !config.empty() && load_json(config).contains("bit_rate_bps");
    if (path) {
      cfg.receiver_path = harness::parse_path(*path);
      if (!bit_rate && !rate_from_config) cfg.bit_rate_bps = harness::preset_bit_rate(cfg.receiver_path);
    }
    if (!snr.empty()) {
      cfg.snr_points_db.clear();
      for (const auto& s : snr) cfg.snr_points_db.push_back(parse_snr(s));
    }
    if (bit_rate) cfg.bit_rate_bps = *bit_rate;
    if (seed) cfg.seed = *seed;
    if (packets) cfg.packets_per_point = *packets;
    if (jammer) cfg.jammer_cores = *jammer;
    if (carrier) cfg.carrier_mhz = *carrier;
    cfg.validate();
    return cfg;
  }
};

void cmd_tx_sim(const ExperimentFlags& flags, const std::string& out) {
  auto cfg = flags.build();
  const double snr = cfg.snr_points_db.front();
  const auto t = harness::make_transmission(cfg);
  channel::ChannelModel ch;
  ch.carrier_freq_mhz = cfg.carrier_mhz;
  ch.signal_bandwidth_hz = cfg.signal_bandwidth_hz;
  ch.snr_db = snr;
  ch.noise_seed = cfg.seed;
  ch = channel::apply_jammer(ch, cfg.jammer_cores);
  const double duration = t.schedule.duration_s();

  json summary = {{"path", harness::to_string(cfg.receiver_path)},
                  {"bits", t.schedule.size()},
                  {"packets", t.packets.size()},
                  {"duration_s", duration}};
  if (cfg.receiver_path == harness::ReceiverPath::kIq) {
    const double rate = cfg.iq_sample_rate_hz > 0 ? cfg.iq_sample_rate_hz
                                                   : std::max(4.0 * cfg.signal_bandwidth_hz, 320.0 * cfg.bit_rate_bps);
    const auto tl = tx::simulate_emission(t.schedule, rate);
    const auto iq = channel::synthesize_iq(tl, ch, rate, duration, channel::default_center_mhz(cfg.carrier_mhz, rate));
    summary["file"] = channel::write_iq(out, iq).string();
  } else {
    const bool scanning = cfg.receiver_path == harness::ReceiverPath::kFftScanning;
    auto channels = cfg.scan_channels.empty() ? harness::default_scan_channels(cfg.carrier_mhz) : cfg.scan_channels;
    if (!scanning) channels = {harness::monitor_channel(cfg.carrier_mhz, channels)};
    const auto tl = tx::simulate_emission(t.schedule, 100.0 * cfg.bit_rate_bps);
    const auto frames = channel::synthesize_fft_frames(
        tl, ch, scanning ? channel::ScanMode::kScanning : channel::ScanMode::kTriggering, channels, duration, cfg.cadence);
    fs::path file = out;
    file += ".jsonl";
    channel::write_fft_frames(file, frames);
    summary["file"] = file.string();
    summary["frames"] = frames.size();
  }
  fs::path truth = out;
  truth += ".truth.json";
  write_text(truth, harness::transmission_to_json(t).dump() + "\n");
  summary["truth"] = truth.string();
  std::cout << summary.dump() << '\n';
}

void cmd_tx_stress(double bit_rate, std::uint64_t seed, std::size_t packets, const std::vector<std::string>& payloads,
                   const tx::StressOptions& options, const std::string& out) {
  std::vector<codec::Frame> frames;
  if (payloads.empty()) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> dist;
    for (std::size_t i = 0; i < packets; ++i) frames.push_back(codec::encode_packet({dist(rng)}));
  } else {
    for (const auto& p : payloads) frames.push_back(codec::encode_packet({parse_payload(p)}));
  }
  const double bit_ms = tx::bit_time_ms_for_rate(bit_rate);
  const auto schedule = tx::build_schedule(frames, bit_ms, 8);
  const auto log = tx::run_stress_transmitter(schedule, options);
  if (!out.empty()) tx::write_activity_log(fs::path(out), log);

  const auto measured = tx::measure_duty_cycle(log, bit_ms, schedule.size());
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < schedule.size(); ++i) mismatches += measured[i] != schedule.bits()[i];
  double worst = 0.0;
  for (std::size_t i = 0; i < log.bit_starts_ns.size(); ++i) {
    const double err = std::abs(static_cast<double>(log.bit_starts_ns[i]) - static_cast<double>(i) * bit_ms * 1e6);
    worst = std::max(worst, err / (bit_ms * 1e6));
  }
  std::cout << json{{"bits", schedule.size()},
                    {"workers", log.worker_count},
                    {"affinity_applied", log.affinity_applied},
                    {"duty_cycle_mismatches", mismatches},
                    {"timing_violations", log.timing_violations.size()},
                    {"worst_boundary_error_fraction", worst}}
                   .dump()
            << '\n';
}

void cmd_rx(const std::string& input, double bit_rate, double carrier, double window_bits, const std::string& truth,
            const std::string& transitions_out, const std::string& out) {
  const double bit_ms = tx::bit_time_ms_for_rate(bit_rate);
  std::vector<demod::DecodedSegment> segments;
  std::vector<std::string> transition_lines;

  if (fs::path(input).extension() == ".json") {
    const auto iq = channel::read_iq(input);
    const auto cfg = demod::DemodConfig::for_stream(iq.sample_rate_hz, bit_ms, (carrier - iq.center_freq_mhz) * 1e6);
    segments = demod::demodulate_iq(iq, cfg);
  } else {
    const auto frames = channel::read_fft_frames(fs::path(input));
    if (frames.empty()) throw std::runtime_error("no FFT frames in " + input);
    std::vector<int> channels;
    for (const auto& f : frames) {
      if (std::find(channels.begin(), channels.end(), f.channel_index) == channels.end()) channels.push_back(f.channel_index);
    }
    if (channels.size() == 1) {
      const auto bin = channel::bin_for_frequency(channel::wifi_channel(channels[0]), carrier);
      if (!bin) throw std::runtime_error("carrier is outside the recorded channel");
      segments = demod::demodulate_series(demod::fft_bin_series(frames, *bin, channels[0]), bit_ms);
    } else {
      rx::SpectralReceiver receiver(window_bits * bit_ms / 1000.0, bit_ms);
      for (const auto& f : frames) receiver.push(f);
      segments = receiver.take_segments();
      for (const auto& t : receiver.transitions()) transition_lines.push_back(rx::format_transition(t));
    }
  }

  if (!transitions_out.empty()) {
    std::string text;
    for (const auto& l : transition_lines) text += l + "\n";
    write_text(transitions_out, text);
  } else {
    for (const auto& l : transition_lines) std::cerr << l << '\n';
  }

  std::size_t bits = 0, packets = 0, errors = 0;
  for (const auto& seg : segments) {
    bits += seg.bits.size();
    for (const auto& p : demod::recover_packets(seg.bits)) {
      if (const auto* pk = std::get_if<codec::Packet>(&p.result)) {
        ++packets;
        std::cout << hex32(pk->payload) << '\n';
      } else {
        ++errors;
      }
    }
  }
  json result = {{"bits", bits}, {"packets", packets}, {"errors", errors}, {"ber_if_known", nullptr}};
  if (!truth.empty()) {
    harness::PointRun run;
    harness::score_segments(harness::transmission_from_json(load_json(truth)), segments, run);
    result["ber_if_known"] = run.report.ber;
  }
  if (!out.empty()) write_text(out, result.dump() + "\n");
  std::cout << result.dump() << '\n';
}

void cmd_sweep(const ExperimentFlags& flags, const std::string& out, const std::string& format) {
  const auto cfg = flags.build();
  const auto reports = harness::run_ber_sweep(cfg);
  for (const auto& r : reports) {
    if (!r.diagnostic.empty()) std::cerr << "snr " << r.snr_db << ": " << r.diagnostic << '\n';
  }
  const bool as_json = format == "json" || (format.empty() && fs::path(out).extension() == ".json");
  if (out.empty()) {
    std::cout << (as_json ? harness::reports_to_json(reports).dump(2) + "\n" : harness::format_csv(reports));
  } else {
    harness::emit_report(reports, as_json ? harness::ReportFormat::kJson : harness::ReportFormat::kCsv, out);
  }
}

void cmd_modes(const ExperimentFlags& flags, double duration, bool with_ber, const std::string& out) {
  auto cfg = flags.build();
  const auto cmp = harness::compare_modes(cfg, duration, with_ber);
  auto row = [](const harness::ModeStats& s, const std::vector<harness::BerReport>& ber) {
    return json{{"mode", channel::to_string(s.mode)},
                {"frames", s.frames},
                {"frames_per_s", s.frames_per_s},
                {"channels", s.channels},
                {"per_channel_fps", s.per_channel_fps},
                {"achievable_bit_rate_bps", s.achievable_bit_rate_bps},
                {"ber", harness::reports_to_json(ber)}};
  };
  json result = {{"duration_s", cmp.duration_s},
                 {"throughput_ratio", cmp.triggering.frames_per_s / cmp.scanning.frames_per_s},
                 {"modes", {row(cmp.scanning, cmp.scanning_ber), row(cmp.triggering, cmp.triggering_ber)}}};
  if (!out.empty()) write_text(out, result.dump(2) + "\n");
  std::cout << result.dump(2) << '\n';
}

void cmd_channels(const std::vector<double>& carriers, double bandwidth, double margin, bool table) {
  if (table) {
    std::cout << channel::wifi_channel_table_csv();
    return;
  }
  for (double c : carriers) {
    const auto ov = channel::overlapping_channels(c, bandwidth, margin);
    auto ids = [](const std::vector<channel::WifiChannel>& v) {
      std::vector<int> out;
      for (const auto& w : v) out.push_back(w.index);
      return out;
    };
    std::cout << json{{"carrier_mhz", c}, {"bandwidth_hz", bandwidth}, {"overlapping", ids(ov.overlapping)},
                      {"interfering", ids(ov.interfering)}}
                     .dump()
              << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"airfi: DDR-emission OOK covert channel simulator"};
  app.require_subcommand(1);
  std::string simd;
  app.add_option("--simd", simd, "Force kernel level: scalar or avx2");

  ExperimentFlags sim_flags, sweep_flags, mode_flags;
  std::string out;

  auto* tx_sim = app.add_subcommand("tx-sim", "Simulate a transmission into an IQ or FFT-frame file");
  sim_flags.attach(tx_sim);
  tx_sim->add_option("--out", out, "Output base path")->required();

  double stress_rate = 10.0;
  std::uint64_t stress_seed = 1;
  std::size_t stress_packets = 1;
  std::vector<std::string> stress_payloads;
  tx::StressOptions stress_opts;
  bool streaming = false, no_pin = false;
  auto* tx_stress = app.add_subcommand("tx-stress", "Run the memory-bus workload and record its activity");
  tx_stress->add_option("--bit-rate", stress_rate, "Bit rate in bit/s")->check(CLI::PositiveNumber);
  tx_stress->add_option("--seed", stress_seed, "Payload seed");
  tx_stress->add_option("--packets", stress_packets, "Random packets to send")->check(CLI::PositiveNumber);
  tx_stress->add_option("--payload", stress_payloads, "Hex payload(s), overrides --packets")->delimiter(',');
  tx_stress->add_option("--workers", stress_opts.workers, "Worker threads")->check(CLI::PositiveNumber);
  tx_stress->add_flag("--streaming", streaming, "Non-temporal copy kernel");
  tx_stress->add_flag("--no-pin", no_pin, "Skip core pinning");
  tx_stress->add_option("--out", out, "ActivityLog JSON-lines path");

  std::string rx_in, truth, transitions;
  double rx_rate = 100.0, rx_carrier = 2424.0, window_bits = rx::kDefaultScanWindowBits;
  auto* rx_cmd = app.add_subcommand("rx", "Demodulate an IQ sidecar (.json) or FFT-frame file (.jsonl)");
  rx_cmd->add_option("input", rx_in, "Input file")->required()->check(CLI::ExistingFile);
  rx_cmd->add_option("--bit-rate", rx_rate, "Bit rate in bit/s")->check(CLI::PositiveNumber);
  rx_cmd->add_option("--carrier", rx_carrier, "Carrier frequency in MHz");
  rx_cmd->add_option("--window-bits", window_bits, "Scan scoring window in bit times")->check(CLI::PositiveNumber);
  rx_cmd->add_option("--truth", truth, "Ground truth written by tx-sim")->check(CLI::ExistingFile);
  rx_cmd->add_option("--transitions", transitions, "Write receiver mode transitions here");
  rx_cmd->add_option("--out", out, "Write the JSON result here as well");

  std::string format;
  auto* sweep = app.add_subcommand("sweep", "BER versus SNR sweep");
  sweep_flags.attach(sweep);
  sweep->add_option("--out", out, "Report path (.csv or .json)");
  sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  double duration = 5.0;
  bool no_ber = false;
  auto* modes = app.add_subcommand("modes", "Compare scanning and triggering modes");
  mode_flags.attach(modes);
  modes->add_option("--duration", duration, "Simulated seconds for throughput")->check(CLI::PositiveNumber);
  modes->add_flag("--no-ber", no_ber, "Throughput only");
  modes->add_option("--out", out, "Write the JSON result here as well");

  std::vector<double> carriers{2424.0};
  double bandwidth = 1000.0, margin = channel::kInterferenceMarginMhz;
  bool table = false;
  auto* chans = app.add_subcommand("channels", "Wi-Fi channels affected by an emission");
  chans->add_option("--carrier", carriers, "Carrier(s) in MHz")->delimiter(',');
  chans->add_option("--bandwidth", bandwidth, "Emission bandwidth in Hz");
  chans->add_option("--margin", margin, "Interference margin in MHz");
  chans->add_flag("--table", table, "Print the channel plan as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (!simd.empty()) simd::force_level(simd == "scalar" ? simd::Level::kScalar : simd == "avx2" ? simd::Level::kAvx2
                                                                                                   : throw std::invalid_argument("unknown SIMD level '" + simd + "'"));
    if (*tx_sim) {
      cmd_tx_sim(sim_flags, out);
    } else if (*tx_stress) {
      stress_opts.copy = streaming ? tx::CopyKernel::kStreaming : tx::CopyKernel::kMemcpy;
      stress_opts.pin_cores = !no_pin;
      cmd_tx_stress(stress_rate, stress_seed, stress_packets, stress_payloads, stress_opts, out);
    } else if (*rx_cmd) {
      cmd_rx(rx_in, rx_rate, rx_carrier, window_bits, truth, transitions, out);
    } else if (*sweep) {
      cmd_sweep(sweep_flags, out, format);
    } else if (*modes) {
      cmd_modes(mode_flags, duration, !no_ber, out);
    } else if (*chans) {
      cmd_channels(carriers, bandwidth, margin, table);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
