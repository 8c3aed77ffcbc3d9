#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "airfi/harness.hpp"

namespace airfi::harness {

namespace {

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string format_csv(const std::vector<BerReport>& reports) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : reports) {
    char ber[32];
    std::snprintf(ber, sizeof ber, "%.6f", r.ber);
    out << number(r.snr_db) << ',' << number(r.bit_rate_bps) << ',' << to_string(r.receiver_path) << ','
        << r.bits_sent << ',' << r.bit_errors << ',' << ber << ',' << r.packets_sent << ','
        << r.packets_recovered << ',' << r.packets_rejected << ',' << r.seed << '\n';
  }
  return out.str();
}

nlohmann::json reports_to_json(const std::vector<BerReport>& reports) {
  auto rows = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json row = {{"snr_db", std::isinf(r.snr_db) ? nlohmann::json("inf") : nlohmann::json(r.snr_db)},
                          {"effective_snr_db", std::isinf(r.effective_snr_db) ? nlohmann::json("inf")
                                                                               : nlohmann::json(r.effective_snr_db)},
                          {"bit_rate_bps", r.bit_rate_bps},
                          {"receiver_path", to_string(r.receiver_path)},
                          {"bits_sent", r.bits_sent},
                          {"bit_errors", r.bit_errors},
                          {"ber", r.ber},
                          {"packets_sent", r.packets_sent},
                          {"packets_recovered", r.packets_recovered},
                          {"packets_rejected", r.packets_rejected},
                          {"false_packets", r.false_packets},
                          {"seed", r.seed}};
    if (!r.diagnostic.empty()) row["diagnostic"] = r.diagnostic;
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit_report(const std::vector<BerReport>& reports, ReportFormat format, const std::filesystem::path& path) {
  if (reports.empty()) throw std::invalid_argument("no report rows to write");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  if (format == ReportFormat::kCsv) {
    out << format_csv(reports);
  } else {
    out << reports_to_json(reports).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
}

}  // namespace airfi::harness
