#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "airfi/modem_tx.hpp"

namespace airfi::tx {

void write_activity_log(std::ostream& out, const ActivityLog& log) {
  for (const Transition& t : log.transitions) {
    nlohmann::ordered_json line;
    line["t_ns"] = t.t_ns;
    line["state"] = t.state == WorkerState::kOn ? "ON" : "OFF";
    out << line.dump() << '\n';
  }
  // The workload stops when the transmission ends.
  if (!log.transitions.empty() && log.transitions.back().state == WorkerState::kOn &&
      log.end_ns > log.transitions.back().t_ns) {
    nlohmann::ordered_json line;
    line["t_ns"] = log.end_ns;
    line["state"] = "OFF";
    out << line.dump() << '\n';
  }
}

void write_activity_log(const std::filesystem::path& path, const ActivityLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  write_activity_log(out, log);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ActivityLog read_activity_log(std::istream& in) {
  ActivityLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line);
    const std::string state = j.at("state").get<std::string>();
    Transition t;
    t.t_ns = j.at("t_ns").get<std::int64_t>();
    if (state == "ON") {
      t.state = WorkerState::kOn;
    } else if (state == "OFF") {
      t.state = WorkerState::kOff;
    } else {
      throw std::runtime_error("activity log line " + std::to_string(line_no) + ": bad state '" + state + "'");
    }
    if (!log.transitions.empty()) {
      const Transition& prev = log.transitions.back();
      if (t.t_ns <= prev.t_ns || t.state == prev.state) {
        throw std::runtime_error("activity log line " + std::to_string(line_no) + ": transitions must alternate with increasing timestamps");
      }
    }
    log.transitions.push_back(t);
  }
  if (!log.transitions.empty()) log.end_ns = log.transitions.back().t_ns;
  return log;
}

ActivityLog read_activity_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  return read_activity_log(in);
}

}  // namespace airfi::tx
