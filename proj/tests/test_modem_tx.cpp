#include <doctest.h>

#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "airfi/modem_tx.hpp"

using namespace airfi;
using namespace airfi::tx;

namespace {

codec::Bits pattern(const char* s) {
  codec::Bits b;
  for (; *s; ++s) b.push_back(*s == '1');
  return b;
}

std::int64_t ms(double v) { return static_cast<std::int64_t>(v * 1e6); }

}  // namespace

TEST_SUITE("modem_tx") {

TEST_CASE("schedule arithmetic") {
  const std::vector<codec::Frame> one{codec::encode_packet({1})};
  const auto s = build_schedule(one, 100.0, 0);
  CHECK(s.size() == 48);
  CHECK(s.duration_s() == doctest::Approx(4.8));

  const std::vector<codec::Frame> two{codec::encode_packet({1}), codec::encode_packet({2})};
  const auto g = build_schedule(two, 100.0, 8);
  CHECK(g.size() == 104);
  for (std::size_t i = 48; i < 56; ++i) CHECK(g.bits()[i] == 0);

  CHECK(bit_time_ms_for_rate(1) == 1000.0);
  CHECK(bit_time_ms_for_rate(10) == 100.0);
  CHECK(bit_time_ms_for_rate(100) == 10.0);

  CHECK_THROWS_AS(BitSchedule(pattern("10"), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(BitSchedule(codec::Bits{1, 2}, 10.0), std::invalid_argument);
}

TEST_CASE("emission envelope") {
  const auto tl = simulate_emission(BitSchedule(pattern("10101010"), 100.0), 1000.0);
  REQUIRE(tl.envelope.size() == 800);
  for (std::size_t i = 0; i < 800; ++i) CHECK(tl.envelope[i] == ((i / 100) % 2 == 0 ? 1.0f : 0.0f));

  const auto zeros = simulate_emission(BitSchedule(codec::Bits(5, 0), 10.0), 1000.0);
  CHECK(std::accumulate(zeros.envelope.begin(), zeros.envelope.end(), 0.0f) == 0.0f);

  const auto on = simulate_emission(BitSchedule(pattern("11"), 10.0), 1000.0);
  CHECK(on.envelope.size() == 20);
  CHECK(std::accumulate(on.envelope.begin(), on.envelope.end(), 0.0f) == 20.0f);

  CHECK(tl.at(0.05) == 1.0f);
  CHECK(tl.at(0.15) == 0.0f);
  CHECK(tl.at(-1.0) == 0.0f);
  CHECK(tl.at(10.0) == 0.0f);

  CHECK_THROWS_AS(simulate_emission(BitSchedule(pattern("1"), 1.0), 1000.0), std::invalid_argument);
}

TEST_CASE("envelope is the indicator of one bits") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    codec::Bits bits(1 + rng() % 200);
    for (auto& b : bits) b = rng() & 1;
    const double bit_ms = 1.0 + rng() % 50;
    const double fs = 2000.0 + rng() % 5000;
    const auto tl = simulate_emission(BitSchedule(bits, bit_ms), fs);
    const auto ones = std::count(bits.begin(), bits.end(), 1);
    const double spb = fs * bit_ms / 1000.0;
    // Each bit owns round((k+1) * spb) - round(k * spb) samples.
    double expected = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      if (bits[k]) expected += static_cast<double>(std::llround((k + 1) * spb) - std::llround(k * spb));
    }
    CHECK(std::accumulate(tl.envelope.begin(), tl.envelope.end(), 0.0) == expected);
    if (std::floor(spb) == spb) CHECK(expected == static_cast<double>(ones) * spb);
  }
}

TEST_CASE("duty cycle measurement") {
  ActivityLog empty;
  empty.end_ns = ms(300);
  CHECK(measure_duty_cycle(empty, 100.0) == pattern("000"));

  ActivityLog partial;
  partial.transitions = {{ms(140), WorkerState::kOn}, {ms(200), WorkerState::kOff}};
  partial.end_ns = ms(300);
  CHECK(measure_duty_cycle(partial, 100.0) == pattern("010"));

  ActivityLog short_on;
  short_on.transitions = {{ms(160), WorkerState::kOn}, {ms(200), WorkerState::kOff}};
  short_on.end_ns = ms(300);
  CHECK(measure_duty_cycle(short_on, 100.0) == pattern("000"));
}

TEST_CASE("stress transmitter follows the schedule") {
  const auto log = run_stress_transmitter(BitSchedule(pattern("10"), 100.0));
  REQUIRE(log.transitions.size() >= 2);
  CHECK(log.transitions[0].state == WorkerState::kOn);
  CHECK(std::abs(log.transitions[0].t_ns) <= ms(5));
  CHECK(log.transitions[1].state == WorkerState::kOff);
  CHECK(std::abs(log.transitions[1].t_ns - ms(100)) <= ms(5));
  CHECK(std::abs(log.end_ns - ms(200)) <= ms(5));
  CHECK(measure_duty_cycle(log, 100.0) == pattern("10"));

  const auto none = run_stress_transmitter(BitSchedule({}, 100.0));
  CHECK(none.transitions.empty());
}

TEST_CASE("stress transmitter closed loop and worker alignment") {
  const auto bits = pattern("10101010");
  const auto one = run_stress_transmitter(BitSchedule(bits, 100.0));
  CHECK(measure_duty_cycle(one, 100.0, bits.size()) == bits);

  StressOptions four;
  four.workers = 4;
  const auto many = run_stress_transmitter(BitSchedule(bits, 100.0), four);
  CHECK(many.worker_count == 4);
  CHECK(measure_duty_cycle(many, 100.0, bits.size()) == bits);
  REQUIRE(many.transitions.size() == one.transitions.size());
  for (std::size_t i = 0; i < one.transitions.size(); ++i) {
    CHECK(std::abs(many.transitions[i].t_ns - one.transitions[i].t_ns) <= ms(10));
  }

  StressOptions streaming;
  streaming.copy = CopyKernel::kStreaming;
  const auto nt = run_stress_transmitter(BitSchedule(pattern("0110"), 50.0), streaming);
  CHECK(measure_duty_cycle(nt, 50.0, 4) == pattern("0110"));
}

TEST_CASE("only one transmission at a time") {
  auto first = std::async(std::launch::async, [] { return run_stress_transmitter(BitSchedule(pattern("1111"), 100.0)); });
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  CHECK_THROWS_AS(run_stress_transmitter(BitSchedule(pattern("1"), 100.0)), std::logic_error);
  CHECK(first.get().transitions.size() >= 1);
}

TEST_CASE("activity log round trip") {
  ActivityLog log;
  log.transitions = {{0, WorkerState::kOn}, {ms(100), WorkerState::kOff}, {ms(200), WorkerState::kOn}};
  log.end_ns = ms(300);
  std::stringstream io;
  write_activity_log(io, log);
  const std::string text = io.str();
  CHECK(text.find("{\"t_ns\":0,\"state\":\"ON\"}") != std::string::npos);
  const auto back = read_activity_log(io);
  REQUIRE(back.transitions.size() == 4);
  CHECK(back.transitions[3] == Transition{ms(300), WorkerState::kOff});
  CHECK(measure_duty_cycle(back, 100.0) == measure_duty_cycle(log, 100.0));

  std::stringstream bad("{\"t_ns\":5,\"state\":\"ON\"}\n{\"t_ns\":1,\"state\":\"OFF\"}\n");
  CHECK_THROWS(read_activity_log(bad));
  std::stringstream garbage("{\"t_ns\":5,\"state\":\"MAYBE\"}\n");
  CHECK_THROWS(read_activity_log(garbage));
}

}
