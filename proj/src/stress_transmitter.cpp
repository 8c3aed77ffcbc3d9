#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <stdexcept>
#include <thread>
#include <vector>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

#include "airfi/modem_tx.hpp"
#include "airfi/simd/kernels.hpp"

namespace airfi::tx {
namespace {

using Clock = std::chrono::steady_clock;

enum class Command : int { kOff = 0, kOn = 1, kStop = 2 };

std::atomic<bool> g_transmitting{false};

class TransmissionGuard {
 public:
  TransmissionGuard() {
    if (g_transmitting.exchange(true)) throw std::logic_error("a stress transmission is already running");
  }
  ~TransmissionGuard() { g_transmitting.store(false); }
  TransmissionGuard(const TransmissionGuard&) = delete;
  TransmissionGuard& operator=(const TransmissionGuard&) = delete;
};

inline void clobber_memory(void* p) {
#if defined(__GNUC__) || defined(__clang__)
  asm volatile("" : : "r"(p) : "memory");
#else
  static volatile std::byte sink;
  sink = *static_cast<std::byte*>(p);
#endif
}

void wait_until(Clock::time_point deadline, std::chrono::nanoseconds spin_tail) {
  const auto coarse = deadline - spin_tail;
  if (Clock::now() < coarse) std::this_thread::sleep_until(coarse);
  while (Clock::now() < deadline) {
  }
}

bool pin_to_core(int index) {
#if defined(__linux__)
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(static_cast<unsigned>(index) % cores, &set);
  return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
  (void)index;
  return false;
#endif
}

struct SharedState {
  std::atomic<Command> command{Command::kOff};
  std::atomic<Clock::rep> deadline{0};
  Clock::time_point released{};
};

// Stamps the release instant before any thread leaves the rendezvous, so a
// governor that loses the core to fresh workers still logs the true boundary.
struct StampRelease {
  SharedState* shared;
  void operator()() noexcept { shared->released = Clock::now(); }
};

}  // namespace

ActivityLog run_stress_transmitter(const BitSchedule& schedule, const StressOptions& options) {
  if (options.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (options.buffer_bytes == 0) throw std::invalid_argument("buffer_bytes must be positive");

  ActivityLog log;
  log.worker_count = options.workers;
  if (schedule.size() == 0) return log;

  TransmissionGuard guard;

  const auto copy = options.copy == CopyKernel::kStreaming ? simd::kernels().stream_copy : simd::scalar::stream_copy;
  // Spinning only helps when the governor has a core to itself; otherwise it
  // steals time from the workers that must notice the deadline.
  const bool spare_core = std::thread::hardware_concurrency() > static_cast<unsigned>(options.workers);
  const auto spin_tail = spare_core ? std::chrono::nanoseconds(static_cast<std::int64_t>(options.spin_tail_ms * 1e6))
                                    : std::chrono::nanoseconds{0};
  const auto bit_time = std::chrono::nanoseconds(static_cast<std::int64_t>(std::llround(schedule.bit_time_ms() * 1e6)));

  SharedState shared;
  std::barrier sync(options.workers + 1, StampRelease{&shared});
  std::atomic<int> pinned{0};

  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(options.workers));
  for (int w = 0; w < options.workers; ++w) {
    workers.emplace_back([&, w] {
      std::vector<std::byte> a(options.buffer_bytes, std::byte{0x5A});
      std::vector<std::byte> b(options.buffer_bytes, std::byte{0xA5});
      if (options.pin_cores && pin_to_core(w)) pinned.fetch_add(1);
      sync.arrive_and_wait();  // ready
      for (;;) {
        sync.arrive_and_wait();  // bit boundary
        const Command cmd = shared.command.load(std::memory_order_acquire);
        if (cmd == Command::kStop) break;
        const Clock::time_point deadline{Clock::duration{shared.deadline.load(std::memory_order_acquire)}};
        // OFF: block in the next rendezvous; the governor keeps the clock.
        // An in-flight copy pair always completes, so ON may overrun by one pair.
        while (cmd == Command::kOn && Clock::now() < deadline) {
          copy(b.data(), a.data(), a.size());
          clobber_memory(b.data());
          copy(a.data(), b.data(), b.size());
          clobber_memory(a.data());
        }
      }
    });
  }

  sync.arrive_and_wait();  // all workers allocated and pinned
  const Clock::time_point start = Clock::now();
  Clock::time_point bit_end = start;
  const auto& bits = schedule.bits();
  log.bit_starts_ns.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bit_end += bit_time;
    shared.command.store(bits[i] ? Command::kOn : Command::kOff, std::memory_order_release);
    shared.deadline.store(bit_end.time_since_epoch().count(), std::memory_order_release);
    sync.arrive_and_wait();
    const std::int64_t t_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(shared.released - start).count();
    log.bit_starts_ns.push_back(t_ns);

    const std::int64_t scheduled_ns = static_cast<std::int64_t>(i) * bit_time.count();
    if (std::llabs(t_ns - scheduled_ns) * 10 > bit_time.count()) log.timing_violations.push_back(i);

    const WorkerState state = bits[i] ? WorkerState::kOn : WorkerState::kOff;
    if (log.transitions.empty() || log.transitions.back().state != state) {
      const std::int64_t stamp =
          log.transitions.empty() ? t_ns : std::max(t_ns, log.transitions.back().t_ns + 1);
      log.transitions.push_back({stamp, state});
    }
    wait_until(bit_end, spin_tail);
  }
  shared.command.store(Command::kStop, std::memory_order_release);
  sync.arrive_and_wait();
  log.end_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(shared.released - start).count();
  for (auto& t : workers) t.join();
  log.affinity_applied = pinned.load() == options.workers;
  return log;
}

codec::Bits measure_duty_cycle(const ActivityLog& log, double bit_time_ms, std::optional<std::size_t> slots) {
  if (!(bit_time_ms > 0.0)) throw std::invalid_argument("bit_time_ms must be positive");
  const double slot_ns = bit_time_ms * 1e6;
  const std::size_t n = slots.value_or(static_cast<std::size_t>(std::llround(static_cast<double>(log.end_ns) / slot_ns)));
  codec::Bits out(n, 0);
  if (log.transitions.empty()) return out;

  const double horizon = std::max(static_cast<double>(log.end_ns), static_cast<double>(n) * slot_ns);
  std::vector<double> on_ns(n, 0.0);
  for (std::size_t i = 0; i < log.transitions.size(); ++i) {
    if (log.transitions[i].state != WorkerState::kOn) continue;
    const double begin = static_cast<double>(log.transitions[i].t_ns);
    const double end = i + 1 < log.transitions.size() ? static_cast<double>(log.transitions[i + 1].t_ns) : horizon;
    for (std::size_t s = 0; s < n; ++s) {
      const double lo = std::max(begin, static_cast<double>(s) * slot_ns);
      const double hi = std::min(end, static_cast<double>(s + 1) * slot_ns);
      if (hi > lo) on_ns[s] += hi - lo;
    }
  }
  for (std::size_t s = 0; s < n; ++s) out[s] = on_ns[s] > 0.5 * slot_ns ? 1 : 0;
  return out;
}

}  // namespace airfi::tx
