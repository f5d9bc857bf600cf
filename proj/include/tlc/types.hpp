#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlc {

// Queue indices are 1-based (1..4) in every public interface, matching the
// road numbering: roads 1,2 meet at intersection 1, roads 3,4 at
// intersection 2, and road 1 feeds road 3.
inline constexpr int kQueues = 4;

inline void check_queue_index(int n) {
  if (n < 1 || n > kQueues) throw std::invalid_argument("queue index must be in 1..4, got " + std::to_string(n));
}

// Road perpendicular to n at the same intersection: 1<->2, 3<->4.
inline int perpendicular(int n) {
  check_queue_index(n);
  return (n % 2 == 1) ? n + 1 : n - 1;
}

// Intersection (1 or 2) that queue n belongs to.
inline int intersection_of(int n) {
  check_queue_index(n);
  return n <= 2 ? 1 : 2;
}

template <typename T>
inline T& at1(std::array<T, 4>& a, int n) {
  check_queue_index(n);
  return a[static_cast<std::size_t>(n - 1)];
}

template <typename T>
inline const T& at1(const std::array<T, 4>& a, int n) {
  check_queue_index(n);
  return a[static_cast<std::size_t>(n - 1)];
}

struct ThetaBounds {
  double lo = 15.0;
  double hi = 40.0;
};

// The four controllable green-cycle lengths, seconds.
struct ThetaVector {
  std::array<double, 4> sec{25.0, 30.0, 30.0, 25.0};

  double operator()(int n) const { return at1(sec, n); }
  void set(int n, double v) { at1(sec, n) = v; }

  bool operator==(const ThetaVector& o) const { return sec == o.sec; }
};

void validate_theta(const ThetaVector& theta, const ThetaBounds& bounds);

// Per-queue elapsed-green clocks plus the explicit phase of each
// intersection (which queue currently holds the green).
struct ClockState {
  std::array<double, 4> z{};
  std::array<int, 2> green_queue{1, 3};  // queue holding green at intersections 1, 2

  int green_at(int intersection) const { return green_queue[static_cast<std::size_t>(intersection - 1)]; }
};

// Queue contents; vehicles for the discrete backend, vehicle-units for fluid.
struct QueueState {
  std::array<double, 4> x{};
};

// Arrival / in-service / effective departure rates per queue.
struct FlowRates {
  std::array<double, 4> alpha{};
  std::array<double, 4> h{};
  std::array<double, 4> beta{};
};

enum class EventKind : std::uint8_t {
  NepStart,    // S_n
  NepEnd,      // E_n
  RedToGreen,  // R2G_n
  GreenToRed,  // G2R_n
  RateChange,  // arrival-rate level change (fluid backend)
};

const char* event_kind_name(EventKind k);
EventKind event_kind_from_name(const std::string& name);

// One timestamped trace record. Rate snapshots are taken for the record's
// own queue just before (minus) and just after (plus) the whole event
// instant; x holds all four queue contents after the instant.
struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::NepStart;
  int queue = 0;  // 1..4
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double beta_minus = 0.0;
  double beta_plus = 0.0;
  double h = 0.0;
  std::array<double, 4> x{};
  std::uint32_t seq = 0;  // shared tag: records of one compound switch carry the same value
};

enum class Backend : std::uint8_t { Discrete, Fluid };

// A complete sample path: the typed event records plus, for the discrete
// backend, the raw per-queue arrival/departure instants needed by the
// windowed rate estimators.
struct Trace {
  Backend backend = Backend::Discrete;
  double horizon = 0.0;
  ThetaVector theta{};
  std::array<int, 2> initial_green{1, 3};
  std::array<double, 4> service_rate{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> alpha0{};  // initial arrival-rate levels (slot 3 mirrors beta1(0))
  std::vector<EventRecord> events;
  std::array<std::vector<double>, 4> arrivals;
  std::array<std::vector<double>, 4> departures;
};

// Maximal interval with positive queue content, [start, end). An interval
// still open at the horizon is closed at the horizon with open_at_end set.
struct Nep {
  double start = 0.0;
  double end = 0.0;
  bool open_at_end = false;
};

}  // namespace tlc
