#include "tlc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tlc {

void validate_theta(const ThetaVector& theta, const ThetaBounds& bounds) {
  if (!(bounds.lo > 0.0) || !(bounds.hi >= bounds.lo)) {
    throw std::invalid_argument("theta bounds must satisfy 0 < lo <= hi");
  }
  for (int n = 1; n <= kQueues; ++n) {
    const double v = theta(n);
    if (!std::isfinite(v) || v <= 0.0) {
      throw std::invalid_argument("theta" + std::to_string(n) + " must be strictly positive");
    }
    if (v < bounds.lo || v > bounds.hi) {
      throw std::invalid_argument("theta" + std::to_string(n) + "=" + std::to_string(v) +
                                  " outside [" + std::to_string(bounds.lo) + "," +
                                  std::to_string(bounds.hi) + "]");
    }
  }
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::NepStart: return "S";
    case EventKind::NepEnd: return "E";
    case EventKind::RedToGreen: return "R2G";
    case EventKind::GreenToRed: return "G2R";
    case EventKind::RateChange: return "RATE_CHANGE";
  }
  return "?";
}

EventKind event_kind_from_name(const std::string& name) {
  if (name == "S") return EventKind::NepStart;
  if (name == "E") return EventKind::NepEnd;
  if (name == "R2G") return EventKind::RedToGreen;
  if (name == "G2R") return EventKind::GreenToRed;
  if (name == "RATE_CHANGE") return EventKind::RateChange;
  throw std::invalid_argument("unknown event kind: " + name);
}

bool is_green(const ClockState& clock, const ThetaVector& theta, int n) {
  check_queue_index(n);
  const int nbar = perpendicular(n);
  const double zn = at1(clock.z, n);
  const double znbar = at1(clock.z, nbar);
  return (zn > 0.0 && zn < theta(n)) || znbar == theta(nbar);
}

double effective_departure_rate(bool green, double x, double alpha, double h) {
  if (!green) return 0.0;
  return x > 0.0 ? h : std::min(alpha, h);
}

double queue_drift(int n, const QueueState& state, const ClockState& clock,
                   const ThetaVector& theta, const FlowRates& rates) {
  check_queue_index(n);
  const double x = at1(state.x, n);
  if (x < 0.0) throw std::invalid_argument("queue content x" + std::to_string(n) + " is negative");

  double inflow = at1(rates.alpha, n);
  if (n == 3) {
    const bool green1 = is_green(clock, theta, 1);
    inflow = effective_departure_rate(green1, at1(state.x, 1), at1(rates.alpha, 1), at1(rates.h, 1));
  }
  const bool green = is_green(clock, theta, n);
  const double net = green ? inflow - at1(rates.h, n) : inflow;
  return x > 0.0 ? net : std::max(0.0, net);
}

double time_to_switch(const ClockState& clock, const ThetaVector& theta, int intersection) {
  if (intersection < 1 || intersection > 2) {
    throw std::invalid_argument("intersection must be 1 or 2");
  }
  const int g = clock.green_at(intersection);
  return theta(g) - at1(clock.z, g);
}

SwitchEvent next_light_switch(const ClockState& clock, const ThetaVector& theta) {
  SwitchEvent best;
  best.dt = time_to_switch(clock, theta, 1);
  best.intersection = 1;
  const double dt2 = time_to_switch(clock, theta, 2);
  if (dt2 < best.dt) {
    best.dt = dt2;
    best.intersection = 2;
  }
  best.expiring = clock.green_at(best.intersection);
  best.starting = perpendicular(best.expiring);
  return best;
}

}  // namespace tlc
