#pragma once

#include "tlc/types.hpp"

namespace tlc {

// Light predicate B_n(z, theta): GREEN iff 0 < z_n < theta_n or the
// perpendicular clock has just expired (z_nbar == theta_nbar).
bool is_green(const ClockState& clock, const ThetaVector& theta, int n);

// Effective departure rate of one queue: h while serving a backlog, the
// inflow capped at h when the queue is empty under a green light, 0 under
// red. The cap keeps the empty-queue branch consistent with a server that
// cannot move more than h per second.
double effective_departure_rate(bool green, double x, double alpha, double h);

// Net rate of change of queue n. For n=3 the arrival rate is replaced by
// queue 1's effective departure rate (tandem coupling); rates.alpha[2] is
// ignored for that queue. Rejects negative queue content.
double queue_drift(int n, const QueueState& state, const ClockState& clock,
                   const ThetaVector& theta, const FlowRates& rates);

struct SwitchEvent {
  double dt = 0.0;       // time until the switch
  int intersection = 0;  // 1 or 2
  int expiring = 0;      // queue receiving G2R
  int starting = 0;      // queue receiving R2G
};

// Time until the green phase of the given intersection expires.
double time_to_switch(const ClockState& clock, const ThetaVector& theta, int intersection);

// Soonest compound switch over both intersections. A switch emits G2R on
// the expiring queue and R2G on the perpendicular queue at one timestamp.
SwitchEvent next_light_switch(const ClockState& clock, const ThetaVector& theta);

}  // namespace tlc
