#pragma once

#include <array>
#include <cstddef>
#include <functional>

#include "tlc/types.hpp"

namespace tlc {

// How flow rates are read off a trace when the estimator needs them at an
// event time. The fluid backend carries exact levels in the records; the
// discrete backend counts arrivals/departures over a window of width
// `window` anchored at the event per `direction`.
struct RateEstimatorConfig {
  double window = 10.0;
  enum class Direction { Before, After, Symmetric };
  Direction direction = Direction::Before;
  // Use the configured service rates H_n instead of estimating them from
  // departure counts.
  bool known_service = true;
};

enum class RateKind { Arrival, Departure };

// N / t_w over the window anchored at t (truncated to [0, horizon] with the
// divisor shortened). The fluid backend returns the exact instantaneous
// rate instead of a count estimate.
double estimate_rate(const Trace& trace, double t, RateKind which, int queue,
                     const RateEstimatorConfig& cfg,
                     RateEstimatorConfig::Direction direction);
double estimate_rate(const Trace& trace, double t, RateKind which, int queue,
                     const RateEstimatorConfig& cfg);

struct GradientConfig {
  std::array<double, 4> weights{1.0, 1.0, 1.0, 1.0};
  double horizon = 0.0;  // 0 means: use trace.horizon
  RateEstimatorConfig rate{};
};

// Running state of the estimator: the 4x4 state-derivative matrix, the
// switch counters that are the event-time derivatives of the light events,
// and the cost-derivative accumulators.
struct IpaState {
  std::array<std::array<double, 4>, 4> xprime{};  // [queue-1][theta-1]
  std::array<int, 4> zeta{};  // G2R_n events seen so far (n=1 and n=3 drive the rules)
  std::array<int, 4> rho{};   // R2G_n events seen so far
  std::array<bool, 4> in_nep{};
  std::array<bool, 4> green{};
  double t_last = 0.0;
  std::array<double, 4> dL{};
  int n_degenerate = 0;

  double& xp(int queue, int theta_i) { return at1(at1(xprime, queue), theta_i); }
  double xp(int queue, int theta_i) const { return at1(at1(xprime, queue), theta_i); }
};

struct GradientResult {
  std::array<double, 4> dL{};
  std::size_t n_events = 0;
  int n_degenerate = 0;
};

// Event-time derivative tau' of one record, given counters that already
// include the events of the record's instant. Light events at intersection
// 1 yield [zeta1, rho1, 0, 0], at intersection 2 [0, 0, zeta3, rho3];
// exogenous events yield 0; an emptiness event yields
// -x'_n(tau-)/f_n(tau-), with f from the record's rate snapshot.
std::array<double, 4> event_time_derivative(const EventRecord& rec, const IpaState& ipa);

// Test hook: called with the estimator state after every record / instant.
struct IpaObserver {
  virtual ~IpaObserver() = default;
  virtual void after_event(const EventRecord& rec, const IpaState& state) { (void)rec; (void)state; }
  virtual void after_instant(double time, const IpaState& state) { (void)time; (void)state; }
};

// dL += sum_n w_n * x'_n * (to - from) / T over queues currently in a NEP.
// Rejects negative intervals.
void accumulate(IpaState& ipa, double from, double to, const std::array<double, 4>& weights,
                double horizon);

// Replays the full trace: counters, state-derivative jumps at every record,
// accumulation between records, final segment up to the horizon.
GradientResult estimate_gradient(const Trace& trace, const GradientConfig& cfg,
                                 IpaObserver* observer = nullptr);

// Single-record application against explicit pre-resolved rates; exposed for
// unit tests. beta1 values are queue 1's effective departure rate around the
// instant; alpha values are the record queue's arrival rate; beta_own_minus
// is the record queue's own departure rate just before the instant.
struct ResolvedRates {
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double beta1_minus = 0.0;
  double beta1_plus = 0.0;
  double beta_own_minus = 0.0;
  double h_minus = 0.0;  // in-service rate feeding emptiness-event drifts
  double h_plus = 0.0;   // in-service rate of a drain starting at the instant
  double h3 = 0.0;
  bool nep3_after_instant = false;  // queue 3 in a NEP once the instant completes
  bool nep_own_after_instant = false;  // the record's queue in a NEP once the instant completes
  // Discrete traces: a red-period NEP start attributable to the switch that
  // opened the red; carries the seed magnitude (alpha for queues 1,2,4,
  // queue 1's departure rate for queue 3).
  bool red_start_seed = false;
  double red_start_rate = 0.0;
};
void apply_event(IpaState& ipa, const EventRecord& rec, const ResolvedRates& rates);

}  // namespace tlc
