#include "tlc/ipa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlc/model.hpp"

namespace tlc {

namespace {

constexpr double kDriftEps = 1e-9;  // below this an emptiness event counts as degenerate

std::array<double, 4> light_tau_prime(const IpaState& ipa, int queue) {
  if (intersection_of(queue) == 1) {
    return {static_cast<double>(at1(ipa.zeta, 1)), static_cast<double>(at1(ipa.rho, 1)), 0.0, 0.0};
  }
  return {0.0, 0.0, static_cast<double>(at1(ipa.zeta, 3)), static_cast<double>(at1(ipa.rho, 3))};
}

void add_scaled(IpaState& ipa, int row, double scale, const std::array<double, 4>& tau_prime) {
  if (scale == 0.0) return;
  for (int i = 1; i <= 4; ++i) ipa.xp(row, i) += scale * at1(tau_prime, i);
}

}  // namespace

std::array<double, 4> event_time_derivative(const EventRecord& rec, const IpaState& ipa) {
  switch (rec.kind) {
    case EventKind::RateChange:
    case EventKind::NepStart:
      // Exogenous, or induced with the jump carried by the trigger record.
      return {0.0, 0.0, 0.0, 0.0};
    case EventKind::NepEnd: {
      const double f = rec.alpha_minus - rec.h;  // drift that carried the queue into 0
      if (std::abs(f) <= kDriftEps) return {0.0, 0.0, 0.0, 0.0};  // degenerate: treated as exogenous
      std::array<double, 4> tp{};
      for (int i = 1; i <= 4; ++i) at1(tp, i) = -ipa.xp(rec.queue, i) / f;
      return tp;
    }
    case EventKind::GreenToRed:
    case EventKind::RedToGreen:
      return light_tau_prime(ipa, rec.queue);
  }
  throw std::invalid_argument("unknown event kind");
}

void apply_event(IpaState& ipa, const EventRecord& rec, const ResolvedRates& r) {
  const int q = rec.queue;
  check_queue_index(q);
  switch (rec.kind) {
    case EventKind::RateChange:
      return;  // tau' = 0: no state-derivative jump
    case EventKind::NepStart:
      at1(ipa.in_nep, q) = true;
      if (r.red_start_seed) {
        // Discrete traces: the NEP opened by the switch that began this red
        // period starts at the first arrival instead of at the switch; the
        // counters have not changed in between, so seeding here is the
        // switch-time jump.
        add_scaled(ipa, q, -r.red_start_rate, light_tau_prime(ipa, q));
      }
      return;
    case EventKind::NepEnd: {
      const double f = r.alpha_minus - r.h_minus;
      const bool degenerate = std::abs(f) <= kDriftEps;
      if (degenerate) ++ipa.n_degenerate;
      if (q == 1 && at1(ipa.in_nep, 3) && !degenerate) {
        // Queue 3 inherits queue 1's derivative when queue 1 empties.
        for (int i = 1; i <= 4; ++i) ipa.xp(3, i) += ipa.xp(1, i);
      }
      for (int i = 1; i <= 4; ++i) ipa.xp(q, i) = 0.0;
      at1(ipa.in_nep, q) = false;
      return;
    }
    case EventKind::GreenToRed: {
      const auto tp = light_tau_prime(ipa, q);
      if (at1(ipa.in_nep, q)) {
        add_scaled(ipa, q, -r.beta_own_minus, tp);
      } else if (r.nep_own_after_instant) {
        // The NEP starts right at the switch: seeded with the inflow that
        // now accumulates.
        add_scaled(ipa, q, -(q == 3 ? r.beta1_plus : r.alpha_minus), tp);
      }
      if (q == 1) {
        // Queue 3 loses its inflow, unless it is empty under a green light
        // and stays so (pass-through, no drift jump).
        const bool skip = !at1(ipa.in_nep, 3) && at1(ipa.green, 3) && !r.nep3_after_instant;
        if (!skip) add_scaled(ipa, 3, r.beta1_minus, tp);
      }
      at1(ipa.green, q) = false;
      return;
    }
    case EventKind::RedToGreen: {
      const auto tp = light_tau_prime(ipa, q);
      if (at1(ipa.in_nep, q)) add_scaled(ipa, q, r.h_plus, tp);
      if (q == 1) {
        // Queue 3 gains inflow beta1(tau+); under a green light an empty
        // queue 3 absorbs up to h3 of it.
        if (at1(ipa.in_nep, 3) || !at1(ipa.green, 3)) {
          add_scaled(ipa, 3, -r.beta1_plus, tp);
        } else {
          add_scaled(ipa, 3, -std::max(0.0, r.beta1_plus - r.h3), tp);
        }
      }
      at1(ipa.green, q) = true;
      return;
    }
  }
  throw std::invalid_argument("unknown event kind");
}

void accumulate(IpaState& ipa, double from, double to, const std::array<double, 4>& weights,
                double horizon) {
  if (to < from) throw std::invalid_argument("accumulate: negative interval");
  const double dt = to - from;
  if (dt > 0.0) {
    for (int q = 1; q <= kQueues; ++q) {
      if (!at1(ipa.in_nep, q)) continue;
      const double w = at1(weights, q) / horizon;
      for (int i = 1; i <= 4; ++i) ipa.dL[static_cast<std::size_t>(i - 1)] += w * ipa.xp(q, i) * dt;
    }
  }
  ipa.t_last = to;
}

namespace {

// Count-based rate estimate. The anchor instant itself is excluded: an
// event exactly at the anchor is "at" the event time, not before or after
// it, so before-windows are (lo, t) and after-windows are (t, hi].
double windowed_count_rate(const std::vector<double>& stream, double lo, double hi,
                           bool include_hi) {
  if (hi <= lo) return 0.0;
  const auto a = std::upper_bound(stream.begin(), stream.end(), lo);
  const auto b = include_hi ? std::upper_bound(stream.begin(), stream.end(), hi)
                            : std::lower_bound(stream.begin(), stream.end(), hi);
  return static_cast<double>(b - a) / (hi - lo);
}

void window_bounds(double t, double horizon, double w, RateEstimatorConfig::Direction dir,
                   double& lo, double& hi) {
  switch (dir) {
    case RateEstimatorConfig::Direction::Before:
      lo = std::max(0.0, t - w);
      hi = t;
      break;
    case RateEstimatorConfig::Direction::After:
      lo = t;
      hi = std::min(horizon, t + w);
      break;
    case RateEstimatorConfig::Direction::Symmetric:
      lo = std::max(0.0, t - 0.5 * w);
      hi = std::min(horizon, t + 0.5 * w);
      break;
  }
}

// Replays the record sequence up to t and reports the instantaneous flow
// state there: current arrival levels, light state, and interpolated queue
// contents. `left` selects the state just before the records at exactly t.
struct FluidStateAt {
  std::array<double, 4> alpha{};
  std::array<bool, 4> green{};
  std::array<double, 4> x{};
};

FluidStateAt fluid_state_at(const Trace& trace, double t, bool left) {
  FluidStateAt s;
  s.alpha = trace.alpha0;
  at1(s.green, trace.initial_green[0]) = true;
  at1(s.green, trace.initial_green[1]) = true;
  double t_prev = 0.0;
  std::array<double, 4> x_prev{};
  for (const auto& rec : trace.events) {
    const bool before = left ? rec.time < t : rec.time <= t;
    if (!before) {
      // Linear interpolation between the surrounding records.
      const double span = rec.time - t_prev;
      const double frac = span > 0.0 ? (t - t_prev) / span : 0.0;
      for (int q = 1; q <= kQueues; ++q) {
        at1(s.x, q) = at1(x_prev, q) + frac * (at1(rec.x, q) - at1(x_prev, q));
      }
      return s;
    }
    switch (rec.kind) {
      case EventKind::RateChange: at1(s.alpha, rec.queue) = rec.alpha_plus; break;
      case EventKind::GreenToRed: at1(s.green, rec.queue) = false; break;
      case EventKind::RedToGreen: at1(s.green, rec.queue) = true; break;
      default: break;
    }
    x_prev = rec.x;
    t_prev = rec.time;
  }
  s.x = x_prev;
  return s;
}

}  // namespace

double estimate_rate(const Trace& trace, double t, RateKind which, int queue,
                     const RateEstimatorConfig& cfg,
                     RateEstimatorConfig::Direction direction) {
  if (!(cfg.window > 0.0)) throw std::invalid_argument("rate estimator window must be > 0");
  check_queue_index(queue);
  if (t < 0.0 || t > trace.horizon) throw std::invalid_argument("estimate_rate: t outside the trace");

  if (trace.backend == Backend::Fluid) {
    const bool left = direction == RateEstimatorConfig::Direction::Before;
    const FluidStateAt s = fluid_state_at(trace, t, left);
    const auto& H = trace.service_rate;
    const double beta1 = effective_departure_rate(at1(s.green, 1), at1(s.x, 1), at1(s.alpha, 1), at1(H, 1));
    if (which == RateKind::Arrival) {
      return queue == 3 ? beta1 : at1(s.alpha, queue);
    }
    const double inflow = queue == 3 ? beta1 : at1(s.alpha, queue);
    return effective_departure_rate(at1(s.green, queue), at1(s.x, queue), inflow, at1(H, queue));
  }

  double lo = 0.0;
  double hi = 0.0;
  window_bounds(t, trace.horizon, cfg.window, direction, lo, hi);
  const auto& stream = which == RateKind::Arrival ? at1(trace.arrivals, queue) : at1(trace.departures, queue);
  const bool include_hi = direction != RateEstimatorConfig::Direction::Before;
  return windowed_count_rate(stream, lo, hi, include_hi);
}

double estimate_rate(const Trace& trace, double t, RateKind which, int queue,
                     const RateEstimatorConfig& cfg) {
  return estimate_rate(trace, t, which, queue, cfg, cfg.direction);
}

namespace {

struct InstantView {
  std::array<bool, 4> nep_post{};
  std::array<bool, 4> green_post{};
  std::array<double, 4> alpha_post{};
};

ResolvedRates resolve_rates(const Trace& trace, const GradientConfig& cfg, const EventRecord& rec,
                            const IpaState& ipa, const std::array<double, 4>& alpha_run,
                            const InstantView& view) {
  ResolvedRates r;
  const int q = rec.queue;
  const auto& H = trace.service_rate;
  r.nep3_after_instant = at1(view.nep_post, 3);
  r.nep_own_after_instant = at1(view.nep_post, q);

  if (trace.backend == Backend::Fluid) {
    r.h_minus = rec.h;
    r.h_plus = rec.h;
    r.h3 = at1(H, 3);
    r.alpha_minus = rec.alpha_minus;
    r.alpha_plus = rec.alpha_plus;
    r.beta1_minus = effective_departure_rate(at1(ipa.green, 1), at1(ipa.in_nep, 1) ? 1.0 : 0.0,
                                             at1(alpha_run, 1), at1(H, 1));
    r.beta1_plus = effective_departure_rate(at1(view.green_post, 1), at1(view.nep_post, 1) ? 1.0 : 0.0,
                                            at1(view.alpha_post, 1), at1(H, 1));
    double inflow_minus = at1(alpha_run, q);
    if (q == 3) inflow_minus = r.beta1_minus;
    r.beta_own_minus = effective_departure_rate(at1(ipa.green, q), at1(ipa.in_nep, q) ? 1.0 : 0.0,
                                                inflow_minus, at1(H, q));
    return r;
  }

  // Discrete trace: rates are windowed counts over the arrival/departure
  // streams, except for the in-service rates when they are known.
  const double t = rec.time;
  const auto before = RateEstimatorConfig::Direction::Before;
  const auto after = RateEstimatorConfig::Direction::After;
  if (cfg.rate.known_service) {
    r.h_minus = at1(H, q);
    r.h_plus = at1(H, q);
    r.h3 = at1(H, 3);
  } else {
    r.h_minus = estimate_rate(trace, t, RateKind::Departure, q, cfg.rate, before);
    r.h_plus = estimate_rate(trace, t, RateKind::Departure, q, cfg.rate, after);
    r.h3 = estimate_rate(trace, t, RateKind::Departure, 3, cfg.rate, cfg.rate.direction);
  }
  r.beta1_minus = estimate_rate(trace, t, RateKind::Departure, 1, cfg.rate, before);
  if (cfg.rate.known_service) {
    const double a1_after = estimate_rate(trace, t, RateKind::Arrival, 1, cfg.rate, after);
    r.beta1_plus = at1(view.green_post, 1)
                       ? (at1(view.nep_post, 1) ? at1(H, 1) : std::min(a1_after, at1(H, 1)))
                       : 0.0;
  } else {
    r.beta1_plus = estimate_rate(trace, t, RateKind::Departure, 1, cfg.rate, after);
  }
  r.beta_own_minus = estimate_rate(trace, t, RateKind::Departure, q, cfg.rate, before);
  if (q == 3) {
    // alpha_3 is queue 1's departure rate.
    r.alpha_minus = r.beta1_minus;
    r.alpha_plus = r.beta1_plus;
  } else {
    r.alpha_minus = estimate_rate(trace, t, RateKind::Arrival, q, cfg.rate, before);
    r.alpha_plus = estimate_rate(trace, t, RateKind::Arrival, q, cfg.rate, after);
  }
  return r;
}

}  // namespace

GradientResult estimate_gradient(const Trace& trace, const GradientConfig& cfg, IpaObserver* observer) {
  const double T = cfg.horizon > 0.0 ? cfg.horizon : trace.horizon;
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (trace.horizon + 1e-12 < T) throw std::invalid_argument("incomplete trace for gradient estimation");

  IpaState ipa;
  at1(ipa.green, trace.initial_green[0]) = true;
  at1(ipa.green, trace.initial_green[1]) = true;
  std::array<double, 4> alpha_run = trace.alpha0;
  // Discrete traces: a queue that is empty when its inflow-opening switch
  // fires starts its next NEP at the first arrival afterwards. That NEP
  // start carries the switch's seed, and the seeded row is accumulated back
  // over the gap so the alignment matches the flow model, where the NEP
  // extends from the switch itself.
  std::array<bool, 4> red_pending{};     // a red-period NEP start is owed bookkeeping
  std::array<bool, 4> red_needs_seed{};  // the seed was not applied by a cross rule yet
  std::array<double, 4> red_time{};      // when the inflow into the red period began
  // Seed rates are sampled at the switch itself: a window anchored at the
  // first arrival is conditionally empty just before it and would bias the
  // rate low.
  std::array<double, 4> red_rate{};

  GradientResult res;
  const auto& ev = trace.events;
  std::size_t i = 0;
  while (i < ev.size()) {
    const double t = ev[i].time;
    if (t < ipa.t_last) throw std::invalid_argument("trace records are not time-ordered");
    if (t > T) break;
    std::size_t j = i;
    while (j < ev.size() && ev[j].time == t) ++j;

    accumulate(ipa, ipa.t_last, t, cfg.weights, T);

    // The switch counters include every event of this instant (their values
    // are the event-time derivatives "at or before" the instant), and the
    // post views answer what the instant leaves behind.
    InstantView view;
    view.nep_post = ipa.in_nep;
    view.green_post = ipa.green;
    view.alpha_post = alpha_run;
    for (std::size_t k = i; k < j; ++k) {
      const auto& rec = ev[k];
      switch (rec.kind) {
        case EventKind::NepStart: at1(view.nep_post, rec.queue) = true; break;
        case EventKind::NepEnd: at1(view.nep_post, rec.queue) = false; break;
        case EventKind::GreenToRed:
          at1(view.green_post, rec.queue) = false;
          ++at1(ipa.zeta, rec.queue);
          break;
        case EventKind::RedToGreen:
          at1(view.green_post, rec.queue) = true;
          ++at1(ipa.rho, rec.queue);
          break;
        case EventKind::RateChange: at1(view.alpha_post, rec.queue) = rec.alpha_plus; break;
      }
    }

    for (std::size_t k = i; k < j; ++k) {
      const auto& rec = ev[k];
      ResolvedRates r = resolve_rates(trace, cfg, rec, ipa, alpha_run, view);
      bool retro = false;
      double retro_gap = 0.0;
      if (trace.backend == Backend::Discrete) {
        const int q = rec.queue;
        switch (rec.kind) {
          case EventKind::NepStart:
            if (at1(red_pending, q)) {
              if (at1(red_needs_seed, q)) {
                r.red_start_seed = true;
                r.red_start_rate = at1(red_rate, q);
              }
              retro = true;
              retro_gap = rec.time - at1(red_time, q);
              at1(red_pending, q) = false;
            }
            break;
          case EventKind::GreenToRed:
            at1(red_pending, q) = !at1(ipa.in_nep, q) && !r.nep_own_after_instant;
            at1(red_needs_seed, q) = at1(red_pending, q);
            at1(red_time, q) = rec.time;
            at1(red_rate, q) = q == 3 ? r.beta1_plus : r.alpha_minus;
            break;
          case EventKind::RedToGreen:
            at1(red_pending, q) = false;
            if (q == 1 && at1(red_pending, 3)) {
              // The inflow jump at R2G_1 already seeded queue 3's row; the
              // gap bookkeeping restarts from here.
              at1(red_needs_seed, 3) = false;
              at1(red_time, 3) = rec.time;
            }
            break;
          default:
            break;
        }
      }
      apply_event(ipa, rec, r);
      if (retro && retro_gap > 0.0) {
        // The flow-model NEP spans [switch, emptiness); recover the segment
        // between the switch and the first arrival.
        const double scale = at1(cfg.weights, rec.queue) * retro_gap / T;
        for (int c = 1; c <= 4; ++c) {
          ipa.dL[static_cast<std::size_t>(c - 1)] += scale * ipa.xp(rec.queue, c);
        }
      }
      if (rec.kind == EventKind::RateChange) at1(alpha_run, rec.queue) = rec.alpha_plus;
      ++res.n_events;
      if (observer) observer->after_event(rec, ipa);
    }
    if (observer) observer->after_instant(t, ipa);
    i = j;
  }
  accumulate(ipa, ipa.t_last, T, cfg.weights, T);

  res.dL = ipa.dL;
  res.n_degenerate = ipa.n_degenerate;
  return res;
}

}  // namespace tlc
