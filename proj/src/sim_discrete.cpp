#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tlc/model.hpp"
#include "tlc/simulate.hpp"
#include "tlc/util.hpp"

namespace tlc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct InstantState {
  std::array<double, 4> x{};
  std::array<bool, 4> green{};
  std::array<double, 4> alpha{};  // model arrival rates; slot 3 filled with beta1
};

double beta_of(const InstantState& s, int q, const std::array<double, 4>& H) {
  double alpha = at1(s.alpha, q);
  if (q == 3) {
    alpha = effective_departure_rate(at1(s.green, 1), at1(s.x, 1), at1(s.alpha, 1), at1(H, 1));
  }
  return effective_departure_rate(at1(s.green, q), at1(s.x, q), alpha, at1(H, q));
}

}  // namespace

SamplePathResult simulate_discrete(const SimConfig& cfg) {
  validate(cfg);
  const double T = cfg.horizon;
  const auto& H = cfg.service_rate;

  SamplePathResult out;
  Trace& trace = out.trace;
  trace.backend = Backend::Discrete;
  trace.horizon = T;
  trace.theta = cfg.theta;
  trace.initial_green = cfg.initial_green;
  trace.service_rate = H;

  // Exogenous Poisson arrival streams for queues 1, 2, 4.
  std::array<std::vector<double>, 4> streams;
  for (int q : {1, 2, 4}) {
    at1(streams, q) = poisson_arrivals(at1(cfg.alpha_bar, q), T, mix_seed(cfg.seed, static_cast<std::uint64_t>(q)));
  }
  std::array<std::size_t, 4> stream_pos{0, 0, 0, 0};

  std::array<double, 4> x{};          // vehicle counts
  std::array<bool, 4> green{};        // light state per queue
  std::array<double, 2> sw_time{};    // next switch per intersection
  std::array<double, 4> dep_time{kInf, kInf, kInf, kInf};
  std::array<double, 4> nep_start{-1.0, -1.0, -1.0, -1.0};
  std::array<double, 4> integral{};
  double t_prev = 0.0;
  std::uint32_t seq = 0;

  for (int i : {1, 2}) {
    const int g = cfg.initial_green[static_cast<std::size_t>(i - 1)];
    at1(green, g) = true;
    sw_time[static_cast<std::size_t>(i - 1)] = cfg.theta(g);
  }

  auto snapshot = [&]() {
    InstantState s;
    s.x = x;
    s.green = green;
    s.alpha = cfg.alpha_bar;
    at1(s.alpha, 3) = beta_of(s, 1, H);
    return s;
  };

  trace.alpha0 = snapshot().alpha;

  std::vector<EventRecord> pending;  // records of the instant being processed
  auto emit = [&](EventKind kind, int q, double t, std::uint32_t tag = 0) {
    EventRecord rec;
    rec.time = t;
    rec.kind = kind;
    rec.queue = q;
    rec.h = at1(H, q);
    rec.seq = tag;
    pending.push_back(rec);
  };
  auto finalize_instant = [&](const InstantState& pre) {
    const InstantState post = snapshot();
    for (auto& rec : pending) {
      const int q = rec.queue;
      rec.alpha_minus = at1(pre.alpha, q);
      rec.alpha_plus = at1(post.alpha, q);
      rec.beta_minus = beta_of(pre, q, H);
      rec.beta_plus = beta_of(post, q, H);
      rec.x = post.x;
      trace.events.push_back(rec);
    }
    pending.clear();
  };

  auto depart = [&](int q, double t) {
    at1(x, q) -= 1.0;
    at1(trace.departures, q).push_back(t);
    if (at1(x, q) == 0.0) {
      emit(EventKind::NepEnd, q, t);
      at1(out.neps, q).push_back({at1(nep_start, q), t, false});
      at1(nep_start, q) = -1.0;
      at1(dep_time, q) = kInf;
    } else {
      at1(dep_time, q) = t + 1.0 / at1(H, q);
    }
    if (q == 1) {
      // The departed vehicle joins queue 3 at the same instant.
      at1(trace.arrivals, 3).push_back(t);
      const double prev3 = at1(x, 3);
      at1(x, 3) += 1.0;
      if (prev3 == 0.0) {
        emit(EventKind::NepStart, 3, t);
        at1(nep_start, 3) = t;
        if (at1(green, 3)) at1(dep_time, 3) = t + 1.0 / at1(H, 3);
      }
    }
  };

  auto arrive = [&](int q, double t) {
    at1(trace.arrivals, q).push_back(t);
    const double prev = at1(x, q);
    at1(x, q) += 1.0;
    if (prev == 0.0) {
      emit(EventKind::NepStart, q, t);
      at1(nep_start, q) = t;
      if (at1(green, q)) at1(dep_time, q) = t + 1.0 / at1(H, q);
    }
  };

  auto process_switch = [&](int intersection, double t) {
    const int g = intersection == 1 ? (at1(green, 1) ? 1 : 2) : (at1(green, 3) ? 3 : 4);
    const int s = perpendicular(g);
    ++seq;
    emit(EventKind::GreenToRed, g, t, seq);
    emit(EventKind::RedToGreen, s, t, seq);
    at1(green, g) = false;
    at1(green, s) = true;
    at1(dep_time, g) = kInf;  // service restarts from a full headway after the next R2G
    if (at1(x, s) > 0.0) at1(dep_time, s) = t + 1.0 / at1(H, s);
    sw_time[static_cast<std::size_t>(intersection - 1)] += cfg.theta(s);
  };

  for (;;) {
    double t_next = std::min(sw_time[0], sw_time[1]);
    for (int q = 1; q <= kQueues; ++q) t_next = std::min(t_next, at1(dep_time, q));
    for (int q : {1, 2, 4}) {
      const auto& st = at1(streams, q);
      const std::size_t pos = at1(stream_pos, q);
      if (pos < st.size()) t_next = std::min(t_next, st[pos]);
    }
    if (t_next >= T) break;

    for (int q = 1; q <= kQueues; ++q) at1(integral, q) += at1(x, q) * (t_next - t_prev);
    t_prev = t_next;

    const InstantState pre = snapshot();
    // Tie-break at one instant: departures (emptiness first), arrivals, then switches.
    for (int q = 1; q <= kQueues; ++q) {
      if (at1(dep_time, q) == t_next) depart(q, t_next);
    }
    for (int q : {1, 2, 4}) {
      auto& pos = at1(stream_pos, q);
      const auto& st = at1(streams, q);
      while (pos < st.size() && st[pos] == t_next) {
        arrive(q, t_next);
        ++pos;
      }
    }
    for (int i : {1, 2}) {
      if (sw_time[static_cast<std::size_t>(i - 1)] == t_next) process_switch(i, t_next);
    }
    finalize_instant(pre);
  }

  for (int q = 1; q <= kQueues; ++q) {
    at1(integral, q) += at1(x, q) * (T - t_prev);
    if (at1(nep_start, q) >= 0.0) at1(out.neps, q).push_back({at1(nep_start, q), T, true});
    at1(out.total_arrivals, q) = static_cast<double>(at1(trace.arrivals, q).size());
    at1(out.total_departures, q) = static_cast<double>(at1(trace.departures, q).size());
    at1(out.final_x, q) = at1(x, q);
  }

  // Horizon marker so the trace is self-delimiting (a no-op rate record).
  {
    const InstantState end = snapshot();
    EventRecord rec;
    rec.time = T;
    rec.kind = EventKind::RateChange;
    rec.queue = 1;
    rec.alpha_minus = rec.alpha_plus = at1(end.alpha, 1);
    rec.beta_minus = rec.beta_plus = beta_of(end, 1, H);
    rec.h = at1(H, 1);
    rec.x = x;
    trace.events.push_back(rec);
  }

  double cost = 0.0;
  for (int q = 1; q <= kQueues; ++q) cost += at1(cfg.weights, q) * at1(integral, q);
  out.cost = cost / T;
  return out;
}

}  // namespace tlc
