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
constexpr double kEmptyTol = 1e-9;   // vehicle-units treated as an empty queue
constexpr double kRateTol = 1e-12;   // drifts below this are treated as zero

struct FlowView {
  std::array<bool, 4> green{};
  std::array<bool, 4> positive{};  // queue content strictly positive
  std::array<double, 4> alpha{};   // current levels; slot 3 derived below
};

double beta_of(const FlowView& v, int q, const std::array<double, 4>& H) {
  double alpha = at1(v.alpha, q);
  if (q == 3) {
    alpha = effective_departure_rate(at1(v.green, 1), at1(v.positive, 1) ? 1.0 : 0.0,
                                     at1(v.alpha, 1), at1(H, 1));
  }
  return effective_departure_rate(at1(v.green, q), at1(v.positive, q) ? 1.0 : 0.0, alpha, at1(H, q));
}

double drift_of(const FlowView& v, int q, const std::array<double, 4>& H) {
  double inflow = at1(v.alpha, q);
  if (q == 3) {
    inflow = effective_departure_rate(at1(v.green, 1), at1(v.positive, 1) ? 1.0 : 0.0,
                                      at1(v.alpha, 1), at1(H, 1));
  }
  const double net = at1(v.green, q) ? inflow - at1(H, q) : inflow;
  return at1(v.positive, q) ? net : std::max(0.0, net);
}

}  // namespace

std::array<PiecewiseRate, 4> make_rate_paths(const SimConfig& cfg) {
  std::array<PiecewiseRate, 4> paths;
  for (int q : {1, 2, 4}) {
    at1(paths, q) = fluid_rate_path(at1(cfg.alpha_bar, q), cfg.horizon, cfg.fluid,
                                    mix_seed(cfg.seed, 16 + static_cast<std::uint64_t>(q)));
  }
  return paths;
}

SamplePathResult simulate_fluid(const SimConfig& cfg) { return simulate_fluid(cfg, make_rate_paths(cfg)); }

SamplePathResult simulate_fluid(const SimConfig& cfg, const std::array<PiecewiseRate, 4>& rate_paths) {
  validate(cfg);
  const double T = cfg.horizon;
  const auto& H = cfg.service_rate;

  SamplePathResult out;
  Trace& trace = out.trace;
  trace.backend = Backend::Fluid;
  trace.horizon = T;
  trace.theta = cfg.theta;
  trace.initial_green = cfg.initial_green;
  trace.service_rate = H;

  std::array<double, 4> x{};
  std::array<bool, 4> green{};
  std::array<bool, 4> in_nep{};
  std::array<double, 4> alpha{};
  std::array<std::size_t, 4> rate_pos{1, 1, 1, 1};  // next unconsumed breakpoint
  std::array<double, 2> sw_time{};
  std::array<double, 4> nep_start{-1.0, -1.0, -1.0, -1.0};
  std::array<double, 4> integral{};
  std::array<double, 4> inflow_vol{};
  std::array<double, 4> outflow_vol{};
  double t = 0.0;
  std::uint32_t seq = 0;

  for (int i : {1, 2}) {
    const int g = cfg.initial_green[static_cast<std::size_t>(i - 1)];
    at1(green, g) = true;
    sw_time[static_cast<std::size_t>(i - 1)] = cfg.theta(g);
  }
  for (int q : {1, 2, 4}) at1(alpha, q) = at1(rate_paths, q).level.empty() ? 0.0 : at1(rate_paths, q).level[0];

  auto view = [&]() {
    FlowView v;
    v.green = green;
    for (int q = 1; q <= kQueues; ++q) at1(v.positive, q) = at1(x, q) > kEmptyTol;
    v.alpha = alpha;
    at1(v.alpha, 3) = beta_of(v, 1, H);
    return v;
  };

  // One-sided limits around an event instant: x is continuous, so the side
  // of an emptiness/NEP-start event is carried by the NEP status, not by
  // the instantaneous content (which is 0 on both sides).
  auto limit_view = [&](const std::array<bool, 4>& nep) {
    FlowView v;
    v.green = green;
    for (int q = 1; q <= kQueues; ++q) at1(v.positive, q) = at1(nep, q) || at1(x, q) > kEmptyTol;
    v.alpha = alpha;
    at1(v.alpha, 3) = beta_of(v, 1, H);
    return v;
  };

  trace.alpha0 = view().alpha;

  std::vector<EventRecord> pending;
  auto emit = [&](EventKind kind, int q, std::uint32_t tag = 0) {
    EventRecord rec;
    rec.time = t;
    rec.kind = kind;
    rec.queue = q;
    rec.h = at1(H, q);
    rec.seq = tag;
    pending.push_back(rec);
  };
  auto finalize_instant = [&](const FlowView& pre) {
    const FlowView post = limit_view(in_nep);
    for (auto& rec : pending) {
      const int q = rec.queue;
      rec.alpha_minus = at1(pre.alpha, q);
      rec.alpha_plus = at1(post.alpha, q);
      rec.beta_minus = beta_of(pre, q, H);
      rec.beta_plus = beta_of(post, q, H);
      rec.x = x;
      trace.events.push_back(rec);
    }
    pending.clear();
  };

  auto open_neps = [&](const FlowView& pre) {
    // NEP starts induced by whatever just changed the drifts.
    bool any = false;
    for (int q = 1; q <= kQueues; ++q) {
      if (!at1(in_nep, q) && at1(x, q) <= kEmptyTol) {
        FlowView v = view();
        at1(v.positive, q) = false;
        if (drift_of(v, q, H) > kRateTol) {
          at1(in_nep, q) = true;
          at1(nep_start, q) = t;
          emit(EventKind::NepStart, q);
          any = true;
        }
      }
    }
    if (any) finalize_instant(pre);
    else pending.clear();
  };

  // Queues already filling at t=0 (x(0)=0 by construction).
  {
    const FlowView pre = view();
    open_neps(pre);
  }

  const std::size_t iter_cap = 10'000'000;
  std::size_t iter = 0;
  while (t < T) {
    if (++iter > iter_cap) throw std::runtime_error("fluid event loop stalled");
    const FlowView cur = view();
    std::array<double, 4> drift{};
    for (int q = 1; q <= kQueues; ++q) at1(drift, q) = drift_of(cur, q, H);

    double t_next = std::min({T, sw_time[0], sw_time[1]});
    for (int q : {1, 2, 4}) {
      const auto& path = at1(rate_paths, q);
      const std::size_t pos = at1(rate_pos, q);
      if (pos < path.start.size()) t_next = std::min(t_next, path.start[pos]);
    }
    std::array<double, 4> empty_at{kInf, kInf, kInf, kInf};
    for (int q = 1; q <= kQueues; ++q) {
      if (at1(x, q) > kEmptyTol && at1(drift, q) < -kRateTol) {
        at1(empty_at, q) = t + at1(x, q) / (-at1(drift, q));
        t_next = std::min(t_next, at1(empty_at, q));
      }
    }

    const double dt = t_next - t;
    for (int q = 1; q <= kQueues; ++q) {
      const double x_new = std::max(0.0, at1(x, q) + at1(drift, q) * dt);
      at1(integral, q) += 0.5 * (at1(x, q) + x_new) * dt;
      double inflow = at1(cur.alpha, q);
      at1(inflow_vol, q) += inflow * dt;
      at1(outflow_vol, q) += beta_of(cur, q, H) * dt;
      at1(x, q) = x_new;
    }
    t = t_next;
    if (t >= T) break;

    const FlowView pre = limit_view(in_nep);
    // Tie-break at one instant: rate changes, emptiness, G2R, R2G, induced S.
    for (int q : {1, 2, 4}) {
      const auto& path = at1(rate_paths, q);
      auto& pos = at1(rate_pos, q);
      while (pos < path.start.size() && path.start[pos] == t) {
        at1(alpha, q) = path.level[pos];
        emit(EventKind::RateChange, q);
        ++pos;
      }
    }
    for (int q = 1; q <= kQueues; ++q) {
      if (at1(empty_at, q) == t) {
        at1(x, q) = 0.0;
        at1(in_nep, q) = false;
        emit(EventKind::NepEnd, q);
        at1(out.neps, q).push_back({at1(nep_start, q), t, false});
        at1(nep_start, q) = -1.0;
      }
    }
    for (int i : {1, 2}) {
      if (sw_time[static_cast<std::size_t>(i - 1)] == t) {
        const int g = i == 1 ? (at1(green, 1) ? 1 : 2) : (at1(green, 3) ? 3 : 4);
        const int s = perpendicular(g);
        ++seq;
        emit(EventKind::GreenToRed, g, seq);
        emit(EventKind::RedToGreen, s, seq);
        at1(green, g) = false;
        at1(green, s) = true;
        sw_time[static_cast<std::size_t>(i - 1)] += cfg.theta(s);
      }
    }
    finalize_instant(pre);
    {
      const FlowView pre2 = limit_view(in_nep);
      open_neps(pre2);
    }
  }

  for (int q = 1; q <= kQueues; ++q) {
    if (at1(nep_start, q) >= 0.0) at1(out.neps, q).push_back({at1(nep_start, q), T, true});
    at1(out.total_arrivals, q) = at1(inflow_vol, q);
    at1(out.total_departures, q) = at1(outflow_vol, q);
    at1(out.final_x, q) = at1(x, q);
  }

  {
    const FlowView end = view();
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
