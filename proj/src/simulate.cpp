#include "tlc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tlc/model.hpp"

namespace tlc {

void validate(const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
    throw std::invalid_argument("horizon must be > 0");
  }
  for (int q : {1, 2, 4}) {
    if (at1(cfg.alpha_bar, q) < 0.0 || !std::isfinite(at1(cfg.alpha_bar, q))) {
      throw std::invalid_argument("arrival rate for queue " + std::to_string(q) + " must be >= 0");
    }
  }
  for (int q = 1; q <= kQueues; ++q) {
    if (!(at1(cfg.service_rate, q) > 0.0)) {
      throw std::invalid_argument("service rate for queue " + std::to_string(q) + " must be > 0");
    }
    if (at1(cfg.weights, q) < 0.0) {
      throw std::invalid_argument("weight for queue " + std::to_string(q) + " must be >= 0");
    }
  }
  validate_theta(cfg.theta, cfg.bounds);
  const bool i1_ok = cfg.initial_green[0] == 1 || cfg.initial_green[0] == 2;
  const bool i2_ok = cfg.initial_green[1] == 3 || cfg.initial_green[1] == 4;
  if (!i1_ok || !i2_ok) {
    throw std::invalid_argument("initial_green must name one queue per intersection (1|2, 3|4)");
  }
  if (cfg.fluid.holding_time_mean <= 0.0) {
    throw std::invalid_argument("fluid holding_time_mean must be > 0");
  }
  if (cfg.fluid.level_scale < 0.0) {
    throw std::invalid_argument("fluid level_scale must be >= 0");
  }
}

SamplePathResult simulate(const SimConfig& cfg) {
  return cfg.backend == Backend::Discrete ? simulate_discrete(cfg) : simulate_fluid(cfg);
}

namespace {

double integrate_discrete_queue(const std::vector<double>& arr, const std::vector<double>& dep,
                                double horizon) {
  double integral = 0.0;
  double x = 0.0;
  double t_prev = 0.0;
  std::size_t ia = 0;
  std::size_t id = 0;
  for (;;) {
    const double ta = ia < arr.size() ? arr[ia] : horizon;
    const double td = id < dep.size() ? dep[id] : horizon;
    const double t = std::min({ta, td, horizon});
    integral += x * (t - t_prev);
    t_prev = t;
    if (t >= horizon && ta >= horizon && td >= horizon) break;
    // Departures first at a shared instant, mirroring the simulator.
    if (td == t && id < dep.size()) {
      x -= 1.0;
      ++id;
    } else if (ta == t && ia < arr.size()) {
      x += 1.0;
      ++ia;
    }
    if (x < 0.0) throw std::invalid_argument("trace streams are inconsistent (departure before arrival)");
  }
  return integral;
}

}  // namespace

double sample_cost(const Trace& trace, const std::array<double, 4>& weights, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (trace.horizon + 1e-12 < horizon) {
    throw std::invalid_argument("incomplete trace: covers only [0," + std::to_string(trace.horizon) +
                                "] of [0," + std::to_string(horizon) + "]");
  }
  double cost = 0.0;
  if (trace.backend == Backend::Discrete) {
    for (int q = 1; q <= kQueues; ++q) {
      cost += at1(weights, q) * integrate_discrete_queue(at1(trace.arrivals, q), at1(trace.departures, q), horizon);
    }
  } else {
    if (trace.events.empty() || trace.events.back().time + 1e-12 < horizon) {
      throw std::invalid_argument("incomplete trace: missing records up to the horizon");
    }
    // Piecewise-linear in every queue between records; every drift change
    // emits a record, so trapezoids over consecutive records are exact.
    std::array<double, 4> x_prev{};  // x(0) = 0
    double t_prev = 0.0;
    for (const auto& rec : trace.events) {
      const double t = std::min(rec.time, horizon);
      if (t < t_prev) throw std::invalid_argument("trace records are not time-ordered");
      for (int q = 1; q <= kQueues; ++q) {
        cost += at1(weights, q) * 0.5 * (at1(x_prev, q) + at1(rec.x, q)) * (t - t_prev);
      }
      x_prev = rec.x;
      t_prev = t;
      if (t >= horizon) break;
    }
  }
  return cost / horizon;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "time,kind,queue,alpha_minus,alpha_plus,beta_minus,beta_plus,h,x1,x2,x3,x4\n";
  char buf[352];
  for (const auto& rec : trace.events) {
    std::snprintf(buf, sizeof(buf),
                  "%.9f,%s,%d,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n", rec.time,
                  event_kind_name(rec.kind), rec.queue, rec.alpha_minus, rec.alpha_plus,
                  rec.beta_minus, rec.beta_plus, rec.h, rec.x[0], rec.x[1], rec.x[2], rec.x[3]);
    out << buf;
  }
}

}  // namespace tlc
