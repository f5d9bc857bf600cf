#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "tlc/rate_process.hpp"
#include "tlc/types.hpp"

namespace tlc {

struct SimConfig {
  double horizon = 1000.0;
  // Mean arrival rates for queues 1, 2, 4 (veh/s); queue 3 receives queue
  // 1's departures, so its slot is ignored.
  std::array<double, 4> alpha_bar{0.25, 0.25, 0.0, 0.25};
  std::array<double, 4> service_rate{1.0, 1.0, 1.0, 1.0};  // H_n
  ThetaVector theta{};
  std::array<double, 4> weights{1.0, 1.0, 1.0, 1.0};
  Backend backend = Backend::Discrete;
  std::uint64_t seed = 1;
  FluidRateParams fluid{};
  std::array<int, 2> initial_green{1, 3};
  ThetaBounds bounds{};
};

// Throws std::invalid_argument naming the offending field.
void validate(const SimConfig& cfg);

struct SamplePathResult {
  double cost = 0.0;  // L = (1/T) sum_n w_n int x_n dt
  std::array<std::vector<Nep>, 4> neps;
  Trace trace;
  // Discrete backend: exact vehicle counts. Fluid backend: flow volumes.
  std::array<double, 4> total_arrivals{};
  std::array<double, 4> total_departures{};
  std::array<double, 4> final_x{};
};

// Generates one sample path with the configured backend. Deterministic
// given (cfg, cfg.seed).
SamplePathResult simulate(const SimConfig& cfg);

SamplePathResult simulate_discrete(const SimConfig& cfg);

// Fluid backend; rate_paths may be supplied to reuse one realization across
// runs at different theta (common random numbers). Entries are indexed by
// queue-1 offsets 0,1,3; index 2 is ignored.
SamplePathResult simulate_fluid(const SimConfig& cfg);
SamplePathResult simulate_fluid(const SimConfig& cfg, const std::array<PiecewiseRate, 4>& rate_paths);

std::array<PiecewiseRate, 4> make_rate_paths(const SimConfig& cfg);

// Re-integrates the queue trajectories carried by the trace: piecewise
// linear between records for the fluid backend, piecewise constant from the
// arrival/departure streams for the discrete backend. Rejects traces that
// do not cover [0, horizon].
double sample_cost(const Trace& trace, const std::array<double, 4>& weights, double horizon);

// Line-delimited trace export:
// time,kind,queue,alpha_minus,alpha_plus,beta_minus,beta_plus,h,x1,x2,x3,x4
void write_trace_csv(std::ostream& out, const Trace& trace);

}  // namespace tlc
