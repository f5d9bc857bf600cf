#pragma once

#include <cstdint>
#include <vector>

namespace tlc {

// Poisson arrival instants on [0, T), strictly increasing, reproducible
// from the seed.
std::vector<double> poisson_arrivals(double rate, double horizon, std::uint64_t seed);

// Piecewise-constant rate path for the fluid backend: level_[i] holds on
// [start[i], start[i+1]). start[0] == 0 always.
struct PiecewiseRate {
  std::vector<double> start;
  std::vector<double> level;

  // Right-continuous value at t; `left` selects the left limit instead.
  double at(double t, bool left = false) const;
};

struct FluidRateParams {
  double holding_time_mean = 50.0;  // mean of the exponential holding times
  double level_scale = 2.0;         // levels drawn uniformly from [0, level_scale * mean_rate]
  bool constant = false;            // hold the mean rate for the whole horizon
};

// Random piecewise-constant arrival-rate path with mean rate mean_rate.
PiecewiseRate fluid_rate_path(double mean_rate, double horizon, const FluidRateParams& params,
                              std::uint64_t seed);

}  // namespace tlc
