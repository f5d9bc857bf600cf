#include "tlc/rate_process.hpp"

#include <stdexcept>

#include "tlc/util.hpp"

namespace tlc {

std::vector<double> poisson_arrivals(double rate, double horizon, std::uint64_t seed) {
  if (rate < 0.0) throw std::invalid_argument("arrival rate must be >= 0");
  std::vector<double> times;
  if (rate == 0.0 || horizon <= 0.0) return times;
  times.reserve(static_cast<std::size_t>(rate * horizon * 1.2) + 8);
  Rng rng(seed);
  double t = rng.exponential_mean(1.0 / rate);
  while (t < horizon) {
    times.push_back(t);
    t += rng.exponential_mean(1.0 / rate);
  }
  return times;
}

double PiecewiseRate::at(double t, bool left) const {
  if (start.empty()) return 0.0;
  // Index of the last breakpoint at or before t (strictly before for left limits).
  std::size_t lo = 0;
  std::size_t hi = start.size();
  while (lo + 1 < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const bool before = left ? (start[mid] < t) : (start[mid] <= t);
    if (before) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (left && start[lo] >= t && lo == 0) return level[0];
  return level[lo];
}

PiecewiseRate fluid_rate_path(double mean_rate, double horizon, const FluidRateParams& params,
                              std::uint64_t seed) {
  if (mean_rate < 0.0) throw std::invalid_argument("mean rate must be >= 0");
  if (params.holding_time_mean <= 0.0) throw std::invalid_argument("holding time mean must be > 0");
  PiecewiseRate path;
  if (params.constant || mean_rate == 0.0) {
    path.start.push_back(0.0);
    path.level.push_back(mean_rate);
    return path;
  }
  Rng rng(seed);
  double t = 0.0;
  while (t < horizon) {
    path.start.push_back(t);
    path.level.push_back(rng.uniform(0.0, params.level_scale * mean_rate));
    t += rng.exponential_mean(params.holding_time_mean);
  }
  return path;
}

}  // namespace tlc
