#include "tlc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "tlc/util.hpp"

namespace tlc {

void validate(const GridSpec& grid, const ThetaBounds& bounds) {
  if (!(grid.step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  if (grid.reps < 1) throw std::invalid_argument("grid reps must be >= 1");
  for (int i = 1; i <= 4; ++i) {
    if (at1(grid.lo, i) > at1(grid.hi, i)) {
      throw std::invalid_argument("grid lo > hi for theta" + std::to_string(i));
    }
    if (at1(grid.lo, i) < bounds.lo || at1(grid.hi, i) > bounds.hi) {
      throw std::invalid_argument("grid range for theta" + std::to_string(i) + " outside the theta bounds");
    }
  }
}

namespace {

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> v;
  for (int k = 0;; ++k) {
    const double val = lo + k * step;
    if (val > hi + 1e-9) break;
    v.push_back(std::min(val, hi));
  }
  return v;
}

std::vector<ThetaVector> enumerate_grid(const GridSpec& grid) {
  std::vector<ThetaVector> points;
  if (grid.coupling.enabled) {
    const auto a1 = axis(at1(grid.lo, 1), at1(grid.hi, 1), grid.step);
    const auto a3 = axis(at1(grid.lo, 3), at1(grid.hi, 3), grid.step);
    for (double t1 : a1) {
      for (double t3 : a3) {
        ThetaVector th;
        th.sec = {t1, grid.coupling.total1 - t1, t3, grid.coupling.total2 - t3};
        points.push_back(th);
      }
    }
    return points;
  }
  const auto a1 = axis(at1(grid.lo, 1), at1(grid.hi, 1), grid.step);
  const auto a2 = axis(at1(grid.lo, 2), at1(grid.hi, 2), grid.step);
  const auto a3 = axis(at1(grid.lo, 3), at1(grid.hi, 3), grid.step);
  const auto a4 = axis(at1(grid.lo, 4), at1(grid.hi, 4), grid.step);
  for (double t1 : a1)
    for (double t2 : a2)
      for (double t3 : a3)
        for (double t4 : a4) {
          ThetaVector th;
          th.sec = {t1, t2, t3, t4};
          points.push_back(th);
        }
  return points;
}

}  // namespace

GridResult grid_search(const SimConfig& sim, const GridSpec& grid, std::uint64_t seed_bank,
                       int workers) {
  validate(grid, sim.bounds);
  const std::vector<ThetaVector> points = enumerate_grid(grid);
  if (points.empty()) throw std::invalid_argument("grid is empty");

  GridResult res;
  res.table.resize(points.size());
  parallel_for(points.size(), workers, [&](std::size_t p) {
    const CostEstimate est = estimate_cost(sim, points[p], grid.reps, seed_bank, 1);
    res.table[p] = {points[p], est.mean, est.std_error};
  });

  std::size_t best = 0;
  for (std::size_t p = 1; p < res.table.size(); ++p) {
    // Points are enumerated in lexicographic order, so strict < keeps the
    // lexicographically smallest theta on ties.
    if (res.table[p].cost_mean < res.table[best].cost_mean) best = p;
  }
  res.best = res.table[best].theta;
  res.best_cost = res.table[best].cost_mean;
  return res;
}

namespace {

bool same_strict_sequence(const Trace& a, const Trace& b) {
  if (a.events.size() != b.events.size()) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    if (a.events[i].kind != b.events[i].kind || a.events[i].queue != b.events[i].queue) return false;
  }
  return true;
}

bool same_structural_counts(const Trace& a, const Trace& b) {
  std::map<std::pair<int, int>, long> count;
  for (const auto& e : a.events) count[{static_cast<int>(e.kind), e.queue}] += 1;
  for (const auto& e : b.events) count[{static_cast<int>(e.kind), e.queue}] -= 1;
  for (const auto& [key, c] : count) {
    if (c != 0) return false;
  }
  return true;
}

}  // namespace

FdGradient finite_difference_gradient(const SimConfig& sim_base, const ThetaVector& theta,
                                      double delta, FdMode mode) {
  if (!(delta > 0.0)) throw std::invalid_argument("finite-difference delta must be > 0");
  FdGradient out;
  const auto paths = sim_base.backend == Backend::Fluid ? make_rate_paths(sim_base)
                                                        : std::array<PiecewiseRate, 4>{};

  auto run = [&](const ThetaVector& th, std::uint64_t seed) {
    SimConfig sim = sim_base;
    sim.theta = th;
    sim.seed = seed;
    if (sim.backend == Backend::Fluid && mode == FdMode::CommonRandomness) {
      return simulate_fluid(sim, paths);
    }
    return simulate(sim);
  };

  for (int i = 1; i <= 4; ++i) {
    ThetaVector up = theta;
    ThetaVector down = theta;
    double width = 2.0 * delta;
    FdComponent& comp = at1(out.component, i);
    if (theta(i) + delta > sim_base.bounds.hi) {
      up = theta;
      down.set(i, theta(i) - delta);
      width = delta;
      comp.one_sided = true;
    } else if (theta(i) - delta < sim_base.bounds.lo) {
      up.set(i, theta(i) + delta);
      down = theta;
      width = delta;
      comp.one_sided = true;
    } else {
      up.set(i, theta(i) + delta);
      down.set(i, theta(i) - delta);
    }
    const std::uint64_t seed_up =
        mode == FdMode::CommonRandomness ? sim_base.seed : mix_seed(sim_base.seed, 1000u + static_cast<std::uint64_t>(i));
    const std::uint64_t seed_down =
        mode == FdMode::CommonRandomness ? sim_base.seed : mix_seed(sim_base.seed, 2000u + static_cast<std::uint64_t>(i));
    const SamplePathResult hi = run(up, seed_up);
    const SamplePathResult lo = run(down, seed_down);
    comp.value = (hi.cost - lo.cost) / width;
    comp.reordered_strict = !same_strict_sequence(hi.trace, lo.trace);
    comp.reordered_structural = !same_structural_counts(hi.trace, lo.trace);
  }
  return out;
}

}  // namespace tlc
