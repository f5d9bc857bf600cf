#pragma once

#include <cstdint>
#include <vector>

#include "tlc/optimize.hpp"
#include "tlc/simulate.hpp"

namespace tlc {

struct GridSpec {
  std::array<double, 4> lo{15.0, 15.0, 15.0, 15.0};
  std::array<double, 4> hi{40.0, 40.0, 40.0, 40.0};
  double step = 1.0;
  int reps = 10;
  CouplingSpec coupling{};  // when enabled the grid spans (theta1, theta3) only
};

void validate(const GridSpec& grid, const ThetaBounds& bounds);

struct GridPoint {
  ThetaVector theta{};
  double cost_mean = 0.0;
  double cost_stderr = 0.0;
};

struct GridResult {
  std::vector<GridPoint> table;
  ThetaVector best{};
  double best_cost = 0.0;
};

// Exhaustive evaluation of estimate_cost over the grid with one shared seed
// bank, so comparisons between points are paired. Ties break toward the
// lexicographically smallest theta.
GridResult grid_search(const SimConfig& sim, const GridSpec& grid, std::uint64_t seed_bank,
                       int workers = 1);

enum class FdMode { CommonRandomness, Independent };

struct FdComponent {
  double value = 0.0;
  bool one_sided = false;
  // Event-structure comparison of the two perturbed runs (fluid backend):
  bool reordered_strict = false;      // the (kind, queue) sequences differ
  bool reordered_structural = false;  // the per-(kind, queue) record counts differ
};

struct FdGradient {
  std::array<FdComponent, 4> component{};
  std::array<double, 4> values() const {
    return {component[0].value, component[1].value, component[2].value, component[3].value};
  }
};

// Central finite differences of the sample cost, one coordinate at a time
// (one-sided at the box boundary). CommonRandomness reuses the identical
// arrival realization / rate process across the perturbed runs.
FdGradient finite_difference_gradient(const SimConfig& sim, const ThetaVector& theta, double delta,
                                      FdMode mode);

}  // namespace tlc
