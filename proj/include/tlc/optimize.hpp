#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlc/ipa.hpp"
#include "tlc/simulate.hpp"

namespace tlc {

// Fixed total cycle per intersection: theta2 = T1 - theta1, theta4 = T2 - theta3.
struct CouplingSpec {
  bool enabled = false;
  double total1 = 0.0;  // T1
  double total2 = 0.0;  // T2
};

struct OptimizerConfig {
  ThetaVector theta0{};
  ThetaBounds bounds{15.0, 40.0};
  double step_c = 0.0;      // stepsize scale; <= 0 selects the auto scale
  double step_decay = 0.6;  // exponent p in gamma_k = c / (k+1)^p
  int max_iters = 100;
  double tolerance = 0.05;  // iterate-stability epsilon, seconds
  int stable_iters = 5;     // consecutive stable iterations to declare convergence
  int paths_per_iter = 1;   // gradient replications averaged per step
  CouplingSpec coupling{};
  RateEstimatorConfig rate{};
};

void validate(const OptimizerConfig& cfg);

struct IterateRecord {
  int k = 0;
  ThetaVector theta{};     // iterate the gradient was taken at
  double cost_estimate = 0.0;
  std::array<double, 4> gradient{};
  double gamma = 0.0;
};

struct OptimizationTrajectory {
  std::vector<IterateRecord> steps;
  ThetaVector theta_star{};
  std::string stop_reason;
  double step_scale = 0.0;  // resolved c
};

// One projected step theta - gamma_k * g clamped into the box; under
// coupling the free variables are (theta1, theta3) with chain-rule
// gradients (g1-g2, g3-g4) and the dependents recomputed from T1, T2.
ThetaVector sgd_step(const ThetaVector& theta, const std::array<double, 4>& g, int k,
                     const OptimizerConfig& cfg, double step_scale);

// Stochastic approximation driven by per-sample-path gradient estimates.
// Each iteration simulates paths_per_iter fresh sample paths at theta_k,
// averages their gradients and steps.
OptimizationTrajectory optimize(const SimConfig& sim, const OptimizerConfig& cfg,
                                std::uint64_t master_seed);

struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int reps = 0;
};

// Monte-Carlo mean of the sample cost over independent seeds.
CostEstimate estimate_cost(const SimConfig& sim, const ThetaVector& theta, int reps,
                           std::uint64_t seed_base, int workers = 1);

}  // namespace tlc
