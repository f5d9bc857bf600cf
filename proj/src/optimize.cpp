#include "tlc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tlc/util.hpp"

namespace tlc {

namespace {

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

// Feasible interval of the free variable when its partner is pinned to
// total - free inside the same box.
void coupled_range(const ThetaBounds& b, double total, double& lo, double& hi) {
  lo = std::max(b.lo, total - b.hi);
  hi = std::min(b.hi, total - b.lo);
  if (lo > hi) {
    throw std::invalid_argument("coupling total " + std::to_string(total) +
                                " is infeasible for bounds [" + std::to_string(b.lo) + "," +
                                std::to_string(b.hi) + "]");
  }
}

}  // namespace

void validate(const OptimizerConfig& cfg) {
  if (!(cfg.step_decay > 0.5) || !(cfg.step_decay <= 1.0)) {
    throw std::invalid_argument("step_decay must satisfy 0.5 < p <= 1");
  }
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (cfg.paths_per_iter < 1) throw std::invalid_argument("paths_per_iter must be >= 1");
  if (cfg.stable_iters < 1) throw std::invalid_argument("stable_iters must be >= 1");
  validate_theta(cfg.theta0, cfg.bounds);
  if (cfg.coupling.enabled) {
    double lo = 0.0;
    double hi = 0.0;
    coupled_range(cfg.bounds, cfg.coupling.total1, lo, hi);
    coupled_range(cfg.bounds, cfg.coupling.total2, lo, hi);
    const double s1 = cfg.theta0(1) + cfg.theta0(2);
    const double s2 = cfg.theta0(3) + cfg.theta0(4);
    if (std::abs(s1 - cfg.coupling.total1) > 1e-9 || std::abs(s2 - cfg.coupling.total2) > 1e-9) {
      throw std::invalid_argument("theta0 violates the coupling totals (theta1+theta2, theta3+theta4)");
    }
  }
}

ThetaVector sgd_step(const ThetaVector& theta, const std::array<double, 4>& g, int k,
                     const OptimizerConfig& cfg, double step_scale) {
  for (double gi : g) {
    if (!std::isfinite(gi)) throw std::domain_error("non-finite gradient estimate");
  }
  const double gamma = step_scale / std::pow(static_cast<double>(k + 1), cfg.step_decay);
  ThetaVector next = theta;
  if (!cfg.coupling.enabled) {
    for (int i = 1; i <= 4; ++i) {
      next.set(i, clamp(theta(i) - gamma * at1(g, i), cfg.bounds.lo, cfg.bounds.hi));
    }
    return next;
  }
  double lo1 = 0.0, hi1 = 0.0, lo3 = 0.0, hi3 = 0.0;
  coupled_range(cfg.bounds, cfg.coupling.total1, lo1, hi1);
  coupled_range(cfg.bounds, cfg.coupling.total2, lo3, hi3);
  const double t1 = clamp(theta(1) - gamma * (at1(g, 1) - at1(g, 2)), lo1, hi1);
  const double t3 = clamp(theta(3) - gamma * (at1(g, 3) - at1(g, 4)), lo3, hi3);
  next.set(1, t1);
  next.set(2, cfg.coupling.total1 - t1);
  next.set(3, t3);
  next.set(4, cfg.coupling.total2 - t3);
  return next;
}

OptimizationTrajectory optimize(const SimConfig& sim_base, const OptimizerConfig& cfg,
                                std::uint64_t master_seed) {
  validate(cfg);
  SimConfig sim = sim_base;
  sim.bounds = cfg.bounds;

  OptimizationTrajectory traj;
  ThetaVector theta = cfg.theta0;
  double step_scale = cfg.step_c;
  int stable = 0;
  traj.stop_reason = "max_iters";

  GradientConfig gcfg;
  gcfg.weights = sim.weights;
  gcfg.rate = cfg.rate;

  for (int k = 0; k < cfg.max_iters; ++k) {
    std::array<double, 4> g{};
    double cost = 0.0;
    for (int r = 0; r < cfg.paths_per_iter; ++r) {
      sim.theta = theta;
      sim.seed = mix_seed(master_seed, static_cast<std::uint64_t>(k) * 8191u + static_cast<std::uint64_t>(r));
      const SamplePathResult path = simulate(sim);
      const GradientResult grad = estimate_gradient(path.trace, gcfg);
      for (int i = 1; i <= 4; ++i) at1(g, i) += at1(grad.dL, i);
      cost += path.cost;
    }
    for (auto& gi : g) gi /= cfg.paths_per_iter;
    cost /= cfg.paths_per_iter;

    bool finite = true;
    for (double gi : g) finite = finite && std::isfinite(gi);
    if (!finite) {
      traj.stop_reason = "non-finite gradient at iteration " + std::to_string(k);
      break;
    }

    if (step_scale <= 0.0) {
      // Scale so the first step moves no coordinate more than 2 seconds.
      double gmax = 0.0;
      if (cfg.coupling.enabled) {
        gmax = std::max(std::abs(at1(g, 1) - at1(g, 2)), std::abs(at1(g, 3) - at1(g, 4)));
      } else {
        for (double gi : g) gmax = std::max(gmax, std::abs(gi));
      }
      step_scale = gmax > 0.0 ? 2.0 / gmax : 1.0;
    }

    const double gamma = step_scale / std::pow(static_cast<double>(k + 1), cfg.step_decay);
    traj.steps.push_back({k, theta, cost, g, gamma});

    const ThetaVector next = sgd_step(theta, g, k, cfg, step_scale);
    double move = 0.0;
    for (int i = 1; i <= 4; ++i) move = std::max(move, std::abs(next(i) - theta(i)));
    theta = next;
    if (move < cfg.tolerance) {
      if (++stable >= cfg.stable_iters) {
        traj.stop_reason = "converged";
        theta = next;
        break;
      }
    } else {
      stable = 0;
    }
  }
  traj.theta_star = theta;
  traj.step_scale = step_scale;
  return traj;
}

CostEstimate estimate_cost(const SimConfig& sim_base, const ThetaVector& theta, int reps,
                           std::uint64_t seed_base, int workers) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  std::vector<double> costs(static_cast<std::size_t>(reps), 0.0);
  parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t r) {
    SimConfig sim = sim_base;
    sim.theta = theta;
    sim.seed = mix_seed(seed_base, r);
    costs[r] = simulate(sim).cost;
  });
  CostEstimate est;
  est.reps = reps;
  for (double c : costs) est.mean += c;
  est.mean /= reps;
  if (reps > 1) {
    double ss = 0.0;
    for (double c : costs) ss += (c - est.mean) * (c - est.mean);
    est.std_error = std::sqrt(ss / (reps - 1.0) / reps);
  }
  return est;
}

}  // namespace tlc
