#include "tlc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "tlc/util.hpp"

namespace tlc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
}

double get_num(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw std::invalid_argument("field '" + key + "' must be a number");
  return j[key].get<double>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw std::invalid_argument("field '" + key + "' must be a boolean");
  return j[key].get<bool>();
}

std::array<double, 4> get_arr4(const json& j, const std::string& key, std::array<double, 4> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& a = j[key];
  if (!a.is_array() || a.size() != 4) throw std::invalid_argument("field '" + key + "' must be an array of 4 numbers");
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)].get<double>();
  return out;
}

SimConfig parse_sim(const json& j) {
  SimConfig sim;
  // Defaults follow the reference experiments: alpha=1/4, H=1, T=1000 s,
  // theta bounds [15, 40] s.
  if (j.is_null()) return sim;
  require_keys(j, "sim",
               {"horizon", "arrival_rates", "service_rates", "theta", "weights", "backend", "seed",
                "fluid", "initial_green", "theta_min", "theta_max"});
  sim.horizon = get_num(j, "horizon", sim.horizon);
  if (j.contains("arrival_rates")) {
    const auto& a = j["arrival_rates"];
    if (!a.is_array() || a.size() != 3) {
      throw std::invalid_argument("sim.arrival_rates must list 3 rates, for queues 1, 2 and 4");
    }
    at1(sim.alpha_bar, 1) = a[0].get<double>();
    at1(sim.alpha_bar, 2) = a[1].get<double>();
    at1(sim.alpha_bar, 4) = a[2].get<double>();
    at1(sim.alpha_bar, 3) = 0.0;
  }
  sim.service_rate = get_arr4(j, "service_rates", sim.service_rate);
  sim.theta.sec = get_arr4(j, "theta", sim.theta.sec);
  sim.weights = get_arr4(j, "weights", sim.weights);
  if (j.contains("backend")) {
    const std::string b = j["backend"].get<std::string>();
    if (b == "discrete") sim.backend = Backend::Discrete;
    else if (b == "fluid") sim.backend = Backend::Fluid;
    else throw std::invalid_argument("sim.backend must be 'discrete' or 'fluid'");
  }
  if (j.contains("seed")) sim.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("fluid")) {
    const auto& f = j["fluid"];
    require_keys(f, "sim.fluid", {"holding_time_mean", "level_scale", "constant"});
    sim.fluid.holding_time_mean = get_num(f, "holding_time_mean", sim.fluid.holding_time_mean);
    sim.fluid.level_scale = get_num(f, "level_scale", sim.fluid.level_scale);
    sim.fluid.constant = get_bool(f, "constant", sim.fluid.constant);
  }
  if (j.contains("initial_green")) {
    const auto& g = j["initial_green"];
    if (!g.is_array() || g.size() != 2) throw std::invalid_argument("sim.initial_green must list 2 queues");
    sim.initial_green = {g[0].get<int>(), g[1].get<int>()};
  }
  sim.bounds.lo = get_num(j, "theta_min", sim.bounds.lo);
  sim.bounds.hi = get_num(j, "theta_max", sim.bounds.hi);
  if (sim.bounds.hi < sim.bounds.lo) {
    throw std::invalid_argument("theta_max (" + std::to_string(sim.bounds.hi) +
                                ") must be >= theta_min (" + std::to_string(sim.bounds.lo) + ")");
  }
  return sim;
}

CouplingSpec parse_coupling(const json& j, const std::string& where) {
  CouplingSpec c;
  if (j.is_null()) return c;
  require_keys(j, where, {"T1", "T2"});
  if (!j.contains("T1") || !j.contains("T2")) {
    throw std::invalid_argument(where + ": both T1 and T2 are required");
  }
  c.enabled = true;
  c.total1 = j["T1"].get<double>();
  c.total2 = j["T2"].get<double>();
  return c;
}

OptimizerConfig parse_optimizer(const json& j, const SimConfig& sim) {
  OptimizerConfig opt;
  opt.theta0 = sim.theta;
  opt.bounds = sim.bounds;
  if (j.is_null()) return opt;
  require_keys(j, "optimizer",
               {"theta0", "step_c", "step_decay", "max_iters", "tolerance", "stable_iters",
                "paths_per_iter", "coupling"});
  opt.theta0.sec = get_arr4(j, "theta0", opt.theta0.sec);
  opt.step_c = get_num(j, "step_c", opt.step_c);
  opt.step_decay = get_num(j, "step_decay", opt.step_decay);
  opt.max_iters = static_cast<int>(get_num(j, "max_iters", opt.max_iters));
  opt.tolerance = get_num(j, "tolerance", opt.tolerance);
  opt.stable_iters = static_cast<int>(get_num(j, "stable_iters", opt.stable_iters));
  opt.paths_per_iter = static_cast<int>(get_num(j, "paths_per_iter", opt.paths_per_iter));
  if (j.contains("coupling")) opt.coupling = parse_coupling(j["coupling"], "optimizer.coupling");
  return opt;
}

GridSpec parse_grid(const json& j, const SimConfig& sim) {
  GridSpec grid;
  grid.lo = {sim.bounds.lo, sim.bounds.lo, sim.bounds.lo, sim.bounds.lo};
  grid.hi = {sim.bounds.hi, sim.bounds.hi, sim.bounds.hi, sim.bounds.hi};
  if (j.is_null()) return grid;
  require_keys(j, "grid", {"lo", "hi", "step", "reps", "coupling"});
  const std::array<double, 4> lo_fb = grid.lo;
  const std::array<double, 4> hi_fb = grid.hi;
  if (j.contains("lo") && j["lo"].is_number()) {
    grid.lo.fill(j["lo"].get<double>());
  } else {
    grid.lo = get_arr4(j, "lo", lo_fb);
  }
  if (j.contains("hi") && j["hi"].is_number()) {
    grid.hi.fill(j["hi"].get<double>());
  } else {
    grid.hi = get_arr4(j, "hi", hi_fb);
  }
  grid.step = get_num(j, "step", grid.step);
  grid.reps = static_cast<int>(get_num(j, "reps", grid.reps));
  if (j.contains("coupling")) grid.coupling = parse_coupling(j["coupling"], "grid.coupling");
  return grid;
}

RateEstimatorConfig parse_rate(const json& j) {
  RateEstimatorConfig rate;
  if (j.is_null()) return rate;
  require_keys(j, "rate_estimator", {"window", "direction", "known_service"});
  rate.window = get_num(j, "window", rate.window);
  if (!(rate.window > 0.0)) throw std::invalid_argument("rate_estimator.window must be > 0");
  if (j.contains("direction")) {
    const std::string d = j["direction"].get<std::string>();
    if (d == "before") rate.direction = RateEstimatorConfig::Direction::Before;
    else if (d == "after") rate.direction = RateEstimatorConfig::Direction::After;
    else if (d == "symmetric") rate.direction = RateEstimatorConfig::Direction::Symmetric;
    else throw std::invalid_argument("rate_estimator.direction must be before|after|symmetric");
  }
  rate.known_service = get_bool(j, "known_service", rate.known_service);
  return rate;
}

std::vector<double> get_list(const json& j, const std::string& key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_array() || j[key].empty()) throw std::invalid_argument("field '" + key + "' must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : j[key]) out.push_back(v.get<double>());
  return out;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

json spec_to_json(const ExperimentSpec& spec) {
  json j;
  j["recipe"] = spec.recipe;
  j["sim"] = {
      {"horizon", spec.sim.horizon},
      {"arrival_rates", {at1(spec.sim.alpha_bar, 1), at1(spec.sim.alpha_bar, 2), at1(spec.sim.alpha_bar, 4)}},
      {"service_rates", spec.sim.service_rate},
      {"theta", spec.sim.theta.sec},
      {"weights", spec.sim.weights},
      {"backend", spec.sim.backend == Backend::Discrete ? "discrete" : "fluid"},
      {"fluid",
       {{"holding_time_mean", spec.sim.fluid.holding_time_mean},
        {"level_scale", spec.sim.fluid.level_scale},
        {"constant", spec.sim.fluid.constant}}},
      {"initial_green", spec.sim.initial_green},
      {"theta_min", spec.sim.bounds.lo},
      {"theta_max", spec.sim.bounds.hi},
  };
  json opt = {
      {"theta0", spec.opt.theta0.sec},
      {"step_c", spec.opt.step_c},
      {"step_decay", spec.opt.step_decay},
      {"max_iters", spec.opt.max_iters},
      {"tolerance", spec.opt.tolerance},
      {"stable_iters", spec.opt.stable_iters},
      {"paths_per_iter", spec.opt.paths_per_iter},
  };
  if (spec.opt.coupling.enabled) {
    opt["coupling"] = {{"T1", spec.opt.coupling.total1}, {"T2", spec.opt.coupling.total2}};
  }
  j["optimizer"] = opt;
  json grid = {
      {"lo", spec.grid.lo},
      {"hi", spec.grid.hi},
      {"step", spec.grid.step},
      {"reps", spec.grid.reps},
  };
  if (spec.grid.coupling.enabled) {
    grid["coupling"] = {{"T1", spec.grid.coupling.total1}, {"T2", spec.grid.coupling.total2}};
  }
  j["grid"] = grid;
  const char* dir = "before";
  if (spec.opt.rate.direction == RateEstimatorConfig::Direction::After) dir = "after";
  if (spec.opt.rate.direction == RateEstimatorConfig::Direction::Symmetric) dir = "symmetric";
  j["rate_estimator"] = {
      {"window", spec.opt.rate.window},
      {"direction", dir},
      {"known_service", spec.opt.rate.known_service},
  };
  j["sweep"] = {{"T2_values", spec.sweep_total2}, {"r_values", spec.sweep_r}};
  j["fd"] = {{"delta", spec.fd_delta},
             {"mode", spec.fd_mode == FdMode::CommonRandomness ? "common-randomness" : "independent"}};
  j["reps"] = spec.reps;
  j["seed"] = spec.master_seed;
  j["out_dir"] = spec.out_dir;
  j["workers"] = spec.workers;
  j["run_id"] = spec.run_id;
  return j;
}

}  // namespace

const std::vector<std::string>& known_recipes() {
  static const std::vector<std::string> recipes = {
      "simulate", "gradient", "optimize", "brute-force", "fd-check", "sweep-T2", "sweep-arrival"};
  return recipes;
}

ExperimentSpec validate_spec_text(const std::string& text) {
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  json j = trimmed.empty() ? json::object() : json::parse(trimmed);

  require_keys(j, "spec",
               {"recipe", "sim", "optimizer", "grid", "rate_estimator", "sweep", "fd", "reps",
                "seed", "out_dir", "workers", "run_id",
                // manifest bookkeeping, accepted so manifests replay as specs
                "resolved", "outputs", "version", "status", "error"});

  ExperimentSpec spec;
  if (j.contains("recipe")) spec.recipe = j["recipe"].get<std::string>();
  const auto& recipes = known_recipes();
  if (std::find(recipes.begin(), recipes.end(), spec.recipe) == recipes.end()) {
    throw std::invalid_argument("unknown recipe '" + spec.recipe + "'");
  }
  spec.sim = parse_sim(j.contains("sim") ? j["sim"] : json());
  spec.opt = parse_optimizer(j.contains("optimizer") ? j["optimizer"] : json(), spec.sim);
  spec.grid = parse_grid(j.contains("grid") ? j["grid"] : json(), spec.sim);
  spec.opt.rate = parse_rate(j.contains("rate_estimator") ? j["rate_estimator"] : json());
  if (j.contains("sweep")) {
    require_keys(j["sweep"], "sweep", {"T2_values", "r_values"});
    spec.sweep_total2 = get_list(j["sweep"], "T2_values", spec.sweep_total2);
    spec.sweep_r = get_list(j["sweep"], "r_values", spec.sweep_r);
  }
  if (j.contains("fd")) {
    require_keys(j["fd"], "fd", {"delta", "mode"});
    spec.fd_delta = get_num(j["fd"], "delta", spec.fd_delta);
    if (!(spec.fd_delta > 0.0)) throw std::invalid_argument("fd.delta must be > 0");
    if (j["fd"].contains("mode")) {
      const std::string m = j["fd"]["mode"].get<std::string>();
      if (m == "common-randomness") spec.fd_mode = FdMode::CommonRandomness;
      else if (m == "independent") spec.fd_mode = FdMode::Independent;
      else throw std::invalid_argument("fd.mode must be common-randomness|independent");
    }
  }
  if (j.contains("reps")) spec.reps = j["reps"].get<int>();
  if (spec.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (j.contains("seed")) spec.master_seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out_dir")) spec.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("workers")) spec.workers = j["workers"].get<int>();
  if (j.contains("run_id")) spec.run_id = j["run_id"].get<std::string>();

  // Cross-field constraints.
  validate(spec.sim);
  validate(spec.opt);
  if (spec.recipe == "brute-force") validate(spec.grid, spec.sim.bounds);
  return spec;
}

ExperimentSpec validate_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return validate_spec_text(ss.str());
}

namespace {

struct CsvFile {
  std::ofstream out;
  std::string path;
  explicit CsvFile(const std::string& p) : out(p, std::ios::binary), path(p) {
    if (!out) throw std::runtime_error("cannot open output file: " + p);
  }
};

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 2;
}

ThetaVector coupled_midpoint(const CouplingSpec& c, const ThetaBounds& b) {
  auto pick = [&](double total) {
    const double lo = std::max(b.lo, total - b.hi);
    const double hi = std::min(b.hi, total - b.lo);
    if (lo > hi) throw std::invalid_argument("coupling total " + std::to_string(total) + " infeasible");
    return std::min(hi, std::max(lo, total / 2.0));
  };
  ThetaVector th;
  const double t1 = pick(c.total1);
  const double t3 = pick(c.total2);
  th.sec = {t1, c.total1 - t1, t3, c.total2 - t3};
  return th;
}

struct SweepPointResult {
  double key = 0.0;
  double theta1 = 0.0;
  double theta3 = 0.0;
  double cost = 0.0;
  double std_error = 0.0;
};

}  // namespace

RunOutcome run_experiment(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  if (spec.run_id.empty()) spec.run_id = timestamp_utc();
  RunOutcome outcome;

  fs::create_directories(spec.out_dir);
  auto out_path = [&](const std::string& stem) {
    return (fs::path(spec.out_dir) / (stem + "_" + spec.run_id + ".csv")).string();
  };
  const int workers = resolve_workers(spec.workers);

  json manifest = spec_to_json(spec);
  manifest["resolved"] = true;
  manifest["version"] = kVersion;
  manifest["status"] = "ok";

  try {
    if (spec.recipe == "simulate") {
      SimConfig sim = spec.sim;
      sim.seed = spec.master_seed;
      const SamplePathResult path = simulate(sim);
      CsvFile summary(out_path("simulate"));
      summary.out << "theta1,theta2,theta3,theta4,L,n_events,arrivals1,arrivals2,arrivals3,arrivals4,"
                     "departures1,departures2,departures3,departures4,x1_final,x2_final,x3_final,x4_final\n";
      summary.out << fmt(sim.theta(1)) << ',' << fmt(sim.theta(2)) << ',' << fmt(sim.theta(3)) << ','
                  << fmt(sim.theta(4)) << ',' << fmt(path.cost) << ',' << path.trace.events.size();
      for (int q = 1; q <= 4; ++q) summary.out << ',' << fmt(at1(path.total_arrivals, q));
      for (int q = 1; q <= 4; ++q) summary.out << ',' << fmt(at1(path.total_departures, q));
      for (int q = 1; q <= 4; ++q) summary.out << ',' << fmt(at1(path.final_x, q));
      summary.out << '\n';
      outcome.outputs.push_back(summary.path);

      CsvFile trace_file(out_path("simulate_trace"));
      write_trace_csv(trace_file.out, path.trace);
      outcome.outputs.push_back(trace_file.path);
    } else if (spec.recipe == "gradient") {
      CsvFile report(out_path("gradient"));
      report.out << "theta1,theta2,theta3,theta4,L,dL1,dL2,dL3,dL4,n_events,n_degenerate\n";
      GradientConfig gcfg;
      gcfg.weights = spec.sim.weights;
      gcfg.rate = spec.opt.rate;
      std::vector<std::string> rows(static_cast<std::size_t>(spec.reps));
      parallel_for(rows.size(), workers, [&](std::size_t r) {
        SimConfig sim = spec.sim;
        sim.seed = mix_seed(spec.master_seed, r);
        const SamplePathResult path = simulate(sim);
        const GradientResult grad = estimate_gradient(path.trace, gcfg);
        std::ostringstream row;
        row << fmt(sim.theta(1)) << ',' << fmt(sim.theta(2)) << ',' << fmt(sim.theta(3)) << ','
            << fmt(sim.theta(4)) << ',' << fmt(path.cost);
        for (int i = 1; i <= 4; ++i) row << ',' << fmt(at1(grad.dL, i));
        row << ',' << grad.n_events << ',' << grad.n_degenerate << '\n';
        rows[r] = row.str();
      });
      for (const auto& row : rows) report.out << row;
      outcome.outputs.push_back(report.path);
    } else if (spec.recipe == "optimize") {
      const OptimizationTrajectory traj = optimize(spec.sim, spec.opt, spec.master_seed);
      CsvFile csv(out_path("optimize"));
      csv.out << "k,theta1,theta2,theta3,theta4,J_hat,g1,g2,g3,g4,gamma_k\n";
      for (const auto& s : traj.steps) {
        csv.out << s.k;
        for (int i = 1; i <= 4; ++i) csv.out << ',' << fmt(s.theta(i));
        csv.out << ',' << fmt(s.cost_estimate);
        for (int i = 1; i <= 4; ++i) csv.out << ',' << fmt(at1(s.gradient, i));
        csv.out << ',' << fmt(s.gamma) << '\n';
      }
      outcome.outputs.push_back(csv.path);
      const CostEstimate final_cost =
          estimate_cost(spec.sim, traj.theta_star, spec.reps, mix_seed(spec.master_seed, 0xeffful), workers);
      manifest["result"] = {{"theta_star", traj.theta_star.sec},
                            {"J_star", final_cost.mean},
                            {"J_stderr", final_cost.std_error},
                            {"stop_reason", traj.stop_reason},
                            {"iterations", traj.steps.size()},
                            {"step_scale", traj.step_scale}};
    } else if (spec.recipe == "brute-force") {
      GridSpec grid = spec.grid;
      grid.reps = spec.grid.reps;
      const GridResult res = grid_search(spec.sim, grid, spec.master_seed, workers);
      CsvFile csv(out_path("brute-force"));
      csv.out << "theta1,theta2,theta3,theta4,J_mean,J_stderr,reps\n";
      for (const auto& p : res.table) {
        for (int i = 1; i <= 4; ++i) csv.out << (i == 1 ? "" : ",") << fmt(p.theta(i));
        csv.out << ',' << fmt(p.cost_mean) << ',' << fmt(p.cost_stderr) << ',' << grid.reps << '\n';
      }
      outcome.outputs.push_back(csv.path);
      manifest["result"] = {{"theta_bf", res.best.sec}, {"J_bf", res.best_cost}};
    } else if (spec.recipe == "fd-check") {
      SimConfig sim = spec.sim;
      sim.seed = spec.master_seed;
      const SamplePathResult path = simulate(sim);
      GradientConfig gcfg;
      gcfg.weights = sim.weights;
      gcfg.rate = spec.opt.rate;
      const GradientResult ipa = estimate_gradient(path.trace, gcfg);
      const FdGradient fd = finite_difference_gradient(sim, sim.theta, spec.fd_delta, spec.fd_mode);
      CsvFile csv(out_path("fd-check"));
      csv.out << "component,theta_i,ipa,fd,abs_diff,rel_err,one_sided,reordered_strict,reordered_structural\n";
      for (int i = 1; i <= 4; ++i) {
        const double a = at1(ipa.dL, i);
        const double b = at1(fd.component, i).value;
        const double diff = std::abs(a - b);
        const double rel = diff / std::max({std::abs(a), std::abs(b), 1e-12});
        csv.out << i << ',' << fmt(sim.theta(i)) << ',' << fmt(a) << ',' << fmt(b) << ',' << fmt(diff)
                << ',' << fmt(rel) << ',' << at1(fd.component, i).one_sided << ','
                << at1(fd.component, i).reordered_strict << ','
                << at1(fd.component, i).reordered_structural << '\n';
      }
      outcome.outputs.push_back(csv.path);
    } else if (spec.recipe == "sweep-T2" || spec.recipe == "sweep-arrival") {
      const bool over_total2 = spec.recipe == "sweep-T2";
      if (!spec.opt.coupling.enabled) {
        throw std::invalid_argument(spec.recipe + " requires optimizer.coupling (T1, T2)");
      }
      const std::vector<double>& points = over_total2 ? spec.sweep_total2 : spec.sweep_r;
      std::vector<SweepPointResult> results(points.size());
      parallel_for(points.size(), workers, [&](std::size_t p) {
        SimConfig sim = spec.sim;
        OptimizerConfig opt = spec.opt;
        if (over_total2) {
          opt.coupling.total2 = points[p];
        } else {
          at1(sim.alpha_bar, 1) = 1.0 / points[p];
        }
        opt.theta0 = coupled_midpoint(opt.coupling, opt.bounds);
        const OptimizationTrajectory traj = optimize(sim, opt, mix_seed(spec.master_seed, p));
        const CostEstimate cost = estimate_cost(sim, traj.theta_star, spec.reps,
                                                mix_seed(spec.master_seed, 0x5100u + p), 1);
        results[p] = {points[p], traj.theta_star(1), traj.theta_star(3), cost.mean, cost.std_error};
      });
      CsvFile csv(out_path(spec.recipe));
      csv.out << (over_total2 ? "T2" : "r") << ",theta1_star,theta3_star,J_star,J_stderr\n";
      for (const auto& r : results) {
        csv.out << fmt(r.key) << ',' << fmt(r.theta1) << ',' << fmt(r.theta3) << ',' << fmt(r.cost)
                << ',' << fmt(r.std_error) << '\n';
      }
      outcome.outputs.push_back(csv.path);
    } else {
      throw std::invalid_argument("unknown recipe '" + spec.recipe + "'");
    }
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["error"] = e.what();
    manifest["outputs"] = outcome.outputs;
    const auto mpath = (fs::path(spec.out_dir) / ("manifest_" + spec.run_id + ".json")).string();
    std::ofstream mf(mpath, std::ios::binary);
    mf << manifest.dump(2) << '\n';
    outcome.manifest_path = mpath;
    outcome.exit_code = 1;
    outcome.error = e.what();
    return outcome;
  }

  manifest["outputs"] = outcome.outputs;
  const auto mpath = (fs::path(spec.out_dir) / ("manifest_" + spec.run_id + ".json")).string();
  std::ofstream mf(mpath, std::ios::binary);
  mf << manifest.dump(2) << '\n';
  outcome.manifest_path = mpath;
  outcome.outputs.push_back(mpath);
  return outcome;
}

}  // namespace tlc
