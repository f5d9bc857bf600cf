#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlc/grid.hpp"
#include "tlc/optimize.hpp"

namespace tlc {

inline constexpr const char* kVersion = "0.1.0";

// A fully resolved experiment: one recipe plus every sub-config it needs.
struct ExperimentSpec {
  std::string recipe = "simulate";
  SimConfig sim{};
  OptimizerConfig opt{};
  GridSpec grid{};
  std::vector<double> sweep_total2{36.0, 40.0, 44.0, 48.0, 52.0};
  std::vector<double> sweep_r{2.0, 3.0, 4.0, 5.0, 6.0};
  double fd_delta = 0.01;
  FdMode fd_mode = FdMode::CommonRandomness;
  int reps = 10;  // replications for gradient rows and cost estimates
  std::uint64_t master_seed = 1;
  std::string out_dir = ".";
  int workers = 0;  // 0 selects the hardware concurrency
  std::string run_id;  // empty: stamped at run time; manifests carry it for replay
};

const std::vector<std::string>& known_recipes();

// Parses a spec file (JSON; an empty file means all defaults), fills
// defaults, rejects unknown keys, and enforces cross-field constraints.
// Manifests emitted by run_experiment are accepted as specs and reproduce
// the original run bit-identically.
ExperimentSpec validate_spec_file(const std::string& path);
ExperimentSpec validate_spec_text(const std::string& text);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> outputs;  // files written, manifest last
  std::string manifest_path;
  std::string error;
};

// Executes the recipe, writing CSV outputs plus a manifest sufficient to
// re-run bit-identically.
RunOutcome run_experiment(const ExperimentSpec& spec);

}  // namespace tlc
