// Command-line front end: tandem-tlc <recipe> --spec <file> [--seed N] [--out DIR] [--workers K]

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "tlc/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tandem traffic-light simulator, IPA gradient estimator and optimizer"};

  std::string recipe;
  std::string spec_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;

  app.add_option("recipe", recipe, "One of: simulate, gradient, optimize, brute-force, fd-check, sweep-T2, sweep-arrival")
      ->required();
  app.add_option("--spec", spec_path, "Experiment spec file (JSON); omit for defaults");
  app.add_option("--seed", seed, "Master seed override")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--workers", workers, "Bounded worker count for parallel recipes");

  CLI11_PARSE(app, argc, argv);

  try {
    tlc::ExperimentSpec spec = spec_path.empty() ? tlc::validate_spec_text("")
                                                 : tlc::validate_spec_file(spec_path);
    spec.recipe = recipe;
    if (seed_set) spec.master_seed = seed;
    if (!out_dir.empty()) spec.out_dir = out_dir;
    if (workers > 0) spec.workers = workers;

    const tlc::RunOutcome outcome = tlc::run_experiment(spec);
    if (outcome.exit_code != 0) {
      std::fprintf(stderr, "run failed: %s\n", outcome.error.c_str());
      std::fprintf(stderr, "partial outputs flagged in %s\n", outcome.manifest_path.c_str());
      return outcome.exit_code;
    }
    for (const auto& f : outcome.outputs) std::printf("wrote %s\n", f.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
