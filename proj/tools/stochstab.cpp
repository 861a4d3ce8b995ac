// Command-line entry point: stochstab <solve|converge|simulate|gradflow|torus> [options]
//
// Options may also come from a flat TOML/INI file given with --config; flags on
// the command line override file values and unknown keys are rejected.
//
// Exit status: 0 all checks passed, 1 a check failed, 2 invalid configuration,
// 3 a solver or I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "stochstab/experiment.hpp"

int main(int argc, char** argv) {
  using namespace stochstab;
  CLI::App app{"Stationary densities and stochastic stability of perturbed flows on the circle and torus",
               "stochstab"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::int64_t burn_in = -1;
  std::string output = "out";

  app.add_option("--problem", cfg.problem, "Problem family")->required();
  app.add_option("--drift", cfg.drift, "Drift rule override, e.g. sin:2,1");
  app.add_option("--gamma", cfg.gamma, "Gamma rule override, e.g. cos:1,0.5");
  app.add_option("--potential", cfg.potential, "Potential rule override, e.g. cos:1,-1");
  app.add_option("--stream", cfg.stream, "Stream function rule or constant:a,b");
  app.add_option("--eps", cfg.eps, "Noise intensities")->delimiter(',')->required();
  app.add_option("--n", cfg.n, "Grid points (per axis on the torus)");
  app.add_option("--fd-n", cfg.fd_n, "FD grid sizes for the cross-solver check")->delimiter(',');
  app.add_option("--solver", cfg.solver, "quadrature or fd");
  app.add_option("--dt", cfg.dt, "SDE step");
  app.add_option("--steps", cfg.steps, "SDE steps per trajectory");
  app.add_option("--burn-in", burn_in, "Discarded steps (default 10%)");
  app.add_option("--trajectories", cfg.trajectories, "Ensemble size");
  app.add_option("--seed", cfg.seed, "Master seed");
  app.add_option("--bins", cfg.bins, "Histogram bins (per axis on the torus)");
  app.add_option("--threads", cfg.threads, "Worker threads, 0 for all cores");
  app.add_option("--scheme", cfg.scheme, "heun, ito-corrected or euler");
  app.add_option("--tolerance", cfg.tolerance, "L1 tolerance for Monte Carlo checks");
  app.add_option("--delta", cfg.delta, "Ball radius for the concentration study");
  app.add_option("--gamma-matrices", cfg.gamma_matrices, "Homogeneous Gamma as g11,g12,g22; repeat for several");
  app.add_option("--probe-steps", cfg.probe_steps, "Steps of the torus SDE probe (0 skips it)");
  app.add_flag("--contrast", cfg.contrast, "Also solve with position-dependent diffusion on the torus");
  app.add_option("--output", output, "Output directory");

  app.add_subcommand("solve", "Stationary density at one eps, with residual and optional FD cross-check");
  app.add_subcommand("converge", "Residual norms, bound certificates and log-log slopes over an eps family");
  app.add_subcommand("simulate", "SDE occupation measure against the stationary density");
  app.add_subcommand("gradflow", "Gibbs densities and concentration at the minima of a potential");
  app.add_subcommand("torus", "Uniformity and rigidity of volume-preserving flows on the 2-torus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.subcommand = parse_subcommand(app.get_subcommands().front()->get_name());
    if (burn_in >= 0) cfg.burn_in = burn_in;
    cfg.output = output;
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto manifest = run(cfg);
    std::printf("%s: %s (%zu artifacts in %s)\n", to_string(cfg.subcommand), manifest.passed ? "passed" : "FAILED",
                manifest.artifacts.size(), cfg.output.string().c_str());
    for (const auto& f : manifest.failures) std::printf("  failed: %s\n", f.c_str());
    return manifest.passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
