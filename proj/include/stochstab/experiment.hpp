#pragma once

// Experiment orchestration behind the command-line tool: a validated config,
// a registry of named problem families, and a run that writes CSV tables, a
// JSON summary and a manifest with SHA-256 digests.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochstab/errors.hpp"

namespace stochstab {

/// A library error raised inside a named stage of a run.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what) : Error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

enum class Subcommand { solve, converge, simulate, gradflow, torus };

const char* to_string(Subcommand s) noexcept;
Subcommand parse_subcommand(const std::string& name);

struct ProblemFamily {
  std::string name;
  /// "circle", "gradient" or "torus"
  std::string domain;
  std::string drift;
  std::string gamma;
  std::string potential;
  /// Stream-function rule, or "constant:a,b" for a constant torus field.
  std::string stream;
  std::string description;
};

/// circle-sine, circle-sine-vargamma, circle-constant, gradient-cosine,
/// gradient-double-well, gradient-flat, torus-irrational, torus-cellular, torus-still.
const std::vector<ProblemFamily>& problem_registry();
const ProblemFamily& find_problem(const std::string& name);

struct ExperimentConfig {
  Subcommand subcommand = Subcommand::solve;
  std::string problem;
  /// Rule overrides; empty means the family default.
  std::string drift;
  std::string gamma;
  std::string potential;
  std::string stream;

  std::vector<double> eps;
  /// Grid points (per axis on the torus); 0 picks 512 on the circle, 64 on the torus.
  int n = 0;
  /// Finite-difference grid sizes for the cross-solver check of `solve`.
  std::vector<int> fd_n;
  std::string solver = "quadrature";

  double dt = 1e-3;
  std::int64_t steps = 1'000'000;
  std::optional<std::int64_t> burn_in;
  int trajectories = 16;
  std::uint64_t seed = 1;
  int bins = 64;
  int threads = 0;
  std::string scheme = "heun";
  double tolerance = 0.05;

  double delta = 0.25;

  /// Homogeneous diffusion matrices "g11,g12,g22", one per entry.
  std::vector<std::string> gamma_matrices{"1,0,1"};
  /// Steps of the optional torus SDE probe; 0 skips it.
  std::int64_t probe_steps = 0;
  bool contrast = false;

  std::filesystem::path output = "out";

  /// Throws ConfigError: unknown family, family/subcommand mismatch, bad rules,
  /// out-of-range numbers.
  void validate() const;

  int grid_points() const;
};

struct ArtifactRecord {
  std::string file;
  std::string sha256;
  std::uintmax_t bytes;
};

struct RunManifest {
  std::string version;
  std::vector<ArtifactRecord> artifacts;
  std::map<std::string, double> timings;
  bool passed = false;
  std::vector<std::string> failures;
};

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Validates, creates the output directory, runs the experiment and writes the
/// artifacts; manifest.json last. `passed` is true iff every asserted check held.
RunManifest run(const ExperimentConfig& config);

extern const char* const kVersion;

}  // namespace stochstab
