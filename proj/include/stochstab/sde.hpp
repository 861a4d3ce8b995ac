#pragma once

// Monte Carlo side: the Stratonovich SDE dx = h dt + sqrt(eps) gamma o dW on the
// circle, integrated with a Heun predictor-corrector, and the occupation measure
// of an ensemble of trajectories.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stochstab/circle.hpp"
#include "stochstab/fields.hpp"

namespace stochstab {

struct SdeConfig {
  double dt = 1e-3;
  std::int64_t n_steps = 1'000'000;
  /// Discarded initial steps; 10% of n_steps when unset.
  std::optional<std::int64_t> burn_in;
  int n_trajectories = 16;
  std::uint64_t seed = 1;
  int bins = 64;
  /// Worker threads; 0 picks the hardware concurrency. Never affects results.
  int threads = 0;

  std::int64_t effective_burn_in() const noexcept { return burn_in.value_or(n_steps / 10); }
  std::int64_t recorded_steps() const noexcept { return n_steps - effective_burn_in(); }

  /// Throws ConfigError on dt <= 0, burn_in outside [0, n_steps), bins < 16 or
  /// a non-positive ensemble size.
  void validate() const;
};

/// Seed of trajectory `index`: splitmix64 applied to master + (index + 1) * golden gamma.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Evaluates a periodic coefficient at arbitrary x: exactly through the generating
/// rule when one is recorded, otherwise by cubic interpolation of the field
/// spectrally upsampled eightfold.
class Coefficient1D {
 public:
  enum class Transform { value, sqrt, derivative };

  explicit Coefficient1D(const Field1d& f, Transform transform = Transform::value);

  double operator()(double x) const;
  double max_abs() const noexcept { return max_abs_; }
  bool is_constant() const noexcept { return constant_.has_value(); }

 private:
  std::optional<Rule1D> rule_;
  Transform transform_;
  std::optional<double> constant_;
  Eigen::VectorXd table_;
  double max_abs_ = 0.0;
};

/// Drift h and noise amplitude gamma = sqrt(Gamma), ready for stepping.
struct SdeCoefficients {
  SdeCoefficients(const Field1d& drift, const Diffusion1d& gamma);

  Coefficient1D h;
  Coefficient1D gamma;  // sqrt(Gamma)
  Coefficient1D gamma_sq_prime;
};

inline double wrap_unit(double x) noexcept {
  x -= std::floor(x);
  return x < 1.0 ? x : 0.0;
}

/// One Heun step with dW = sqrt(dt) * noise, wrapped into [0,1):
///   predictor  y = x + h(x) dt + sqrt(eps) gamma(x) dW
///   corrector  x+ = x + (h(x) + h(y)) dt / 2 + sqrt(eps) (gamma(x) + gamma(y)) dW / 2
double step_stratonovich_heun(double x, const SdeCoefficients& c, double eps, double dt, double noise);

/// Euler-Maruyama for the Ito form of the same Stratonovich equation,
/// drift h + (eps/4) Gamma'.
double step_ito_corrected_euler(double x, const SdeCoefficients& c, double eps, double dt, double noise);

/// Plain Euler-Maruyama with drift h. Targets the Ito equation, not the Stratonovich one.
double step_euler_maruyama(double x, const SdeCoefficients& c, double eps, double dt, double noise);

enum class Scheme { stratonovich_heun, ito_corrected_euler, euler_maruyama };

/// Normalized histogram over `bins` equal cells of [0,1).
struct OccupationMeasure {
  int bins = 0;
  std::vector<std::uint64_t> counts;
  Eigen::VectorXd masses;
  std::uint64_t sample_count = 0;
  /// dt times the number of recorded states, summed over the ensemble.
  double total_time = 0.0;

  double bin_width() const noexcept { return 1.0 / bins; }
  double bin_center(int b) const noexcept { return (b + 0.5) / bins; }
};

/// Runs the ensemble in parallel and merges integer counts in trajectory order,
/// so the result depends only on the inputs and the seed. Each trajectory starts
/// from a uniform draw of its own stream. Throws ConfigError when the config is
/// invalid or dt * max|h| > 0.1.
OccupationMeasure occupation_measure(const Field1d& drift, const Diffusion1d& gamma, double eps,
                                     const SdeConfig& config, Scheme scheme = Scheme::stratonovich_heun);

OccupationMeasure occupation_measure(const Flow1d& h, const Diffusion1d& gamma, double eps, const SdeConfig& config,
                                     Scheme scheme = Scheme::stratonovich_heun);

/// sum over bins of |histogram mass - density mass|.
double l1_distance(const OccupationMeasure& m, const Density& rho);
double l1_distance(const OccupationMeasure& a, const OccupationMeasure& b);

/// Integral of phi against the histogram, with phi averaged exactly over each bin.
double expectation(const OccupationMeasure& m, const Field1d& phi);
double expectation(const Density& rho, const Field1d& phi);

/// cos(2 pi k x), sin(2 pi k x) for k = 1..degree.
std::vector<Field1d> trig_test_functions(const Grid1d& grid, int degree = 8);

/// For each measure, max over test functions of |E_mu phi - E_ref phi|.
std::vector<double> weak_convergence_probe(std::span<const Density> measures, const Density& reference,
                                           std::span<const Field1d> test_functions);
std::vector<double> weak_convergence_probe(std::span<const OccupationMeasure> measures, const Density& reference,
                                           std::span<const Field1d> test_functions);

/// Gaps nonincreasing up to a 5% wiggle and the last at most a fifth of the first.
bool weak_decay_passes(std::span<const double> gaps);

/// Stationary density of the Stratonovich equation: the quadrature solution
/// with drift h + (eps/4) Gamma'. Proportional to Gamma^{-1/2} when h = 0.
StationarySolution stratonovich_density(const Field1d& drift, const Diffusion1d& gamma, double eps);

/// Stationary density of the Ito equation with the same coefficients (drift h).
/// Proportional to 1/Gamma when h = 0.
StationarySolution ito_density(const Field1d& drift, const Diffusion1d& gamma, double eps);

}  // namespace stochstab
