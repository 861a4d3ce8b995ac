#pragma once

// Stationary Fokker-Planck problem on the circle,
//
//   (eps/2) (Gamma rho)'' - (h rho)' = 0,   integral of rho = 1,
//
// solved by an integrating-factor quadrature (the reference solver) and by a
// second-order finite-difference null vector, plus the residual r = rho_eps - rho_0
// and the explicit O(eps) bounds on ||r||_2 and ||r'||_2.

#include <optional>
#include <span>
#include <vector>

#include "stochstab/fields.hpp"
#include "stochstab/order.hpp"

namespace stochstab {

/// Probability density on the circle: strictly positive samples, unit integral.
class Density {
 public:
  explicit Density(Field1d field, double mass_tolerance = 1e-10);

  /// Divides by the integral, then validates.
  static Density normalized(const Field1d& field);

  const Field1d& field() const noexcept { return field_; }
  const Grid1d& grid() const noexcept { return field_.grid(); }
  const Eigen::VectorXd& samples() const noexcept { return field_.samples(); }

 private:
  Field1d field_;
};

enum class SolverTag { quadrature, finite_difference };

const char* to_string(SolverTag tag) noexcept;

struct StationarySolution {
  Density density;
  double epsilon;
  /// The constant C in (eps/2)(Gamma rho)' - h rho = C, i.e. minus the probability flux.
  double flux_constant;
  SolverTag solver;
  /// Finite differences only: small negative samples were clamped.
  bool clamped = false;
  /// Finite differences only: 1-norm condition estimate of the bordered system.
  double condition_estimate = std::numeric_limits<double>::quiet_NaN();
};

/// rho_0 = c / h with c = 1 / integral(1/h).
Density unperturbed_density(const Flow1d& h);

/// Exact integrating-factor solution in the log domain.
///
/// With u = Gamma rho and B(x) = integral_0^x 2h/(eps Gamma), the periodic solution is
/// u(x) proportional to integral_x^{x+1} exp(B(x) - B(s)) ds. B is the spectral
/// antiderivative, each grid cell is integrated with 8-point Gauss-Legendre, and the
/// cell contributions are combined with log-sum-exp. Throws PrecisionExhausted when
/// eps is too small for the grid to resolve the integrating factor.
StationarySolution solve_stationary_quadrature(const Flow1d& h, const Diffusion1d& gamma, double eps);

/// Same, for a drift of either sign (gradient drifts, Stratonovich-corrected drifts).
StationarySolution solve_stationary_quadrature(const Field1d& drift, const Diffusion1d& gamma, double eps);

/// Cyclic second-order central differences for (eps/2) D2(Gamma rho) - D1(h rho),
/// one row replaced by the normalization mean(rho) = 1. h and Gamma are resampled
/// onto n points; n must be even and >= 64.
StationarySolution solve_stationary_fd(const Flow1d& h, const Diffusion1d& gamma, double eps, Eigen::Index n);

/// Same without the nonsingularity requirement on the drift.
StationarySolution solve_stationary_fd(const Field1d& drift, const Diffusion1d& gamma, double eps, Eigen::Index n);

/// Pointwise flux h rho - (eps/2)(Gamma rho)' with a spectral derivative.
Field1d flux_profile(const StationarySolution& sol, const Field1d& drift, const Diffusion1d& gamma);

/// stdev(flux) / |mean(flux)|; stdev relative to max |h rho| when the mean flux vanishes.
double flux_relative_spread(const StationarySolution& sol, const Field1d& drift, const Diffusion1d& gamma);

struct ResidualReport {
  double epsilon;
  Field1d residual;
  double l2;
  double deriv_l2;
  double sup;
  double zero_mean_defect;
};

/// r = rho_eps - rho_0 with its L2, derivative-L2, sup norms and |integral r|.
ResidualReport residual(const StationarySolution& sol, const Density& rho0);

struct BoundCertificate {
  double epsilon;
  double alpha;
  double beta;
  /// ||(Gamma rho_0)'||_2 and ||(Gamma rho_0)''||_2
  double norm_gp1;
  double norm_gp2;
  /// max over grid of Gamma' (0 when Gamma is constant)
  double max_gamma_prime;
  double eps_threshold_l2;
  double eps_threshold_h1;
  double l2_bound;
  double h1_bound;
  double l2_observed;
  double h1_observed;
  /// nullopt when eps is not below the corresponding threshold.
  std::optional<bool> l2_ok;
  std::optional<bool> h1_ok;

  bool l2_applicable() const noexcept { return l2_ok.has_value(); }
  bool h1_applicable() const noexcept { return h1_ok.has_value(); }
  /// Every applicable verdict holds.
  bool passed() const noexcept { return l2_ok.value_or(true) && h1_ok.value_or(true); }
};

/// Slack added to every bound to absorb discretization error.
inline double certificate_slack(double bound) noexcept { return 1e-8 + 1e-6 * bound; }

BoundCertificate certify_bounds(const Flow1d& h, const Diffusion1d& gamma, const Density& rho0,
                                const ResidualReport& report);

struct ConvergenceRow {
  double epsilon;
  double l2;
  double deriv_l2;
  double sup;
  double zero_mean_defect;
  double flux_spread;
  BoundCertificate certificate;
  /// sup |r| <= ||r'||_2 (mean-zero Poincare-Wirtinger on the unit circle, constant 1)
  bool poincare_ok;
};

struct ConvergenceReport {
  std::vector<double> eps_values;
  std::vector<ConvergenceRow> rows;
  OrderFit l2_fit;
  OrderFit deriv_fit;
  OrderFit sup_fit;

  bool certificates_passed() const;
  bool poincare_passed() const;
  bool sup_monotone() const;
};

/// Solves at every eps (concurrently; results in input order), certifies the bounds,
/// checks the Poincare-Wirtinger chain and fits log-log slopes. eps_values must be
/// strictly decreasing and below the L2 threshold; at least 3 values.
ConvergenceReport convergence_study(const Flow1d& h, const Diffusion1d& gamma, std::span<const double> eps_values);

/// Density mass of each of `bins` equal cells of [0,1), by spectral antiderivative.
Eigen::VectorXd bin_masses(const Density& rho, int bins);

}  // namespace stochstab
