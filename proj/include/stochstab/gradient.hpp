#pragma once

// Gradient flows h = -H' on the circle. With Gamma = 1 the stationary density is
// the Gibbs density c_eps exp(-2H/eps), which concentrates on the minima of H.

#include <optional>
#include <span>
#include <vector>

#include "stochstab/circle.hpp"
#include "stochstab/fields.hpp"

namespace stochstab {

struct Minimum {
  double location;
  double value;
  double curvature;
};

/// A periodic potential together with its nondegenerate local minima.
class PotentialField {
 public:
  /// Local minima of the samples, refined by a parabola through the three
  /// neighbouring samples. Throws InvalidInput for a degenerate minimum (H'' <= 0).
  explicit PotentialField(Field1d h);

  const Field1d& field() const noexcept { return h_; }
  const Grid1d& grid() const noexcept { return h_.grid(); }
  const std::vector<Minimum>& minima() const noexcept { return minima_; }
  /// Local maxima locations, refined the same way.
  const std::vector<double>& maxima() const noexcept { return maxima_; }
  /// Minima whose value is within roundoff of the lowest.
  std::vector<Minimum> global_minima() const;
  bool is_flat() const noexcept { return minima_.empty(); }

  /// H at an arbitrary x (rule value or trigonometric interpolant).
  double operator()(double x) const;

 private:
  Field1d h_;
  detail::Spectrum<double> spectrum_;
  std::vector<Minimum> minima_;
  std::vector<double> maxima_;
};

/// -H', spectral. Signed: vanishes at critical points.
Field1d gradient_drift(const PotentialField& h);

struct GibbsDensity {
  Density density;
  double epsilon;
  /// log c_eps in density = c_eps exp(-2H/eps).
  double log_normalizer;
};

/// Log-domain evaluation with the minimum subtracted. Throws PrecisionExhausted
/// when the peak is narrower than the grid can integrate (fewer than 16 samples
/// carry non-negligible weight); the message suggests a larger n.
GibbsDensity gibbs_density(const PotentialField& h, double eps);

/// Mass of the arc [a, b] (b - a <= 1), integrated from the exact exponential of H.
double arc_mass(const GibbsDensity& g, const PotentialField& h, double a, double b);

struct WellMass {
  double location;
  double mass;
};

/// Mass of the basin of every local minimum, basins separated at the local maxima.
std::vector<WellMass> well_masses(const GibbsDensity& g, const PotentialField& h);

struct ConcentrationRow {
  double epsilon;
  /// false when the grid could not resolve this eps
  bool resolved;
  double outside_mass;
  double eps_times_log_mass;
};

struct ConcentrationReport {
  double delta;
  double center;
  /// min of H on the ball boundary minus min H
  double delta_h;
  bool flat;
  std::vector<ConcentrationRow> rows;
  /// Not set for a flat potential.
  std::optional<bool> strictly_decreasing;
  /// eps log m within 20% of -2 delta_h at the smallest resolved eps.
  std::optional<bool> laplace_ok;

  bool passed() const noexcept { return strictly_decreasing.value_or(true) && laplace_ok.value_or(true); }
};

/// Outside-mass m(eps) = 1 - mu_eps([x* - delta, x* + delta]) around the global
/// minimum x*. Throws ModeError when H has several global minima, and
/// InvalidInput when another local minimum lies inside the ball.
ConcentrationReport concentration_study(const PotentialField& h, std::span<const double> eps_values, double delta);

}  // namespace stochstab
