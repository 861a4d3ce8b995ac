#pragma once

// Periodic calculus on uniform grids over the unit circle [0,1).
//
// Fields are dense Eigen vectors templated on the scalar type. Derivatives
// and antiderivatives are Fourier-collocation; integrals are the periodic
// trapezoid rule (the sample mean), which is spectrally accurate for smooth
// periodic integrands.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "stochstab/detail/spectral.hpp"
#include "stochstab/errors.hpp"
#include "stochstab/rules.hpp"

namespace stochstab {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform grid x_i = i/n, i = 0..n-1, on the unit circle. n is even and >= 8.
template <typename Scalar = double>
class Grid1D {
 public:
  explicit Grid1D(Eigen::Index n) : n_(n) {
    if (n < 8 || n % 2 != 0) {
      throw InvalidInput("Grid1D: point count must be even and >= 8, got " + std::to_string(n));
    }
  }

  Eigen::Index size() const noexcept { return n_; }
  Scalar spacing() const noexcept { return Scalar(1) / Scalar(n_); }

  // A single rounded quotient, so x_{2i} on a 2n grid equals x_i here bit-for-bit.
  Scalar point(Eigen::Index i) const noexcept { return Scalar(i) / Scalar(n_); }

  VectorX<Scalar> points() const {
    VectorX<Scalar> x(n_);
    for (Eigen::Index i = 0; i < n_; ++i) x[i] = point(i);
    return x;
  }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  Eigen::Index n_;
};

/// Smooth periodic scalar function sampled on a Grid1D.
template <typename Scalar = double>
class PeriodicField1D {
 public:
  using Vector = VectorX<Scalar>;

  PeriodicField1D(Grid1D<Scalar> grid, Vector samples, std::optional<Rule1D> rule = std::nullopt)
      : grid_(grid), samples_(std::move(samples)), rule_(std::move(rule)) {
    if (samples_.size() != grid_.size()) {
      throw InvalidInput("PeriodicField1D: " + std::to_string(samples_.size()) + " samples for a grid of " +
                         std::to_string(grid_.size()));
    }
    if (!samples_.allFinite()) throw InvalidInput("PeriodicField1D: non-finite sample");
  }

  static PeriodicField1D sample(const Grid1D<Scalar>& grid, const Rule1D& rule) {
    Vector v(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = rule(grid.point(i));
    return PeriodicField1D(grid, std::move(v), rule);
  }

  static PeriodicField1D constant(const Grid1D<Scalar>& grid, Scalar value) {
    return PeriodicField1D(grid, Vector::Constant(grid.size(), value), Rule1D::constant(double(value)));
  }

  /// Samples an arbitrary callable; no rule is recorded.
  template <typename F>
  static PeriodicField1D generate(const Grid1D<Scalar>& grid, F&& f) {
    Vector v(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = f(grid.point(i));
    return PeriodicField1D(grid, std::move(v));
  }

  const Grid1D<Scalar>& grid() const noexcept { return grid_; }
  const Vector& samples() const noexcept { return samples_; }
  const std::optional<Rule1D>& rule() const noexcept { return rule_; }
  Eigen::Index size() const noexcept { return samples_.size(); }
  Scalar operator[](Eigen::Index i) const { return samples_[i]; }

 private:
  Grid1D<Scalar> grid_;
  Vector samples_;
  std::optional<Rule1D> rule_;
};

using Grid1d = Grid1D<double>;
using Field1d = PeriodicField1D<double>;

template <typename Scalar>
void require_same_grid(const PeriodicField1D<Scalar>& a, const PeriodicField1D<Scalar>& b, const char* what) {
  if (!(a.grid() == b.grid())) {
    throw GridMismatch(std::string(what) + ": grids of size " + std::to_string(a.grid().size()) + " and " +
                       std::to_string(b.grid().size()) + " differ");
  }
}

// Pointwise arithmetic. Results carry no generator rule.

template <typename Scalar>
PeriodicField1D<Scalar> operator+(const PeriodicField1D<Scalar>& a, const PeriodicField1D<Scalar>& b) {
  require_same_grid(a, b, "operator+");
  return {a.grid(), a.samples() + b.samples()};
}

template <typename Scalar>
PeriodicField1D<Scalar> operator-(const PeriodicField1D<Scalar>& a, const PeriodicField1D<Scalar>& b) {
  require_same_grid(a, b, "operator-");
  return {a.grid(), a.samples() - b.samples()};
}

template <typename Scalar>
PeriodicField1D<Scalar> operator*(const PeriodicField1D<Scalar>& a, const PeriodicField1D<Scalar>& b) {
  require_same_grid(a, b, "operator*");
  return {a.grid(), a.samples().cwiseProduct(b.samples())};
}

template <typename Scalar>
PeriodicField1D<Scalar> operator*(Scalar s, const PeriodicField1D<Scalar>& a) {
  return {a.grid(), s * a.samples()};
}

template <typename Scalar>
PeriodicField1D<Scalar> operator/(const PeriodicField1D<Scalar>& a, const PeriodicField1D<Scalar>& b) {
  require_same_grid(a, b, "operator/");
  return {a.grid(), a.samples().cwiseQuotient(b.samples())};
}

template <typename Scalar>
Scalar min_sample(const PeriodicField1D<Scalar>& f) {
  return f.samples().minCoeff();
}

template <typename Scalar>
Scalar max_sample(const PeriodicField1D<Scalar>& f) {
  return f.samples().maxCoeff();
}

/// Fourier-collocation derivative of the given order (spectrally accurate).
template <typename Scalar>
PeriodicField1D<Scalar> differentiate(const PeriodicField1D<Scalar>& f, int order = 1) {
  if (order < 0) throw InvalidInput("differentiate: negative order");
  if (order == 0) return f;
  auto c = detail::forward(f.samples());
  detail::apply_derivative(c, order);
  return {f.grid(), detail::inverse(c)};
}

/// Second-order central differences, kept for cross-validation of the spectral route.
template <typename Scalar>
PeriodicField1D<Scalar> differentiate_fd(const PeriodicField1D<Scalar>& f) {
  const auto n = f.size();
  const Scalar inv2h = Scalar(n) / Scalar(2);
  VectorX<Scalar> d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) * inv2h;
  return {f.grid(), std::move(d)};
}

/// Integral over the circle: periodic trapezoid rule.
template <typename Scalar>
Scalar integrate(const PeriodicField1D<Scalar>& f) {
  return f.samples().mean();
}

template <typename Scalar>
Scalar norm_l2(const PeriodicField1D<Scalar>& f) {
  using std::sqrt;
  return sqrt(f.samples().squaredNorm() / Scalar(f.size()));
}

template <typename Scalar>
Scalar norm_sup(const PeriodicField1D<Scalar>& f) {
  return f.samples().cwiseAbs().maxCoeff();
}

/// Trigonometric-interpolant value at an arbitrary point; exact rule value when one is recorded.
template <typename Scalar>
Scalar evaluate(const PeriodicField1D<Scalar>& f, Scalar x) {
  if (f.rule()) return (*f.rule())(x);
  return detail::evaluate(detail::forward(f.samples()), x);
}

/// Samples f on another grid: from the rule when present, otherwise by spectral
/// zero-padding or truncation.
template <typename Scalar>
PeriodicField1D<Scalar> resample(const PeriodicField1D<Scalar>& f, const Grid1D<Scalar>& grid) {
  if (f.rule()) return PeriodicField1D<Scalar>::sample(grid, *f.rule());
  if (grid == f.grid()) return f;
  return {grid, detail::inverse(detail::resize(detail::forward(f.samples()), grid.size()))};
}

/// F(x) = integral of f from 0 to x. F is periodic only when the integral of f
/// over the circle vanishes; `increment` is that integral.
template <typename Scalar = double>
class CumulativeIntegral1D {
 public:
  CumulativeIntegral1D(Grid1D<Scalar> grid, Scalar increment, detail::Spectrum<Scalar> periodic_part)
      : grid_(grid), increment_(increment), periodic_part_(std::move(periodic_part)) {
    const auto p = detail::inverse(periodic_part_);
    values_ = (p.array() - p[0]).matrix() + increment_ * grid_.points();
  }

  const Grid1D<Scalar>& grid() const noexcept { return grid_; }
  const VectorX<Scalar>& values() const noexcept { return values_; }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }
  Scalar increment() const noexcept { return increment_; }

  bool periodic(Scalar tolerance = Scalar(100) * std::numeric_limits<Scalar>::epsilon()) const {
    using std::abs;
    const Scalar scale = std::max(Scalar(1), values_.cwiseAbs().maxCoeff());
    return abs(increment_) <= tolerance * scale;
  }

  /// F at an arbitrary x (not reduced mod 1), spectrally accurate.
  Scalar at(Scalar x) const {
    return increment_ * x + detail::evaluate(periodic_part_, x) - detail::evaluate(periodic_part_, Scalar(0));
  }

 private:
  Grid1D<Scalar> grid_;
  Scalar increment_;
  detail::Spectrum<Scalar> periodic_part_;
  VectorX<Scalar> values_;
};

/// Spectral antiderivative. Exact for trigonometric polynomials resolved by the
/// grid (a cumulative trapezoid sum is only second-order accurate).
template <typename Scalar>
CumulativeIntegral1D<Scalar> cumulative_integral(const PeriodicField1D<Scalar>& f) {
  const auto c = detail::forward(f.samples());
  return {f.grid(), c[0].real(), detail::antiderivative_periodic_part(c)};
}

/// Drift h of a nonsingular flow on the circle. A drift that is negative
/// everywhere is stored negated (coordinate reversal) and flagged.
template <typename Scalar = double>
class FlowField1D {
 public:
  explicit FlowField1D(PeriodicField1D<Scalar> drift) : drift_(drift), field_(std::move(drift)) {
    const Scalar lo = min_sample(field_);
    const Scalar hi = max_sample(field_);
    if (lo <= Scalar(0) && hi >= Scalar(0)) {
      throw NonsingularityViolation("FlowField1D: drift vanishes or changes sign (min " + std::to_string(double(lo)) +
                                    ", max " + std::to_string(double(hi)) + ")");
    }
    if (hi < Scalar(0)) {
      negated_ = true;
      std::optional<Rule1D> rule;
      if (field_.rule()) rule = field_.rule()->scaled(-1.0);
      field_ = PeriodicField1D<Scalar>(field_.grid(), -field_.samples(), std::move(rule));
    }
    alpha_ = min_sample(field_);
  }

  /// Oriented drift, strictly positive.
  const PeriodicField1D<Scalar>& field() const noexcept { return field_; }
  /// Drift as supplied (negative when negated() is set).
  const PeriodicField1D<Scalar>& drift() const noexcept { return drift_; }
  const Grid1D<Scalar>& grid() const noexcept { return field_.grid(); }
  /// min over grid samples of the oriented drift.
  Scalar alpha() const noexcept { return alpha_; }
  bool negated() const noexcept { return negated_; }

 private:
  PeriodicField1D<Scalar> drift_;
  PeriodicField1D<Scalar> field_;
  Scalar alpha_{};
  bool negated_ = false;
};

/// Diffusion coefficient Gamma = gamma^2, strictly positive.
template <typename Scalar = double>
class DiffusionCoeff1D {
 public:
  explicit DiffusionCoeff1D(PeriodicField1D<Scalar> gamma_sq) : gamma_sq_(std::move(gamma_sq)) {
    if (!(min_sample(gamma_sq_) > Scalar(0))) {
      throw InvalidInput("DiffusionCoeff1D: Gamma must be strictly positive (min " +
                         std::to_string(double(min_sample(gamma_sq_))) + ")");
    }
  }

  const PeriodicField1D<Scalar>& field() const noexcept { return gamma_sq_; }
  const Grid1D<Scalar>& grid() const noexcept { return gamma_sq_.grid(); }

  /// True when Gamma is constant to within roundoff (Gamma' identically zero).
  bool is_constant() const {
    const Scalar scale = std::max(Scalar(1), norm_sup(gamma_sq_));
    return (max_sample(gamma_sq_) - min_sample(gamma_sq_)) <= Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale;
  }

 private:
  PeriodicField1D<Scalar> gamma_sq_;
};

using Flow1d = FlowField1D<double>;
using Diffusion1d = DiffusionCoeff1D<double>;

}  // namespace stochstab
