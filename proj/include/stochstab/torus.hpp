#pragma once

// Volume-preserving flows on the 2-torus under homogeneous diffusion. The
// stationary equation (eps/2) Gamma : grad grad rho - h . grad rho = 0 has the
// uniform density as its solution, and the constrained problem for r = rho - 1
// has only the trivial solution.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochstab/fields2d.hpp"
#include "stochstab/sde.hpp"
#include "stochstab/sde2d.hpp"

namespace stochstab {

struct StreamFunction2D {
  Field2d psi;
};

/// Drift (h1, h2) with sup |div h| <= 1e-8, built from a stream function or a constant.
class TorusField2D {
 public:
  /// h = (psi_y, -psi_x) with spectral partials. Throws DifferentiationError if the
  /// discrete divergence exceeds 1e-8.
  static TorusField2D from_stream(const StreamFunction2D& stream);
  /// h = (a, b): the lift of the non-periodic stream function a y - b x.
  static TorusField2D constant(const Grid2d& grid, double a, double b);

  const Field2d& h1() const noexcept { return h1_; }
  const Field2d& h2() const noexcept { return h2_; }
  const Grid2d& grid() const noexcept { return h1_.grid(); }
  double divergence_sup() const noexcept { return divergence_sup_; }
  const std::string& label() const noexcept { return label_; }

  /// Drift at an arbitrary point: analytic from the stream rule or constant, else
  /// bilinear on a fourfold spectral refinement.
  Eigen::Vector2d operator()(double x, double y) const;

  /// Same field on another grid (re-derived from the stream function).
  TorusField2D resampled(const Grid2d& grid) const;

  Drift2D evaluator() const;

 private:
  TorusField2D(Field2d h1, Field2d h2, std::string label);

  Field2d h1_;
  Field2d h2_;
  double divergence_sup_ = 0.0;
  std::string label_;
  std::optional<StreamFunction2D> stream_;
  std::optional<Eigen::Vector2d> constant_;
  Eigen::MatrixXd fine1_;
  Eigen::MatrixXd fine2_;
};

TorusField2D field_from_stream(const StreamFunction2D& stream);

/// Constant symmetric positive-definite diffusion matrix.
class HomogeneousDiffusion2D {
 public:
  explicit HomogeneousDiffusion2D(const Eigen::Matrix2d& gamma);
  static HomogeneousDiffusion2D identity() { return HomogeneousDiffusion2D(Eigen::Matrix2d::Identity()); }
  static HomogeneousDiffusion2D diagonal(double g11, double g22);

  const Eigen::Matrix2d& matrix() const noexcept { return gamma_; }

 private:
  Eigen::Matrix2d gamma_;
};

/// Positive samples with unit mean on a Grid2D.
class Density2D {
 public:
  explicit Density2D(Field2d field, double mass_tolerance = 1e-10);
  const Field2d& field() const noexcept { return field_; }
  const Eigen::MatrixXd& samples() const noexcept { return field_.samples(); }

 private:
  Field2d field_;
};

/// Central-difference (eps/2) Gamma : grad grad - h . grad on the n x n grid, rows
/// scaled by the squared spacing. Unknown (i, j) has index i + n j.
Eigen::SparseMatrix<double> stationary_operator_2d(const TorusField2D& h, const HomogeneousDiffusion2D& gamma,
                                                   double eps, Eigen::Index n);

struct Stationary2D {
  Density2D density;
  double epsilon;
  double condition_estimate;
  double replaced_row_residual;
  bool clamped = false;
};

/// Row 0 of the operator replaced by mean(rho) = 1; n even and >= 32.
Stationary2D solve_stationary_fd_2d(const TorusField2D& h, const HomogeneousDiffusion2D& gamma, double eps,
                                    Eigen::Index n);

/// Position-dependent scalar diffusion Gamma(x, y) * I with
/// (eps/2) Laplacian(Gamma rho) - h . grad rho. No uniform solution in general.
Stationary2D solve_stationary_fd_2d(const TorusField2D& h, const Field2d& gamma_scalar, double eps, Eigen::Index n);

/// mean |rho - 1| over the grid.
double l1_from_uniform(const Density2D& rho);

struct RigidityVerdict {
  double epsilon;
  double r_l2;
  double r_sup;
  /// |integral (h r) . grad r|
  double advective_energy;
  /// integral |grad r|^2
  double gradient_energy;
  double condition_estimate;
  bool passed;
  std::string message;
};

/// Solves the constrained system for r (zero right-hand side, zero mean) and
/// checks r together with both energy terms against 1e-8.
RigidityVerdict rigidity_check(const TorusField2D& h, const HomogeneousDiffusion2D& gamma, double eps, Eigen::Index n);

struct ZeroNoiseRow {
  double epsilon;
  double l1_to_uniform;
  double tolerance;
  bool passed;
};

std::vector<ZeroNoiseRow> zero_noise_probe_2d(const TorusField2D& h, const HomogeneousDiffusion2D& gamma,
                                              std::span<const double> eps_values, const SdeConfig& config,
                                              double tolerance = 0.05);

}  // namespace stochstab
