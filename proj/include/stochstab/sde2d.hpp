#pragma once

// Heun integration of dX = h(X) dt + sqrt(eps) L dW on the 2-torus with a
// constant noise factor L (L L^T = Gamma), and its occupation histogram.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "stochstab/sde.hpp"

namespace stochstab {

struct Drift2D {
  std::function<Eigen::Vector2d(double, double)> eval;
  /// Largest component magnitude, for the dt * max|h| <= 0.1 guard.
  double max_abs = 0.0;
};

/// bins x bins histogram over [0,1)^2; masses(i, j) covers x-bin i, y-bin j.
struct OccupationMeasure2D {
  int bins = 0;
  Eigen::MatrixXd masses;
  std::uint64_t sample_count = 0;
  double total_time = 0.0;
};

/// config.bins is the bin count per axis. Same seeding and merge rules as the
/// circle version; deterministic for a fixed seed.
OccupationMeasure2D occupation_measure_2d(const Drift2D& h, const Eigen::Matrix2d& gamma, double eps,
                                          const SdeConfig& config);

/// sum over cells of |mass - 1/bins^2|.
double l1_to_uniform(const OccupationMeasure2D& m);

}  // namespace stochstab
