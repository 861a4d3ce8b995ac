#pragma once

// Empirical convergence order: least-squares slope of log(metric) against log(eps).

#include <span>
#include <vector>

namespace stochstab {

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Slope between consecutive valid points, in input order.
  std::vector<double> interval_slopes;
  /// Indices of pairs dropped because the metric was not positive.
  std::vector<std::size_t> excluded;
  /// Set when every metric is exactly zero; slope and intercept are then NaN.
  bool exact = false;
};

/// Fits log(metric) = intercept + slope * log(eps). Nonpositive metrics are
/// excluded and listed; fewer than 3 valid pairs throws InsufficientData.
OrderFit fit_order(std::span<const double> eps, std::span<const double> metric);

/// As fit_order, but an all-zero metric family yields an `exact` fit instead of an error.
OrderFit fit_order_or_exact(std::span<const double> eps, std::span<const double> metric);

}  // namespace stochstab
