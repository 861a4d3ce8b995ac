#include "stochstab/order.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "stochstab/errors.hpp"

namespace stochstab {

OrderFit fit_order(std::span<const double> eps, std::span<const double> metric) {
  if (eps.size() != metric.size()) throw InvalidInput("fit_order: eps and metric lengths differ");
  OrderFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(metric[i] > 0.0) || !(eps[i] > 0.0)) {
      fit.excluded.push_back(i);
      continue;
    }
    lx.push_back(std::log(eps[i]));
    ly.push_back(std::log(metric[i]));
  }
  if (lx.size() < 3) {
    throw InsufficientData("fit_order: need at least 3 positive (eps, metric) pairs, have " +
                           std::to_string(lx.size()));
  }
  const auto m = static_cast<Eigen::Index>(lx.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = lx[static_cast<std::size_t>(i)];
    rhs[i] = ly[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  fit.intercept = coef[0];
  fit.slope = coef[1];
  for (std::size_t i = 1; i < lx.size(); ++i) fit.interval_slopes.push_back((ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]));
  return fit;
}

OrderFit fit_order_or_exact(std::span<const double> eps, std::span<const double> metric) {
  if (!metric.empty() && std::all_of(metric.begin(), metric.end(), [](double v) { return v == 0.0; })) {
    OrderFit fit;
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    fit.exact = true;
    return fit;
  }
  return fit_order(eps, metric);
}

}  // namespace stochstab
