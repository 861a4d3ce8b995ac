#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

namespace stochstab::detail {

/// Gauss-Legendre rule on [0,1]: nodes in (0,1), weights summing to 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes, squared first
/// eigenvector components the weights.
inline GaussRule gauss_legendre(int points) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussRule rule;
  for (int i = 0; i < points; ++i) {
    rule.nodes.push_back(0.5 * (es.eigenvalues()[i] + 1.0));
    const double v = es.eigenvectors()(0, i);
    rule.weights.push_back(v * v);
  }
  return rule;
}

inline const GaussRule& gauss_legendre_unit() {
  static const GaussRule rule = gauss_legendre(8);
  return rule;
}

}  // namespace stochstab::detail
