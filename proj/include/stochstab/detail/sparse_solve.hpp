#pragma once

#include <Eigen/Sparse>
#include <string>

namespace stochstab::detail {

struct SparseSolution {
  Eigen::VectorXd x;
  /// 1-norm condition estimate (Hager/Higham).
  double condition_estimate;
};

/// LU solve of a square sparse system. Throws SolverFailure when the factorization
/// fails or the condition estimate exceeds max_condition.
SparseSolution solve_sparse(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                            const std::string& context, double max_condition = 1e13);

}  // namespace stochstab::detail
