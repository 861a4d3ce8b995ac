#include "stochstab/detail/sparse_solve.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "stochstab/errors.hpp"

namespace stochstab::detail {

namespace {

using Lu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

double norm1(const Eigen::SparseMatrix<double>& a) {
  double best = 0.0;
  for (int j = 0; j < a.outerSize(); ++j) {
    double col = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

// Hager's estimate of ||A^{-1}||_1 from a handful of solves with A and A^T.
double inverse_norm1_estimate(Lu& lu, Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / double(n));
  double estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = lu.solve(x);
    estimate = y.lpNorm<1>();
    const Eigen::VectorXd sign = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = lu.transpose().solve(sign);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x[j] = 1.0;
  }
  return estimate;
}

}  // namespace

SparseSolution solve_sparse(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                            const std::string& context, double max_condition) {
  Eigen::SparseMatrix<double> m = a;
  m.makeCompressed();
  Lu lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) {
    throw SolverFailure(context + ": sparse LU factorization failed (" + lu.lastErrorMessage() + ")");
  }
  const double cond = norm1(m) * inverse_norm1_estimate(lu, m.rows());
  if (!std::isfinite(cond) || cond > max_condition) {
    std::ostringstream os;
    os << context << ": ill-conditioned system (1-norm condition estimate " << cond << ")";
    throw SolverFailure(os.str(), cond);
  }
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw SolverFailure(context + ": sparse LU solve failed", cond);
  }
  return {std::move(x), cond};
}

}  // namespace stochstab::detail
