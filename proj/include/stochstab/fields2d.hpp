#pragma once

// Periodic fields on the 2-torus [0,1)^2. samples(i, j) = f(x_i, y_j).

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "stochstab/detail/spectral.hpp"
#include "stochstab/fields.hpp"
#include "stochstab/errors.hpp"
#include "stochstab/rules.hpp"

namespace stochstab {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Uniform product grid with n points per axis (n even, >= 32).
template <typename Scalar = double>
class Grid2D {
 public:
  explicit Grid2D(Eigen::Index n) : n_(n) {
    if (n < 32 || n % 2 != 0) {
      throw InvalidInput("Grid2D: points per axis must be even and >= 32, got " + std::to_string(n));
    }
  }
  Eigen::Index size() const noexcept { return n_; }
  Scalar spacing() const noexcept { return Scalar(1) / Scalar(n_); }
  Scalar point(Eigen::Index i) const noexcept { return Scalar(i) / Scalar(n_); }
  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  Eigen::Index n_;
};

template <typename Scalar = double>
class PeriodicField2D {
 public:
  using Matrix = MatrixX<Scalar>;

  PeriodicField2D(Grid2D<Scalar> grid, Matrix samples, std::optional<Rule2D> rule = std::nullopt)
      : grid_(grid), samples_(std::move(samples)), rule_(std::move(rule)) {
    if (samples_.rows() != grid_.size() || samples_.cols() != grid_.size()) {
      throw InvalidInput("PeriodicField2D: sample matrix does not match the grid");
    }
    if (!samples_.allFinite()) throw InvalidInput("PeriodicField2D: non-finite sample");
  }

  static PeriodicField2D sample(const Grid2D<Scalar>& grid, const Rule2D& rule) {
    Matrix m(grid.size(), grid.size());
    for (Eigen::Index j = 0; j < grid.size(); ++j)
      for (Eigen::Index i = 0; i < grid.size(); ++i) m(i, j) = rule(grid.point(i), grid.point(j));
    return PeriodicField2D(grid, std::move(m), rule);
  }

  static PeriodicField2D constant(const Grid2D<Scalar>& grid, Scalar value) {
    return PeriodicField2D(grid, Matrix::Constant(grid.size(), grid.size(), value), Rule2D::constant(double(value)));
  }

  const Grid2D<Scalar>& grid() const noexcept { return grid_; }
  const Matrix& samples() const noexcept { return samples_; }
  const std::optional<Rule2D>& rule() const noexcept { return rule_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return samples_(i, j); }

 private:
  Grid2D<Scalar> grid_;
  Matrix samples_;
  std::optional<Rule2D> rule_;
};

using Grid2d = Grid2D<double>;
using Field2d = PeriodicField2D<double>;

namespace detail {

// Applies a 1-D spectral operation to every column (axis 0) or row (axis 1).
template <typename Scalar, typename Op>
MatrixX<Scalar> along_axis(const MatrixX<Scalar>& m, int axis, Op&& op) {
  MatrixX<Scalar> out(m.rows(), m.cols());
  if (axis == 0) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = op(VectorX<Scalar>(m.col(j)));
  } else {
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = op(VectorX<Scalar>(m.row(i).transpose())).transpose();
  }
  return out;
}

}  // namespace detail

/// Spectral partial derivative along x (axis 0) or y (axis 1).
template <typename Scalar>
PeriodicField2D<Scalar> partial(const PeriodicField2D<Scalar>& f, int axis) {
  auto d = detail::along_axis<Scalar>(f.samples(), axis, [](const VectorX<Scalar>& v) {
    auto c = detail::forward(v);
    detail::apply_derivative(c, 1);
    return detail::inverse(c);
  });
  return {f.grid(), std::move(d)};
}

template <typename Scalar>
PeriodicField2D<Scalar> partial_x(const PeriodicField2D<Scalar>& f) {
  return partial(f, 0);
}

template <typename Scalar>
PeriodicField2D<Scalar> partial_y(const PeriodicField2D<Scalar>& f) {
  return partial(f, 1);
}

template <typename Scalar>
Scalar integrate(const PeriodicField2D<Scalar>& f) {
  return f.samples().mean();
}

template <typename Scalar>
Scalar norm_sup(const PeriodicField2D<Scalar>& f) {
  return f.samples().cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar norm_l2(const PeriodicField2D<Scalar>& f) {
  using std::sqrt;
  return sqrt(f.samples().squaredNorm() / Scalar(f.samples().size()));
}

/// Rule sampling when a rule is recorded, spectral resize otherwise.
template <typename Scalar>
PeriodicField2D<Scalar> resample(const PeriodicField2D<Scalar>& f, const Grid2D<Scalar>& grid) {
  if (f.rule()) return PeriodicField2D<Scalar>::sample(grid, *f.rule());
  if (grid == f.grid()) return f;
  const auto m = grid.size();
  auto resize_vec = [m](const VectorX<Scalar>& v) { return detail::inverse(detail::resize(detail::forward(v), m)); };
  MatrixX<Scalar> cols(m, f.grid().size());
  for (Eigen::Index j = 0; j < f.grid().size(); ++j) cols.col(j) = resize_vec(VectorX<Scalar>(f.samples().col(j)));
  MatrixX<Scalar> out(m, m);
  for (Eigen::Index i = 0; i < m; ++i) out.row(i) = resize_vec(VectorX<Scalar>(cols.row(i).transpose())).transpose();
  return {grid, std::move(out)};
}

}  // namespace stochstab
