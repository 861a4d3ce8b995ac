#include "stochstab/torus.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <sstream>

#include "stochstab/detail/sparse_solve.hpp"

namespace stochstab {

namespace {

std::string format(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_eps(double eps, const char* what) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput(std::string(what) + ": eps must be positive");
}

Eigen::MatrixXd refine(const Field2d& f, Eigen::Index m) { return resample(Field2d(f.grid(), f.samples()), Grid2d(m)).samples(); }

double bilinear(const Eigen::MatrixXd& t, double x, double y) {
  const auto m = t.rows();
  const double sx = wrap_unit(x) * double(m);
  const double sy = wrap_unit(y) * double(m);
  const auto i = static_cast<Eigen::Index>(sx);
  const auto j = static_cast<Eigen::Index>(sy);
  const double fx = sx - double(i);
  const double fy = sy - double(j);
  const auto i1 = (i + 1) % m;
  const auto j1 = (j + 1) % m;
  return (1 - fx) * (1 - fy) * t(i % m, j % m) + fx * (1 - fy) * t(i1, j % m) + (1 - fx) * fy * t(i % m, j1) +
         fx * fy * t(i1, j1);
}

}  // namespace

TorusField2D::TorusField2D(Field2d h1, Field2d h2, std::string label)
    : h1_(std::move(h1)), h2_(std::move(h2)), label_(std::move(label)) {
  if (!(h1_.grid() == h2_.grid())) throw GridMismatch("TorusField2D: component grids differ");
  divergence_sup_ = (partial_x(h1_).samples() + partial_y(h2_).samples()).cwiseAbs().maxCoeff();
  if (divergence_sup_ > 1e-8) {
    throw DifferentiationError("TorusField2D: discrete divergence " + format(divergence_sup_) + " exceeds 1e-8");
  }
}

TorusField2D TorusField2D::from_stream(const StreamFunction2D& stream) {
  const Field2d& psi = stream.psi;
  Field2d psi_y = partial_y(psi);
  Field2d minus_psi_x(psi.grid(), -partial_x(psi).samples());
  const std::string label = psi.rule() ? "stream:" + psi.rule()->label() : "stream:samples";
  TorusField2D out(std::move(psi_y), std::move(minus_psi_x), label);
  out.stream_ = stream;
  if (!psi.rule()) {
    const auto m = 4 * psi.grid().size();
    out.fine1_ = refine(out.h1_, m);
    out.fine2_ = refine(out.h2_, m);
  }
  return out;
}

TorusField2D TorusField2D::constant(const Grid2d& grid, double a, double b) {
  std::ostringstream os;
  os.precision(17);
  os << "constant:" << a << "," << b;
  TorusField2D out(Field2d::constant(grid, a), Field2d::constant(grid, b), os.str());
  out.constant_ = Eigen::Vector2d(a, b);
  return out;
}

TorusField2D field_from_stream(const StreamFunction2D& stream) { return TorusField2D::from_stream(stream); }

Eigen::Vector2d TorusField2D::operator()(double x, double y) const {
  if (constant_) return *constant_;
  if (stream_ && stream_->psi.rule()) {
    const Rule2D& r = *stream_->psi.rule();
    return {r.dy(x, y), -r.dx(x, y)};
  }
  return {bilinear(fine1_, x, y), bilinear(fine2_, x, y)};
}

TorusField2D TorusField2D::resampled(const Grid2d& grid) const {
  if (grid == this->grid()) return *this;
  if (constant_) return constant(grid, (*constant_)[0], (*constant_)[1]);
  return from_stream(StreamFunction2D{resample(stream_->psi, grid)});
}

Drift2D TorusField2D::evaluator() const {
  const double max_abs = std::max(h1_.samples().cwiseAbs().maxCoeff(), h2_.samples().cwiseAbs().maxCoeff());
  return Drift2D{[self = *this](double x, double y) { return self(x, y); }, max_abs};
}

HomogeneousDiffusion2D::HomogeneousDiffusion2D(const Eigen::Matrix2d& gamma) : gamma_(gamma) {
  if (!gamma_.allFinite() || gamma_(0, 1) != gamma_(1, 0)) {
    throw InvalidInput("HomogeneousDiffusion2D: Gamma must be finite and symmetric");
  }
  if (Eigen::LLT<Eigen::Matrix2d>(gamma_).info() != Eigen::Success) {
    throw InvalidInput("HomogeneousDiffusion2D: Gamma must be positive definite");
  }
}

HomogeneousDiffusion2D HomogeneousDiffusion2D::diagonal(double g11, double g22) {
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  g(0, 0) = g11;
  g(1, 1) = g22;
  return HomogeneousDiffusion2D(g);
}

Density2D::Density2D(Field2d field, double mass_tolerance) : field_(std::move(field)) {
  if (!(field_.samples().minCoeff() > 0.0)) throw InvalidInput("Density2D: samples must be strictly positive");
  const double mass = integrate(field_);
  if (std::abs(mass - 1.0) > mass_tolerance) throw InvalidInput("Density2D: integral is " + format(mass));
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Appends the rows of the dx^2-scaled operator for every unknown except row 0.
// coeff(i, j, di, dj) returns the weight of neighbour (i+di, j+dj) in row (i, j).
template <typename Coeff>
Triplets assemble(Eigen::Index n, Coeff&& coeff) {
  Triplets t;
  t.reserve(std::size_t(9 * n * n));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = i + n * j;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const double w = coeff(i, j, di, dj);
          if (w == 0.0) continue;
          const Eigen::Index col = (i + di + n) % n + n * ((j + dj + n) % n);
          t.emplace_back(int(row), int(col), w);
        }
      }
    }
  }
  return t;
}

Triplets homogeneous_triplets(const TorusField2D& h, const HomogeneousDiffusion2D& gamma, double eps,
                              Eigen::Index n) {
  const TorusField2D hn = h.resampled(Grid2d(n));
  const Eigen::Matrix2d& g = gamma.matrix();
  const double dx = 1.0 / double(n);
  const double cxx = 0.5 * eps * g(0, 0);
  const double cyy = 0.5 * eps * g(1, 1);
  const double cxy = 0.5 * eps * 2.0 * g(0, 1) / 4.0;
  const auto& h1 = hn.h1().samples();
  const auto& h2 = hn.h2().samples();
  return assemble(n, [&](Eigen::Index i, Eigen::Index j, int di, int dj) {
    const double a = 0.5 * dx * h1(i, j);
    const double b = 0.5 * dx * h2(i, j);
    if (di == 0 && dj == 0) return -2.0 * cxx - 2.0 * cyy;
    if (dj == 0) return cxx - di * a;
    if (di == 0) return cyy - dj * b;
    return cxy * di * dj;
  });
}

Stationary2D solve_bordered(Triplets t, Eigen::Index n, double eps, const char* what) {
  const Eigen::Index size = n * n;
  Triplets kept;
  kept.reserve(t.size() + std::size_t(size));
  Eigen::SparseVector<double> row0(size);
  for (const auto& e : t) {
    if (e.row() == 0) {
      row0.coeffRef(e.col()) += e.value();
    } else {
      kept.push_back(e);
    }
  }
  for (Eigen::Index k = 0; k < size; ++k) kept.emplace_back(0, int(k), 1.0 / double(size));
  Eigen::SparseMatrix<double> a(size, size);
  a.setFromTriplets(kept.begin(), kept.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs[0] = 1.0;
  auto sol = detail::solve_sparse(a, rhs, what);
  Eigen::VectorXd rho = std::move(sol.x);

  const double replaced = std::abs(row0.dot(rho));
  if (replaced > 1e-8) {
    throw SolverFailure(std::string(what) + ": replaced row residual " + format(replaced) + " exceeds 1e-8",
                        sol.condition_estimate);
  }
  if (rho.minCoeff() < -1e-8) {
    throw SolverFailure(std::string(what) + ": negative density sample " + format(rho.minCoeff()),
                        sol.condition_estimate);
  }
  bool clamped = false;
  if (rho.minCoeff() <= 0.0) {
    rho = rho.cwiseMax(std::numeric_limits<double>::min());
    rho /= rho.mean();
    clamped = true;
  }
  Eigen::MatrixXd m = Eigen::Map<Eigen::MatrixXd>(rho.data(), n, n);
  return {Density2D(Field2d(Grid2d(n), std::move(m))), eps, sol.condition_estimate, replaced, clamped};
}

}  // namespace

Eigen::SparseMatrix<double> stationary_operator_2d(const TorusField2D& h, const HomogeneousDiffusion2D& gamma,
                                                   double eps, Eigen::Index n) {
  const Grid2d grid(n);
  const auto t = homogeneous_triplets(h, gamma, eps, grid.size());
  Eigen::SparseMatrix<double> a(n * n, n * n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

Stationary2D solve_stationary_fd_2d(const TorusField2D& h, const HomogeneousDiffusion2D& gamma, double eps,
                                    Eigen::Index n) {
  check_eps(eps, "solve_stationary_fd_2d");
  const Grid2d grid(n);
  return solve_bordered(homogeneous_triplets(h, gamma, eps, n), n, eps, "solve_stationary_fd_2d");
}

Stationary2D solve_stationary_fd_2d(const TorusField2D& h, const Field2d& gamma_scalar, double eps, Eigen::Index n) {
  check_eps(eps, "solve_stationary_fd_2d");
  const Grid2d grid(n);
  const TorusField2D hn = h.resampled(grid);
  const Eigen::MatrixXd g = resample(gamma_scalar, grid).samples();
  if (!(g.minCoeff() > 0.0)) throw InvalidInput("solve_stationary_fd_2d: Gamma must be strictly positive");
  const double dx = grid.spacing();
  const auto& h1 = hn.h1().samples();
  const auto& h2 = hn.h2().samples();
  auto t = assemble(n, [&](Eigen::Index i, Eigen::Index j, int di, int dj) {
    if (di != 0 && dj != 0) return 0.0;
    const double gn = g((i + di + n) % n, (j + dj + n) % n);
    if (di == 0 && dj == 0) return -2.0 * eps * gn;
    if (dj == 0) return 0.5 * eps * gn - di * 0.5 * dx * h1(i, j);
    return 0.5 * eps * gn - dj * 0.5 * dx * h2(i, j);
  });
  return solve_bordered(std::move(t), n, eps, "solve_stationary_fd_2d");
}

double l1_from_uniform(const Density2D& rho) { return (rho.samples().array() - 1.0).abs().mean(); }

RigidityVerdict rigidity_check(const TorusField2D& h, const HomogeneousDiffusion2D& gamma, double eps,
                               Eigen::Index n) {
  check_eps(eps, "rigidity_check");
  const Grid2d grid(n);
  const Eigen::Index size = n * n;
  auto t = homogeneous_triplets(h, gamma, eps, n);
  std::erase_if(t, [](const Eigen::Triplet<double>& e) { return e.row() == 0; });
  for (Eigen::Index k = 0; k < size; ++k) t.emplace_back(0, int(k), 1.0 / double(size));
  Eigen::SparseMatrix<double> a(size, size);
  a.setFromTriplets(t.begin(), t.end());

  RigidityVerdict v{eps, 0, 0, 0, 0, std::numeric_limits<double>::quiet_NaN(), false, {}};
  detail::SparseSolution sol;
  try {
    sol = detail::solve_sparse(a, Eigen::VectorXd::Zero(size), "rigidity_check");
  } catch (const SolverFailure& e) {
    v.condition_estimate = e.condition_estimate();
    v.message = std::string("discretization artifact: ") + e.what();
    return v;
  }
  v.condition_estimate = sol.condition_estimate;
  const Field2d r(grid, Eigen::Map<const Eigen::MatrixXd>(sol.x.data(), n, n));
  const TorusField2D hn = h.resampled(grid);
  const Eigen::MatrixXd rx = partial_x(r).samples();
  const Eigen::MatrixXd ry = partial_y(r).samples();
  const auto& rs = r.samples().array();
  v.r_l2 = norm_l2(r);
  v.r_sup = norm_sup(r);
  v.advective_energy =
      std::abs((hn.h1().samples().array() * rs * rx.array() + hn.h2().samples().array() * rs * ry.array()).mean());
  v.gradient_energy = (rx.array().square() + ry.array().square()).mean();
  v.passed = v.r_l2 <= 1e-8 && v.r_sup <= 1e-8 && v.advective_energy <= 1e-8 && v.gradient_energy <= 1e-8;
  v.message = v.passed ? "r = 0"
                       : "nonzero solution (|r|_sup = " + format(v.r_sup) + ", condition estimate " +
                             format(v.condition_estimate) + "): discretization artifact";
  return v;
}

std::vector<ZeroNoiseRow> zero_noise_probe_2d(const TorusField2D& h, const HomogeneousDiffusion2D& gamma,
                                              std::span<const double> eps_values, const SdeConfig& config,
                                              double tolerance) {
  const Drift2D drift = h.evaluator();
  std::vector<ZeroNoiseRow> rows;
  for (double eps : eps_values) {
    const auto m = occupation_measure_2d(drift, gamma.matrix(), eps, config);
    const double l1 = l1_to_uniform(m);
    rows.push_back({eps, l1, tolerance, l1 <= tolerance});
  }
  return rows;
}

}  // namespace stochstab
