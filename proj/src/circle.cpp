#include "stochstab/circle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "stochstab/detail/quadrature.hpp"
#include "stochstab/detail/sparse_solve.hpp"

namespace stochstab {

namespace {

// Largest change of the log integrating factor across one grid cell that the
// 8-point Gauss-Legendre cell rule still integrates to full precision.
constexpr double kMaxCellJump = 30.0;
// exp() of anything below this underflows.
constexpr double kMaxLogRange = 700.0;

bool is_constant(const Eigen::VectorXd& v) { return v.maxCoeff() == v.minCoeff(); }

std::string format(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

StationarySolution uniform_solution(const Grid1d& grid, double eps, double h0, SolverTag tag) {
  // Constant drift and constant Gamma: rho = 1 exactly, flux h0.
  return {Density(Field1d::constant(grid, 1.0)), eps, -h0, tag};
}

void check_eps(double eps, const char* what) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidInput(std::string(what) + ": eps must be positive and finite, got " + format(eps));
  }
}

// log(sum(exp(terms))) over a row that is produced on the fly.
template <typename TermFn>
double log_sum_exp(Eigen::Index count, TermFn&& term) {
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m < count; ++m) hi = std::max(hi, term(m));
  double acc = 0.0;
  for (Eigen::Index m = 0; m < count; ++m) acc += std::exp(term(m) - hi);
  return hi + std::log(acc);
}

StationarySolution quadrature_core(const Field1d& drift, const Diffusion1d& gamma, double eps) {
  check_eps(eps, "solve_stationary_quadrature");
  require_same_grid(drift, gamma.field(), "solve_stationary_quadrature");
  const Grid1d& grid = drift.grid();
  const Eigen::Index n = grid.size();
  const Eigen::VectorXd& h = drift.samples();
  const Eigen::VectorXd& g = gamma.field().samples();

  if (is_constant(h) && is_constant(g)) return uniform_solution(grid, eps, h[0], SolverTag::quadrature);

  // B(x) = b_mean * x + P(x) - P(0), b = 2h / (eps Gamma).
  const Eigen::VectorXd b = (2.0 / eps) * h.cwiseQuotient(g);
  const auto spec = detail::forward(b);
  const double b_total = spec[0].real();
  const auto periodic = detail::antiderivative_periodic_part(spec);
  const Eigen::VectorXd p_grid = detail::inverse(periodic);
  const double p0 = p_grid[0];
  const double dx = grid.spacing();
  Eigen::VectorXd big_b(n);
  for (Eigen::Index j = 0; j < n; ++j) big_b[j] = b_total * grid.point(j) + p_grid[j] - p0;

  // Log of each cell integral, integral_{x_j}^{x_{j+1}} exp(B(x_j) - B(s)) ds.
  const auto& rule = detail::gauss_legendre_unit();
  const auto nodes = static_cast<Eigen::Index>(rule.nodes.size());
  Eigen::MatrixXd node_exponent(n, nodes);
  for (Eigen::Index q = 0; q < nodes; ++q) {
    const double theta = rule.nodes[static_cast<std::size_t>(q)];
    const Eigen::VectorXd p_shift = detail::shifted_values(periodic, theta);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double bq = b_total * (grid.point(j) + theta * dx) + p_shift[j] - p0;
      node_exponent(j, q) = big_b[j] - bq;
    }
  }
  double max_jump = node_exponent.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double next = (j + 1 < n) ? big_b[j + 1] : big_b[0] + b_total;
    max_jump = std::max(max_jump, std::abs(next - big_b[j]));
  }
  if (max_jump > kMaxCellJump) {
    const double safe = eps * max_jump / kMaxCellJump;
    throw PrecisionExhausted("solve_stationary_quadrature: eps = " + format(eps) + " is too small for n = " +
                                 std::to_string(n) + " (log integrating factor jumps by " + format(max_jump) +
                                 " across a cell); smallest safe eps is about " + format(safe),
                             safe);
  }
  Eigen::VectorXd log_cell(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    log_cell[j] = std::log(dx) + log_sum_exp(nodes, [&](Eigen::Index q) {
                    return std::log(rule.weights[static_cast<std::size_t>(q)]) + node_exponent(j, q);
                  });
  }

  // log G(x_i) = log sum_m exp(B(x_i) - B(x_{i+m}) + log_cell_{i+m}), B continued by +b_total per turn.
  Eigen::VectorXd log_rho(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double log_g = log_sum_exp(n, [&](Eigen::Index m) {
      const Eigen::Index k = i + m;
      const bool wrapped = k >= n;
      const Eigen::Index kk = wrapped ? k - n : k;
      return big_b[i] - (big_b[kk] + (wrapped ? b_total : 0.0)) + log_cell[kk];
    });
    log_rho[i] = log_g - std::log(g[i]);
  }

  const double top = log_rho.maxCoeff();
  const double range = top - log_rho.minCoeff();
  if (!std::isfinite(range) || range > kMaxLogRange) {
    const double safe = eps * range / kMaxLogRange;
    throw PrecisionExhausted("solve_stationary_quadrature: density spans e^" + format(range) +
                                 ", beyond double range; smallest safe eps is about " + format(safe),
                             safe);
  }
  Eigen::VectorXd rho = (log_rho.array() - top).exp().matrix();
  const double z = rho.mean();
  rho /= z;

  // u = Gamma rho = K G with K = exp(-top) / z, and C = (eps/2) K expm1(-b_total).
  double flux_constant = 0.0;
  if (b_total != 0.0) {
    const double em = std::expm1(-b_total);
    const double log_abs_em = b_total > 0.0 ? std::log(-em) : -b_total + std::log(-std::expm1(b_total));
    const double log_k = -top - std::log(z);
    flux_constant = (em > 0.0 ? 1.0 : -1.0) * 0.5 * eps * std::exp(log_abs_em + log_k);
  }
  return {Density(Field1d(grid, std::move(rho))), eps, flux_constant, SolverTag::quadrature};
}

StationarySolution fd_core(const Field1d& drift_in, const Diffusion1d& gamma_in, double eps, Eigen::Index n) {
  check_eps(eps, "solve_stationary_fd");
  if (n < 64 || n % 2 != 0) {
    throw InvalidInput("solve_stationary_fd: n must be even and >= 64, got " + std::to_string(n));
  }
  const Grid1d grid(n);
  const Field1d drift = resample(drift_in, grid);
  const Field1d gamma = resample(gamma_in.field(), grid);
  const Eigen::VectorXd& h = drift.samples();
  const Eigen::VectorXd& g = gamma.samples();
  const double dx = grid.spacing();

  // Rows scaled by dx^2: (eps/2)(G_{i+1} r_{i+1} - 2 G_i r_i + G_{i-1} r_{i-1}) - (dx/2)(h_{i+1} r_{i+1} - h_{i-1} r_{i-1}).
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(3 * n));
  auto row_entries = [&](Eigen::Index i) {
    const Eigen::Index ip = (i + 1) % n;
    const Eigen::Index im = (i + n - 1) % n;
    return std::array<std::pair<Eigen::Index, double>, 3>{
        std::pair{ip, 0.5 * eps * g[ip] - 0.5 * dx * h[ip]},
        std::pair{im, 0.5 * eps * g[im] + 0.5 * dx * h[im]},
        std::pair{i, -eps * g[i]},
    };
  };
  for (Eigen::Index i = 1; i < n; ++i) {
    for (const auto& [j, v] : row_entries(i)) entries.emplace_back(int(i), int(j), v);
  }
  for (Eigen::Index j = 0; j < n; ++j) entries.emplace_back(0, int(j), 1.0 / double(n));
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[0] = 1.0;

  auto sol = detail::solve_sparse(a, rhs, "solve_stationary_fd");
  Eigen::VectorXd rho = std::move(sol.x);

  double replaced = 0.0;
  for (const auto& [j, v] : row_entries(0)) replaced += v * rho[j];
  if (std::abs(replaced) > 1e-8) {
    throw SolverFailure("solve_stationary_fd: replaced row residual " + format(replaced) + " exceeds 1e-8",
                        sol.condition_estimate);
  }

  bool clamped = false;
  if (rho.minCoeff() < -1e-8) {
    throw SolverFailure("solve_stationary_fd: negative density sample " + format(rho.minCoeff()),
                        sol.condition_estimate);
  }
  if (rho.minCoeff() <= 0.0) {
    // clamped to the smallest normal so the Density stays strictly positive
    rho = rho.cwiseMax(std::numeric_limits<double>::min());
    rho /= rho.mean();
    clamped = true;
  }

  // Discrete flux at half points is exactly conserved by this stencil.
  double flux = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ip = (i + 1) % n;
    flux += 0.5 * (h[i] * rho[i] + h[ip] * rho[ip]) - 0.5 * eps * (g[ip] * rho[ip] - g[i] * rho[i]) / dx;
  }
  flux /= double(n);

  StationarySolution out{Density(Field1d(grid, std::move(rho))), eps, -flux, SolverTag::finite_difference};
  out.clamped = clamped;
  out.condition_estimate = sol.condition_estimate;
  return out;
}

}  // namespace

Density::Density(Field1d field, double mass_tolerance) : field_(std::move(field)) {
  if (!(field_.samples().minCoeff() > 0.0)) {
    throw InvalidInput("Density: samples must be strictly positive (min " + format(field_.samples().minCoeff()) + ")");
  }
  const double mass = integrate(field_);
  if (std::abs(mass - 1.0) > mass_tolerance) {
    throw InvalidInput("Density: integral is " + format(mass) + ", expected 1");
  }
}

Density Density::normalized(const Field1d& field) {
  const double mass = integrate(field);
  if (!(mass > 0.0)) throw InvalidInput("Density::normalized: nonpositive mass");
  return Density(Field1d(field.grid(), field.samples() / mass));
}

const char* to_string(SolverTag tag) noexcept {
  return tag == SolverTag::quadrature ? "quadrature" : "finite_difference";
}

Density unperturbed_density(const Flow1d& h) {
  const Field1d& f = h.field();
  if (is_constant(f.samples())) return Density(Field1d::constant(f.grid(), 1.0));
  const Eigen::VectorXd inv = f.samples().cwiseInverse();
  const double c = 1.0 / inv.mean();
  return Density(Field1d(f.grid(), c * inv));
}

StationarySolution solve_stationary_quadrature(const Flow1d& h, const Diffusion1d& gamma, double eps) {
  return quadrature_core(h.drift(), gamma, eps);
}

StationarySolution solve_stationary_quadrature(const Field1d& drift, const Diffusion1d& gamma, double eps) {
  return quadrature_core(drift, gamma, eps);
}

StationarySolution solve_stationary_fd(const Flow1d& h, const Diffusion1d& gamma, double eps, Eigen::Index n) {
  return fd_core(h.drift(), gamma, eps, n);
}

StationarySolution solve_stationary_fd(const Field1d& drift, const Diffusion1d& gamma, double eps, Eigen::Index n) {
  return fd_core(drift, gamma, eps, n);
}

Field1d flux_profile(const StationarySolution& sol, const Field1d& drift, const Diffusion1d& gamma) {
  const Grid1d& grid = sol.density.grid();
  const Field1d h = resample(drift, grid);
  const Field1d g = resample(gamma.field(), grid);
  const Field1d& rho = sol.density.field();
  return h * rho - (0.5 * sol.epsilon) * differentiate(g * rho);
}

double flux_relative_spread(const StationarySolution& sol, const Field1d& drift, const Diffusion1d& gamma) {
  const Eigen::VectorXd f = flux_profile(sol, drift, gamma).samples();
  const double mean = f.mean();
  const double stdev = std::sqrt((f.array() - mean).square().mean());
  const Field1d h = resample(drift, sol.density.grid());
  const double scale = std::abs(mean) > 1e-12 ? std::abs(mean) : h.samples().cwiseProduct(sol.density.samples()).cwiseAbs().maxCoeff();
  return scale > 0.0 ? stdev / scale : stdev;
}

ResidualReport residual(const StationarySolution& sol, const Density& rho0) {
  require_same_grid(sol.density.field(), rho0.field(), "residual");
  Field1d r = sol.density.field() - rho0.field();
  const double l2 = norm_l2(r);
  const double deriv = norm_l2(differentiate(r));
  const double sup = norm_sup(r);
  const double defect = std::abs(integrate(r));
  return {sol.epsilon, std::move(r), l2, deriv, sup, defect};
}

BoundCertificate certify_bounds(const Flow1d& h, const Diffusion1d& gamma, const Density& rho0,
                                const ResidualReport& report) {
  require_same_grid(h.field(), gamma.field(), "certify_bounds");
  require_same_grid(h.field(), rho0.field(), "certify_bounds");
  constexpr double inf = std::numeric_limits<double>::infinity();

  BoundCertificate cert{};
  cert.epsilon = report.epsilon;
  cert.alpha = h.alpha();
  const Field1d hp = differentiate(h.field());
  const Field1d gp = differentiate(gamma.field());
  const Field1d gpp = differentiate(gamma.field(), 2);
  const Field1d g_rho0 = gamma.field() * rho0.field();
  cert.norm_gp1 = norm_l2(differentiate(g_rho0));
  cert.norm_gp2 = norm_l2(differentiate(g_rho0, 2));

  if (gamma.is_constant()) {
    cert.max_gamma_prime = 0.0;
    cert.eps_threshold_l2 = inf;
    cert.eps_threshold_h1 = inf;
    cert.beta = norm_sup(hp);
  } else {
    cert.max_gamma_prime = max_sample(gp);
    cert.eps_threshold_l2 = 2.0 * cert.alpha / cert.max_gamma_prime;
    cert.eps_threshold_h1 = 2.0 * cert.alpha / (3.0 * cert.max_gamma_prime);
    const double w = cert.alpha / (3.0 * cert.max_gamma_prime);
    cert.beta = (hp.samples().cwiseAbs() + w * gpp.samples().cwiseAbs()).maxCoeff();
  }

  const double eps = report.epsilon;
  const double a = cert.alpha;
  cert.l2_bound = eps / a * cert.norm_gp1;
  cert.h1_bound = eps * (2.0 * cert.beta / (a * a) * cert.norm_gp1 + cert.norm_gp2 / a);
  cert.l2_observed = report.l2;
  cert.h1_observed = report.deriv_l2;
  if (eps < cert.eps_threshold_l2) cert.l2_ok = report.l2 <= cert.l2_bound + certificate_slack(cert.l2_bound);
  if (eps < cert.eps_threshold_h1) cert.h1_ok = report.deriv_l2 <= cert.h1_bound + certificate_slack(cert.h1_bound);
  return cert;
}

bool ConvergenceReport::certificates_passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.certificate.passed(); });
}

bool ConvergenceReport::poincare_passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.poincare_ok; });
}

bool ConvergenceReport::sup_monotone() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].sup < rows[i - 1].sup)) return false;
  }
  return true;
}

ConvergenceReport convergence_study(const Flow1d& h, const Diffusion1d& gamma, std::span<const double> eps_values) {
  if (eps_values.size() < 3) {
    throw InsufficientData("convergence_study: need at least 3 eps values, have " + std::to_string(eps_values.size()));
  }
  const Density rho0 = unperturbed_density(h);
  for (std::size_t i = 0; i < eps_values.size(); ++i) {
    check_eps(eps_values[i], "convergence_study");
    if (i > 0 && !(eps_values[i] < eps_values[i - 1])) {
      throw InvalidInput("convergence_study: eps values must be strictly decreasing");
    }
  }
  {
    const ResidualReport probe{eps_values[0], rho0.field(), 0, 0, 0, 0};
    const auto cert = certify_bounds(h, gamma, rho0, probe);
    if (!(eps_values[0] < cert.eps_threshold_l2)) {
      throw InvalidInput("convergence_study: eps = " + format(eps_values[0]) + " is not below the L2 threshold " +
                         format(cert.eps_threshold_l2));
    }
  }

  std::vector<std::future<ConvergenceRow>> jobs;
  for (double eps : eps_values) {
    jobs.push_back(std::async(std::launch::async, [&h, &gamma, &rho0, eps] {
      const auto sol = solve_stationary_quadrature(h, gamma, eps);
      const auto rep = residual(sol, rho0);
      ConvergenceRow row{eps, rep.l2, rep.deriv_l2, rep.sup, rep.zero_mean_defect,
                         flux_relative_spread(sol, h.drift(), gamma), certify_bounds(h, gamma, rho0, rep), false};
      row.poincare_ok = rep.sup <= rep.deriv_l2 + 1e-12;
      return row;
    }));
  }

  ConvergenceReport report;
  report.eps_values.assign(eps_values.begin(), eps_values.end());
  for (auto& job : jobs) report.rows.push_back(job.get());

  std::vector<double> l2, d, s;
  for (const auto& r : report.rows) {
    l2.push_back(r.l2);
    d.push_back(r.deriv_l2);
    s.push_back(r.sup);
  }
  report.l2_fit = fit_order_or_exact(eps_values, l2);
  report.deriv_fit = fit_order_or_exact(eps_values, d);
  report.sup_fit = fit_order_or_exact(eps_values, s);
  return report;
}

Eigen::VectorXd bin_masses(const Density& rho, int bins) {
  if (bins < 1) throw InvalidInput("bin_masses: bins must be positive");
  const auto cum = cumulative_integral(rho.field());
  Eigen::VectorXd m(bins);
  double prev = cum.at(0.0);
  for (int b = 0; b < bins; ++b) {
    const double next = cum.at(double(b + 1) / double(bins));
    m[b] = next - prev;
    prev = next;
  }
  return m;
}

}  // namespace stochstab
