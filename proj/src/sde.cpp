#include "stochstab/sde.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

namespace stochstab {

void SdeConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sde: dt must be positive");
  if (n_steps < 1) throw ConfigError("sde: n_steps must be positive");
  const auto burn = effective_burn_in();
  if (burn < 0 || burn >= n_steps) {
    throw ConfigError("sde: burn_in must lie in [0, n_steps), got " + std::to_string(burn));
  }
  if (n_trajectories < 1) throw ConfigError("sde: n_trajectories must be positive");
  if (bins < 16) throw ConfigError("sde: bins must be >= 16, got " + std::to_string(bins));
  if (threads < 0) throw ConfigError("sde: threads must be nonnegative");
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Coefficient1D::Coefficient1D(const Field1d& f, Transform transform) : rule_(f.rule()), transform_(transform) {
  Eigen::VectorXd values;
  switch (transform) {
    case Transform::value: values = f.samples(); break;
    case Transform::sqrt: values = f.samples().cwiseSqrt(); break;
    case Transform::derivative: values = differentiate(f).samples(); break;
  }
  if (f.samples().maxCoeff() == f.samples().minCoeff()) {
    constant_ = transform == Transform::derivative ? 0.0 : values[0];
  }
  max_abs_ = values.cwiseAbs().maxCoeff();
  if (!rule_ && !constant_) {
    const Grid1d fine(8 * f.size());
    Field1d up = resample(f, fine);
    switch (transform) {
      case Transform::value: table_ = up.samples(); break;
      case Transform::sqrt: table_ = up.samples().cwiseMax(0.0).cwiseSqrt(); break;
      case Transform::derivative: table_ = differentiate(up).samples(); break;
    }
  }
}

double Coefficient1D::operator()(double x) const {
  if (constant_) return *constant_;
  if (rule_) {
    switch (transform_) {
      case Transform::value: return (*rule_)(x);
      case Transform::sqrt: return std::sqrt((*rule_)(x));
      case Transform::derivative: return rule_->derivative(x);
    }
  }
  // Catmull-Rom on the periodic table.
  const auto m = table_.size();
  const double s = wrap_unit(x) * double(m);
  const auto i = static_cast<Eigen::Index>(s);
  const double t = s - double(i);
  const double p0 = table_[(i + m - 1) % m];
  const double p1 = table_[i % m];
  const double p2 = table_[(i + 1) % m];
  const double p3 = table_[(i + 2) % m];
  return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

SdeCoefficients::SdeCoefficients(const Field1d& drift, const Diffusion1d& g)
    : h(drift),
      gamma(g.field(), Coefficient1D::Transform::sqrt),
      gamma_sq_prime(g.field(), Coefficient1D::Transform::derivative) {}

double step_stratonovich_heun(double x, const SdeCoefficients& c, double eps, double dt, double noise) {
  const double dw = std::sqrt(eps * dt) * noise;
  const double hx = c.h(x);
  const double gx = c.gamma(x);
  const double y = x + hx * dt + gx * dw;
  return wrap_unit(x + 0.5 * (hx + c.h(y)) * dt + 0.5 * (gx + c.gamma(y)) * dw);
}

double step_ito_corrected_euler(double x, const SdeCoefficients& c, double eps, double dt, double noise) {
  const double drift = c.h(x) + 0.25 * eps * c.gamma_sq_prime(x);
  return wrap_unit(x + drift * dt + c.gamma(x) * std::sqrt(eps * dt) * noise);
}

double step_euler_maruyama(double x, const SdeCoefficients& c, double eps, double dt, double noise) {
  return wrap_unit(x + c.h(x) * dt + c.gamma(x) * std::sqrt(eps * dt) * noise);
}

namespace {

template <typename Step>
void run_trajectory(std::uint64_t seed, const SdeConfig& cfg, Step&& step, std::vector<std::uint64_t>& counts) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double x = uniform(rng);
  const auto burn = cfg.effective_burn_in();
  const int bins = cfg.bins;
  for (std::int64_t k = 0; k < cfg.n_steps; ++k) {
    x = step(x, normal(rng));
    if (k >= burn) ++counts[static_cast<std::size_t>(std::min(int(x * bins), bins - 1))];
  }
}

}  // namespace

OccupationMeasure occupation_measure(const Field1d& drift, const Diffusion1d& gamma, double eps,
                                     const SdeConfig& config, Scheme scheme) {
  config.validate();
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidInput("occupation_measure: eps must be nonnegative");
  const SdeCoefficients coeffs(drift, gamma);
  if (config.dt * coeffs.h.max_abs() > 0.1) {
    throw ConfigError("occupation_measure: dt * max|h| = " + std::to_string(config.dt * coeffs.h.max_abs()) +
                      " exceeds the stability limit 0.1");
  }

  const auto n_traj = static_cast<std::size_t>(config.n_trajectories);
  std::vector<std::vector<std::uint64_t>> per_traj(n_traj, std::vector<std::uint64_t>(std::size_t(config.bins), 0));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_traj; t = next++) {
      const auto seed = trajectory_seed(config.seed, t);
      const double dt = config.dt;
      switch (scheme) {
        case Scheme::stratonovich_heun:
          run_trajectory(seed, config, [&](double x, double z) { return step_stratonovich_heun(x, coeffs, eps, dt, z); },
                         per_traj[t]);
          break;
        case Scheme::ito_corrected_euler:
          run_trajectory(seed, config, [&](double x, double z) { return step_ito_corrected_euler(x, coeffs, eps, dt, z); },
                         per_traj[t]);
          break;
        case Scheme::euler_maruyama:
          run_trajectory(seed, config, [&](double x, double z) { return step_euler_maruyama(x, coeffs, eps, dt, z); },
                         per_traj[t]);
          break;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n_workers = std::min<std::size_t>(n_traj, config.threads > 0 ? std::size_t(config.threads) : hw);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  OccupationMeasure m;
  m.bins = config.bins;
  m.counts.assign(std::size_t(config.bins), 0);
  for (const auto& c : per_traj) {
    for (std::size_t b = 0; b < c.size(); ++b) m.counts[b] += c[b];
  }
  m.sample_count = std::uint64_t(config.recorded_steps()) * n_traj;
  m.masses.resize(config.bins);
  for (int b = 0; b < config.bins; ++b) m.masses[b] = double(m.counts[std::size_t(b)]) / double(m.sample_count);
  m.total_time = double(m.sample_count) * config.dt;
  return m;
}

OccupationMeasure occupation_measure(const Flow1d& h, const Diffusion1d& gamma, double eps, const SdeConfig& config,
                                     Scheme scheme) {
  return occupation_measure(h.drift(), gamma, eps, config, scheme);
}

double l1_distance(const OccupationMeasure& m, const Density& rho) {
  return (m.masses - bin_masses(rho, m.bins)).lpNorm<1>();
}

double l1_distance(const OccupationMeasure& a, const OccupationMeasure& b) {
  if (a.bins != b.bins) throw GridMismatch("l1_distance: histograms have different bin counts");
  return (a.masses - b.masses).lpNorm<1>();
}

double expectation(const OccupationMeasure& m, const Field1d& phi) {
  const auto cum = cumulative_integral(phi);
  double acc = 0.0;
  double prev = cum.at(0.0);
  for (int b = 0; b < m.bins; ++b) {
    const double next = cum.at(double(b + 1) / m.bins);
    acc += m.masses[b] * (next - prev) * m.bins;
    prev = next;
  }
  return acc;
}

double expectation(const Density& rho, const Field1d& phi) {
  return integrate(rho.field() * resample(phi, rho.grid()));
}

std::vector<Field1d> trig_test_functions(const Grid1d& grid, int degree) {
  std::vector<Field1d> out;
  for (int k = 1; k <= degree; ++k) {
    out.push_back(Field1d::sample(grid, Rule1D::cosine(0.0, 1.0, k)));
    out.push_back(Field1d::sample(grid, Rule1D::sine(0.0, 1.0, k)));
  }
  return out;
}

namespace {

template <typename Measure>
std::vector<double> probe(std::span<const Measure> measures, const Density& reference,
                          std::span<const Field1d> tests) {
  std::vector<double> ref;
  for (const auto& phi : tests) ref.push_back(expectation(reference, phi));
  std::vector<double> gaps;
  for (const auto& mu : measures) {
    double gap = 0.0;
    for (std::size_t i = 0; i < tests.size(); ++i) gap = std::max(gap, std::abs(expectation(mu, tests[i]) - ref[i]));
    gaps.push_back(gap);
  }
  return gaps;
}

}  // namespace

std::vector<double> weak_convergence_probe(std::span<const Density> measures, const Density& reference,
                                           std::span<const Field1d> test_functions) {
  return probe(measures, reference, test_functions);
}

std::vector<double> weak_convergence_probe(std::span<const OccupationMeasure> measures, const Density& reference,
                                           std::span<const Field1d> test_functions) {
  return probe(measures, reference, test_functions);
}

bool weak_decay_passes(std::span<const double> gaps) {
  if (gaps.size() < 2) return false;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    if (gaps[i] > 1.05 * gaps[i - 1]) return false;
  }
  return gaps.back() <= gaps.front() / 5.0;
}

StationarySolution stratonovich_density(const Field1d& drift, const Diffusion1d& gamma, double eps) {
  const Field1d h = resample(drift, gamma.grid());
  const Field1d corrected = h + (0.25 * eps) * differentiate(gamma.field());
  return solve_stationary_quadrature(corrected, gamma, eps);
}

StationarySolution ito_density(const Field1d& drift, const Diffusion1d& gamma, double eps) {
  return solve_stationary_quadrature(resample(drift, gamma.grid()), gamma, eps);
}

}  // namespace stochstab
