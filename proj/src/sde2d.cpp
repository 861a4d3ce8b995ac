#include "stochstab/sde2d.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <atomic>
#include <random>
#include <thread>
#include <vector>

namespace stochstab {

OccupationMeasure2D occupation_measure_2d(const Drift2D& h, const Eigen::Matrix2d& gamma, double eps,
                                          const SdeConfig& config) {
  config.validate();
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidInput("occupation_measure_2d: eps must be nonnegative");
  if (config.dt * h.max_abs > 0.1) {
    throw ConfigError("occupation_measure_2d: dt * max|h| = " + std::to_string(config.dt * h.max_abs) +
                      " exceeds the stability limit 0.1");
  }
  const Eigen::LLT<Eigen::Matrix2d> llt(gamma);
  if (llt.info() != Eigen::Success || !gamma.isApprox(gamma.transpose())) {
    throw InvalidInput("occupation_measure_2d: Gamma must be symmetric positive definite");
  }
  const Eigen::Matrix2d noise_factor = std::sqrt(eps * config.dt) * Eigen::Matrix2d(llt.matrixL());
  const int bins = config.bins;
  const auto cells = std::size_t(bins) * std::size_t(bins);
  const auto n_traj = std::size_t(config.n_trajectories);
  std::vector<std::vector<std::uint64_t>> per_traj(n_traj, std::vector<std::uint64_t>(cells, 0));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_traj; t = next++) {
      std::mt19937_64 rng(trajectory_seed(config.seed, t));
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::Vector2d x(uniform(rng), uniform(rng));
      const auto burn = config.effective_burn_in();
      const double dt = config.dt;
      auto& counts = per_traj[t];
      for (std::int64_t k = 0; k < config.n_steps; ++k) {
        const double z0 = normal(rng);
        const double z1 = normal(rng);
        const Eigen::Vector2d dw = noise_factor * Eigen::Vector2d(z0, z1);
        const Eigen::Vector2d hx = h.eval(x[0], x[1]);
        const Eigen::Vector2d y = x + hx * dt + dw;
        x += 0.5 * (hx + h.eval(y[0], y[1])) * dt + dw;
        x[0] = wrap_unit(x[0]);
        x[1] = wrap_unit(x[1]);
        if (k >= burn) {
          const int i = std::min(int(x[0] * bins), bins - 1);
          const int j = std::min(int(x[1] * bins), bins - 1);
          ++counts[std::size_t(i) + std::size_t(bins) * std::size_t(j)];
        }
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n_workers = std::min<std::size_t>(n_traj, config.threads > 0 ? std::size_t(config.threads) : hw);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<std::uint64_t> total(cells, 0);
  for (const auto& c : per_traj) {
    for (std::size_t k = 0; k < cells; ++k) total[k] += c[k];
  }
  OccupationMeasure2D m;
  m.bins = bins;
  m.sample_count = std::uint64_t(config.recorded_steps()) * n_traj;
  m.masses.resize(bins, bins);
  for (int j = 0; j < bins; ++j)
    for (int i = 0; i < bins; ++i)
      m.masses(i, j) = double(total[std::size_t(i) + std::size_t(bins) * std::size_t(j)]) / double(m.sample_count);
  m.total_time = double(m.sample_count) * config.dt;
  return m;
}

double l1_to_uniform(const OccupationMeasure2D& m) {
  const double u = 1.0 / (double(m.bins) * double(m.bins));
  return (m.masses.array() - u).abs().sum();
}

}  // namespace stochstab
