#include "stochstab/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stochstab/detail/quadrature.hpp"

namespace stochstab {

namespace {

// Sample weights below exp(-36) relative to the peak do not affect the trapezoid sum.
constexpr double kNegligibleLog = 36.0;
constexpr int kMinResolvedSamples = 16;
constexpr int kArcPanels = 128;
// Curvature below this fraction of max |H''| counts as zero.
constexpr double kDegenerateCurvature = 1e-8;

std::string format(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Vertex offset (in cells) of the parabola through (-1, a), (0, b), (1, c).
double vertex_offset(double a, double b, double c) {
  const double denom = a - 2.0 * b + c;
  return denom == 0.0 ? 0.0 : 0.5 * (a - c) / denom;
}

}  // namespace

PotentialField::PotentialField(Field1d h) : h_(std::move(h)), spectrum_(detail::forward(h_.samples())) {
  const auto& s = h_.samples();
  const Eigen::Index n = s.size();
  const double dx = h_.grid().spacing();
  auto curvature_spec = spectrum_;
  detail::apply_derivative(curvature_spec, 2);
  const double curvature_scale = detail::inverse(curvature_spec).cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = s[(i + n - 1) % n];
    const double b = s[i];
    const double c = s[(i + 1) % n];
    if (b < a && b <= c) {
      const double off = vertex_offset(a, b, c);
      const double x = h_.grid().point(i) + off * dx;
      const double loc = x - std::floor(x);
      const double curv = detail::evaluate(curvature_spec, loc);
      if (!(curv > kDegenerateCurvature * curvature_scale)) {
        throw InvalidInput("PotentialField: degenerate minimum near x = " + format(loc));
      }
      const double value = b - 0.25 * (a - c) * off;
      minima_.push_back({loc, value, curv});
    } else if (b > a && b >= c) {
      const double x = h_.grid().point(i) + vertex_offset(a, b, c) * dx;
      maxima_.push_back(x - std::floor(x));
    }
  }
}

std::vector<Minimum> PotentialField::global_minima() const {
  std::vector<Minimum> out;
  if (minima_.empty()) return out;
  double lo = minima_.front().value;
  for (const auto& m : minima_) lo = std::min(lo, m.value);
  const double tol = 1e-10 * std::max(1.0, norm_sup(h_));
  for (const auto& m : minima_) {
    if (m.value <= lo + tol) out.push_back(m);
  }
  return out;
}

double PotentialField::operator()(double x) const {
  if (h_.rule()) return (*h_.rule())(x);
  return detail::evaluate(spectrum_, x);
}

Field1d gradient_drift(const PotentialField& h) {
  const Field1d d = differentiate(h.field());
  return Field1d(d.grid(), -d.samples());
}

GibbsDensity gibbs_density(const PotentialField& h, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("gibbs_density: eps must be positive");
  const Eigen::VectorXd& s = h.field().samples();
  const double hmin = s.minCoeff();
  const Eigen::VectorXd log_w = (-2.0 / eps) * (s.array() - hmin).matrix();
  if (!h.is_flat()) {
    const auto resolved = (log_w.array() > -kNegligibleLog).count();
    if (resolved < kMinResolvedSamples) {
      const double ratio = double(kMinResolvedSamples) / double(std::max<Eigen::Index>(resolved, 1));
      const double safe = eps * ratio * ratio;
      throw PrecisionExhausted("gibbs_density: eps = " + format(eps) + " puts all mass in " +
                                   std::to_string(resolved) + " grid cells; refine the grid (n = " +
                                   std::to_string(s.size()) + ") or use eps >= " + format(safe),
                               safe);
    }
  }
  Eigen::VectorXd rho = log_w.array().exp().matrix();
  const double z = rho.mean();
  rho /= z;
  const double log_c = -std::log(z) + 2.0 * hmin / eps;
  return {Density(Field1d(h.grid(), std::move(rho))), eps, log_c};
}

double arc_mass(const GibbsDensity& g, const PotentialField& h, double a, double b) {
  if (!(b >= a) || b - a > 1.0 + 1e-15) throw InvalidInput("arc_mass: need a <= b <= a + 1");
  const auto& rule = detail::gauss_legendre_unit();
  const double hmin = h.field().samples().minCoeff();
  const double log_z = g.log_normalizer - 2.0 * hmin / g.epsilon;
  const double width = (b - a) / kArcPanels;
  double acc = 0.0;
  for (int p = 0; p < kArcPanels; ++p) {
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = a + (p + rule.nodes[q]) * width;
      acc += rule.weights[q] * std::exp(log_z - 2.0 * (h(x - std::floor(x)) - hmin) / g.epsilon);
    }
  }
  return acc * width;
}

std::vector<WellMass> well_masses(const GibbsDensity& g, const PotentialField& h) {
  std::vector<WellMass> out;
  const auto& minima = h.minima();
  if (minima.empty()) return out;
  if (minima.size() == 1) return {{minima.front().location, 1.0}};
  auto maxima = h.maxima();
  std::sort(maxima.begin(), maxima.end());
  for (const auto& m : minima) {
    // Nearest maxima on either side of this minimum, unwrapped around it.
    double left = -2.0, right = 2.0;
    for (double x : maxima) {
      for (double shift : {-1.0, 0.0, 1.0}) {
        const double y = x + shift;
        if (y < m.location) left = std::max(left, y);
        if (y > m.location) right = std::min(right, y);
      }
    }
    out.push_back({m.location, arc_mass(g, h, left, right)});
  }
  return out;
}

ConcentrationReport concentration_study(const PotentialField& h, std::span<const double> eps_values, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("concentration_study: delta must lie in (0, 1/2)");
  ConcentrationReport rep{delta, 0.0, 0.0, h.is_flat(), {}, std::nullopt, std::nullopt};
  if (!rep.flat) {
    const auto global = h.global_minima();
    if (global.size() > 1) {
      throw ModeError("concentration_study: H has " + std::to_string(global.size()) +
                      " global minima; use well_masses for the symmetric-well split");
    }
    rep.center = global.front().location;
    for (const auto& m : h.minima()) {
      double d = std::abs(m.location - rep.center);
      d = std::min(d, 1.0 - d);
      if (d > 0.0 && d <= delta) {
        throw InvalidInput("concentration_study: another local minimum lies inside the delta ball");
      }
    }
    const double hmin = global.front().value;
    rep.delta_h = std::min(h(rep.center - delta - std::floor(rep.center - delta)),
                           h(rep.center + delta - std::floor(rep.center + delta))) -
                  hmin;
  }

  for (double eps : eps_values) {
    ConcentrationRow row{eps, false, std::nan(""), std::nan("")};
    try {
      const auto g = gibbs_density(h, eps);
      row.resolved = true;
      row.outside_mass = arc_mass(g, h, rep.center + delta, rep.center + 1.0 - delta);
      row.eps_times_log_mass = eps * std::log(row.outside_mass);
    } catch (const PrecisionExhausted&) {
    }
    rep.rows.push_back(row);
  }
  if (rep.flat) return rep;

  std::vector<const ConcentrationRow*> resolved;
  for (const auto& r : rep.rows) {
    if (r.resolved) resolved.push_back(&r);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < resolved.size(); ++i) {
    const bool smaller_eps = resolved[i]->epsilon < resolved[i - 1]->epsilon;
    if (smaller_eps && !(resolved[i]->outside_mass < resolved[i - 1]->outside_mass)) decreasing = false;
  }
  rep.strictly_decreasing = decreasing;
  if (!resolved.empty()) {
    const auto* smallest = *std::min_element(resolved.begin(), resolved.end(),
                                             [](auto* a, auto* b) { return a->epsilon < b->epsilon; });
    const double target = -2.0 * rep.delta_h;
    rep.laplace_ok = std::abs(smallest->eps_times_log_mass - target) <= 0.2 * std::abs(target);
  }
  return rep;
}

}  // namespace stochstab
