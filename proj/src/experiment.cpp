#include "stochstab/experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "stochstab/circle.hpp"
#include "stochstab/gradient.hpp"
#include "stochstab/order.hpp"
#include "stochstab/sde.hpp"
#include "stochstab/torus.hpp"

namespace stochstab {

const char* const kVersion = "0.1.0";

using json = nlohmann::ordered_json;

const char* to_string(Subcommand s) noexcept {
  switch (s) {
    case Subcommand::solve: return "solve";
    case Subcommand::converge: return "converge";
    case Subcommand::simulate: return "simulate";
    case Subcommand::gradflow: return "gradflow";
    case Subcommand::torus: return "torus";
  }
  return "?";
}

Subcommand parse_subcommand(const std::string& name) {
  for (auto s : {Subcommand::solve, Subcommand::converge, Subcommand::simulate, Subcommand::gradflow,
                 Subcommand::torus}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown subcommand '" + name + "'");
}

const std::vector<ProblemFamily>& problem_registry() {
  static const std::vector<ProblemFamily> registry{
      {"circle-sine", "circle", "sin:2,1", "const:1", "", "", "h = 2 + sin(2 pi x), Gamma = 1"},
      {"circle-sine-vargamma", "circle", "sin:2,1", "cos:1,0.5", "", "",
       "h = 2 + sin(2 pi x), Gamma = 1 + 0.5 cos(2 pi x)"},
      {"circle-constant", "circle", "const:1", "const:1", "", "", "h = 1, Gamma = 1"},
      {"gradient-cosine", "gradient", "", "const:1", "cos:1,-1", "", "H = 1 - cos(2 pi x)"},
      {"gradient-double-well", "gradient", "", "const:1", "cos:1,-1,2", "", "H = 1 - cos(4 pi x)"},
      {"gradient-flat", "gradient", "", "const:1", "const:0", "", "H = 0"},
      {"torus-irrational", "torus", "", "", "", "constant:1,1.4142135623730951", "h = (1, sqrt 2)"},
      {"torus-cellular", "torus", "", "", "", "sinsin:1,1,1", "psi = sin(2 pi x) sin(2 pi y)"},
      {"torus-still", "torus", "", "", "", "constant:0,0", "h = 0"},
  };
  return registry;
}

const ProblemFamily& find_problem(const std::string& name) {
  for (const auto& p : problem_registry()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : problem_registry()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown problem family '" + name + "' (known: " + known + ")");
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + item + "'");
    }
  }
  return out;
}

Eigen::Matrix2d parse_gamma_matrix(const std::string& text) {
  const auto v = parse_numbers(text, "gamma_matrices");
  if (v.size() != 3) throw ConfigError("gamma_matrices: expected 'g11,g12,g22', got '" + text + "'");
  Eigen::Matrix2d g;
  g << v[0], v[1], v[1], v[2];
  return g;
}

struct Resolved {
  const ProblemFamily* family;
  std::string drift, gamma, potential, stream;
};

Resolved resolve(const ExperimentConfig& c) {
  const auto& f = find_problem(c.problem);
  return {&f, c.drift.empty() ? f.drift : c.drift, c.gamma.empty() ? f.gamma : c.gamma,
          c.potential.empty() ? f.potential : c.potential, c.stream.empty() ? f.stream : c.stream};
}

TorusField2D make_torus_field(const std::string& stream, const Grid2d& grid) {
  if (stream.rfind("constant:", 0) == 0) {
    const auto v = parse_numbers(stream.substr(9), "stream");
    if (v.size() != 2) throw ConfigError("stream: expected 'constant:a,b'");
    return TorusField2D::constant(grid, v[0], v[1]);
  }
  return field_from_stream({Field2d::sample(grid, Rule2D::parse(stream))});
}

SdeConfig sde_config(const ExperimentConfig& c, std::int64_t steps) {
  SdeConfig s;
  s.dt = c.dt;
  s.n_steps = steps;
  s.burn_in = c.burn_in;
  s.n_trajectories = c.trajectories;
  s.seed = c.seed;
  s.bins = c.bins;
  s.threads = c.threads;
  return s;
}

Scheme parse_scheme(const std::string& s) {
  if (s == "heun") return Scheme::stratonovich_heun;
  if (s == "ito-corrected") return Scheme::ito_corrected_euler;
  if (s == "euler") return Scheme::euler_maruyama;
  throw ConfigError("scheme must be heun, ito-corrected or euler, got '" + s + "'");
}

}  // namespace

int ExperimentConfig::grid_points() const {
  if (n != 0) return n;
  return find_problem(problem).domain == "torus" ? 64 : 512;
}

void ExperimentConfig::validate() const {
  if (problem.empty()) throw ConfigError("problem is required");
  const Resolved r = resolve(*this);
  const std::string& domain = r.family->domain;
  const bool ok = (subcommand == Subcommand::solve || subcommand == Subcommand::converge) ? domain == "circle"
                  : subcommand == Subcommand::simulate                                    ? domain != "torus"
                  : subcommand == Subcommand::gradflow                                    ? domain == "gradient"
                                                                                          : domain == "torus";
  if (!ok) {
    throw ConfigError(std::string("subcommand '") + to_string(subcommand) + "' does not accept the " + domain +
                      " problem '" + problem + "'");
  }
  try {
    if (domain == "circle") {
      const Grid1d probe(64);
      const auto drift = Field1d::sample(probe, Rule1D::parse(r.drift));
      // Simulation accepts any signed drift; the solvers need a nonvanishing one.
      if (subcommand != Subcommand::simulate) (void)Flow1d(drift);
      (void)Diffusion1d(Field1d::sample(probe, Rule1D::parse(r.gamma)));
    } else if (domain == "gradient") {
      Rule1D::parse(r.potential);
    } else {
      (void)make_torus_field(r.stream, Grid2d(32));
      for (const auto& g : gamma_matrices) HomogeneousDiffusion2D{parse_gamma_matrix(g)};
      if (gamma_matrices.empty()) throw ConfigError("gamma_matrices must not be empty");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  if (eps.empty()) throw ConfigError("eps: at least one value is required");
  for (double e : eps) {
    const bool zero_ok = subcommand == Subcommand::simulate && domain == "circle";
    if (!std::isfinite(e) || e < 0.0 || (e == 0.0 && !zero_ok)) {
      throw ConfigError("eps: values must be positive, got " + num(e));
    }
  }
  if (subcommand == Subcommand::solve && eps.size() != 1) throw ConfigError("solve: exactly one eps value");
  if (subcommand == Subcommand::converge) {
    if (eps.size() < 3) throw ConfigError("converge: at least 3 eps values");
    for (std::size_t i = 1; i < eps.size(); ++i) {
      if (!(eps[i] < eps[i - 1])) throw ConfigError("converge: eps values must be strictly decreasing");
    }
  }

  const int points = grid_points();
  if (domain == "torus") {
    if (points < 32 || points % 2 != 0 || points > 256) throw ConfigError("n: torus grids need even 32 <= n <= 256");
  } else if (points < 8 || points % 2 != 0) {
    throw ConfigError("n: must be even and >= 8");
  }
  for (int m : fd_n) {
    if (m < 64 || m % 2 != 0) throw ConfigError("fd_n: sizes must be even and >= 64");
  }
  if (solver != "quadrature" && solver != "fd") throw ConfigError("solver must be quadrature or fd");
  if (solver == "fd" && points < 64) throw ConfigError("solver fd needs n >= 64");
  parse_scheme(scheme);
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("delta must lie in (0, 0.5)");
  if (probe_steps < 0) throw ConfigError("probe_steps must be nonnegative");
  if (subcommand == Subcommand::simulate) sde_config(*this, steps).validate();
  if (subcommand == Subcommand::torus && probe_steps > 0) sde_config(*this, probe_steps).validate();
  if (output.empty()) throw ConfigError("output directory is required");
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

namespace {

class Run {
 public:
  explicit Run(const ExperimentConfig& c) : config_(c), resolved_(resolve(c)) {}

  RunManifest execute();

 private:
  using Row = std::vector<double>;

  void write_csv(const std::string& name, const std::vector<std::string>& header, const std::vector<Row>& rows) {
    std::ofstream out(config_.output / name, std::ios::binary);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << num(row[i]);
      out << "\n";
    }
    if (!out) throw Error("cannot write " + (config_.output / name).string());
    files_.push_back(name);
  }

  void check(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }

  template <typename F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        timings_[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      } else {
        auto out = f();
        timings_[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e.what());
    }
  }

  Grid1d grid1d() const { return Grid1d(config_.grid_points()); }
  Flow1d flow(const Grid1d& g) const { return Flow1d(Field1d::sample(g, Rule1D::parse(resolved_.drift))); }
  Diffusion1d gamma1d(const Grid1d& g) const {
    return Diffusion1d(Field1d::sample(g, Rule1D::parse(resolved_.gamma)));
  }
  PotentialField potential(const Grid1d& g) const {
    return PotentialField(Field1d::sample(g, Rule1D::parse(resolved_.potential)));
  }

  json run_solve();
  json run_converge();
  json run_simulate();
  json run_gradflow();
  json run_torus();

  const ExperimentConfig& config_;
  Resolved resolved_;
  std::vector<std::string> files_;
  std::vector<std::string> failures_;
  std::map<std::string, double> timings_;
};

json certificate_json(const BoundCertificate& c) {
  auto verdict = [](const std::optional<bool>& v) -> json {
    if (!v) return "not applicable";
    return *v;
  };
  return json{{"alpha", c.alpha},
              {"beta", c.beta},
              {"norm_gp1", c.norm_gp1},
              {"norm_gp2", c.norm_gp2},
              {"max_gamma_prime", c.max_gamma_prime},
              {"eps_threshold_l2", std::isfinite(c.eps_threshold_l2) ? json(c.eps_threshold_l2) : json("inf")},
              {"eps_threshold_h1", std::isfinite(c.eps_threshold_h1) ? json(c.eps_threshold_h1) : json("inf")},
              {"l2_bound", c.l2_bound},
              {"h1_bound", c.h1_bound},
              {"l2_ok", verdict(c.l2_ok)},
              {"h1_ok", verdict(c.h1_ok)}};
}

json fit_json(const OrderFit& f) {
  if (f.exact) return json{{"exact", true}, {"slope", "nan"}};
  return json{{"exact", false},
              {"slope", f.slope},
              {"intercept", f.intercept},
              {"interval_slopes", f.interval_slopes},
              {"excluded", f.excluded}};
}

json Run::run_solve() {
  const Grid1d g = grid1d();
  const double eps = config_.eps.front();
  const Flow1d h = flow(g);
  const Diffusion1d gamma = gamma1d(g);
  const Density rho0 = stage("unperturbed", [&] { return unperturbed_density(h); });
  const auto sol = stage("solve", [&] {
    return config_.solver == "fd" ? solve_stationary_fd(h, gamma, eps, g.size())
                                  : solve_stationary_quadrature(h, gamma, eps);
  });
  const auto rep = residual(sol, rho0);
  const auto cert = certify_bounds(h, gamma, rho0, rep);
  const double spread = flux_relative_spread(sol, h.drift(), gamma);
  const double spread_tol = config_.solver == "fd" ? 10.0 / double(g.size() * g.size()) : 1e-8;

  std::vector<Row> rows;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    rows.push_back({g.point(i), rho0.samples()[i], sol.density.samples()[i], rep.residual[i]});
  }
  write_csv("density.csv", {"x", "rho0", "rho_eps", "r_eps"}, rows);

  check(rep.zero_mean_defect <= 1e-10, "zero-mean defect above 1e-10");
  check(spread <= spread_tol, "flux not constant");
  check(cert.passed(), "bound certificate failed");

  json out{{"epsilon", eps},
           {"solver", to_string(sol.solver)},
           {"flux_constant", sol.flux_constant},
           {"flux_relative_spread", spread},
           {"l2", rep.l2},
           {"deriv_l2", rep.deriv_l2},
           {"sup", rep.sup},
           {"zero_mean_defect", rep.zero_mean_defect},
           {"clamped", sol.clamped},
           {"certificate", certificate_json(cert)}};

  if (!config_.fd_n.empty()) {
    std::vector<double> hs, dist;
    std::vector<Row> cross;
    for (int m : config_.fd_n) {
      const Grid1d gm(m);
      const Flow1d hm = flow(gm);
      const Diffusion1d gam = gamma1d(gm);
      const auto q = stage("cross_solver", [&] { return solve_stationary_quadrature(hm, gam, eps); });
      const auto f = stage("cross_solver", [&] { return solve_stationary_fd(hm, gam, eps, m); });
      const double d = norm_sup(q.density.field() - f.density.field());
      hs.push_back(1.0 / m);
      dist.push_back(d);
      cross.push_back({double(m), d, f.condition_estimate});
    }
    write_csv("cross_solver.csv", {"n", "sup_distance", "condition_estimate"}, cross);
    json cj{{"n", config_.fd_n}, {"sup_distance", dist}};
    if (hs.size() >= 3) {
      const auto fit = fit_order(hs, dist);
      cj["observed_order"] = fit.slope;
      check(std::abs(fit.slope - 2.0) <= 0.3, "cross-solver order outside 2 +- 0.3");
    }
    out["cross_solver"] = cj;
  }
  return out;
}

json Run::run_converge() {
  const Grid1d g = grid1d();
  const Flow1d h = flow(g);
  const Diffusion1d gamma = gamma1d(g);
  const auto report = stage("convergence_study", [&] { return convergence_study(h, gamma, config_.eps); });

  std::vector<Row> rows;
  json per_eps = json::array();
  bool defects_ok = true, flux_ok = true;
  for (const auto& r : report.rows) {
    rows.push_back({r.epsilon, r.l2, r.deriv_l2, r.sup, r.certificate.l2_bound, r.certificate.h1_bound,
                    r.zero_mean_defect, r.flux_spread});
    per_eps.push_back(json{{"epsilon", r.epsilon},
                           {"poincare_ok", r.poincare_ok},
                           {"certificate", certificate_json(r.certificate)}});
    defects_ok = defects_ok && r.zero_mean_defect <= 1e-10;
    flux_ok = flux_ok && r.flux_spread <= 1e-8;
  }
  write_csv("report.csv", {"eps", "l2", "deriv_l2", "sup", "l2_bound", "h1_bound", "zero_mean_defect", "flux_spread"},
            rows);

  const bool exact = report.l2_fit.exact && report.deriv_fit.exact && report.sup_fit.exact;
  auto meets = [](const OrderFit& f) { return f.exact || f.slope >= 0.9; };
  const bool order_target = meets(report.l2_fit) && meets(report.deriv_fit) && meets(report.sup_fit);

  check(report.certificates_passed(), "bound certificate failed");
  check(report.poincare_passed(), "sup norm exceeds derivative L2 norm");
  check(defects_ok, "zero-mean defect above 1e-10");
  check(flux_ok, "flux not constant");
  if (!exact) {
    check(report.sup_monotone(), "sup norm not monotonically decreasing");
    check(report.sup_fit.slope > 0.0, "sup norm slope not positive");
  }

  return json{{"eps", config_.eps},
              {"slopes", json{{"l2", fit_json(report.l2_fit)},
                              {"deriv_l2", fit_json(report.deriv_fit)},
                              {"sup", fit_json(report.sup_fit)}}},
              {"slopes_at_least_0_9", order_target},
              {"certificates_passed", report.certificates_passed()},
              {"poincare_passed", report.poincare_passed()},
              {"sup_monotone", report.sup_monotone()},
              {"rows", per_eps}};
}

json Run::run_simulate() {
  const Grid1d g = grid1d();
  const bool gradient = resolved_.family->domain == "gradient";
  const Field1d drift =
      gradient ? gradient_drift(potential(g)) : Field1d::sample(g, Rule1D::parse(resolved_.drift));
  const Diffusion1d gamma = gradient ? Diffusion1d(Field1d::constant(g, 1.0)) : gamma1d(g);
  const SdeConfig sde = sde_config(config_, config_.steps);
  const Scheme scheme = parse_scheme(config_.scheme);
  const auto tests = trig_test_functions(g, 8);

  json runs = json::array();
  for (std::size_t k = 0; k < config_.eps.size(); ++k) {
    const double eps = config_.eps[k];
    const Density reference = stage("reference", [&] {
      if (eps == 0.0) return unperturbed_density(Flow1d(drift));
      return scheme == Scheme::euler_maruyama ? ito_density(drift, gamma, eps).density
                                              : stratonovich_density(drift, gamma, eps).density;
    });
    const auto m = stage("simulate", [&] { return occupation_measure(drift, gamma, eps, sde, scheme); });
    const Eigen::VectorXd ref_mass = bin_masses(reference, m.bins);
    std::vector<Row> rows;
    for (int b = 0; b < m.bins; ++b) rows.push_back({m.bin_center(b), m.masses[b], ref_mass[b] * m.bins});
    write_csv("histogram_" + std::to_string(k) + ".csv", {"bin_center", "mass", "reference_density"}, rows);

    const double l1 = l1_distance(m, reference);
    const double mass_sum = m.masses.sum();
    json gaps = json::object();
    double max_gap = 0.0;
    for (std::size_t t = 0; t < tests.size(); ++t) {
      const std::string name = std::string(t % 2 == 0 ? "cos" : "sin") + std::to_string(t / 2 + 1);
      const double gap = std::abs(expectation(m, tests[t]) - expectation(reference, tests[t]));
      gaps[name] = gap;
      max_gap = std::max(max_gap, gap);
    }
    check(std::abs(mass_sum - 1.0) <= 1e-12, "histogram mass does not sum to 1");
    check(l1 <= config_.tolerance, "L1 distance " + num(l1) + " above tolerance at eps " + num(eps));
    runs.push_back(json{{"epsilon", eps},
                        {"l1_distance", l1},
                        {"tolerance", config_.tolerance},
                        {"mass_sum", mass_sum},
                        {"sample_count", m.sample_count},
                        {"total_time", m.total_time},
                        {"max_gap", max_gap},
                        {"gaps", gaps}});
  }
  return json{{"scheme", config_.scheme}, {"seed", config_.seed}, {"runs", runs}};
}

json Run::run_gradflow() {
  const Grid1d g = grid1d();
  const PotentialField h = stage("potential", [&] { return potential(g); });
  const Diffusion1d unit(Field1d::constant(g, 1.0));
  const auto global = h.global_minima();
  json per_eps = json::array();

  for (std::size_t k = 0; k < config_.eps.size(); ++k) {
    const double eps = config_.eps[k];
    json entry{{"epsilon", eps}};
    std::optional<GibbsDensity> gibbs;
    try {
      gibbs = gibbs_density(h, eps);
    } catch (const PrecisionExhausted& e) {
      entry["resolved"] = false;
      entry["message"] = e.what();
      per_eps.push_back(entry);
      continue;
    }
    entry["resolved"] = true;
    entry["log_normalizer"] = gibbs->log_normalizer;
    std::vector<Row> rows;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      rows.push_back({g.point(i), h.field()[i], gibbs->density.samples()[i]});
    }
    write_csv("density_" + std::to_string(k) + ".csv", {"x", "H", "rho"}, rows);

    try {
      const auto q = solve_stationary_quadrature(gradient_drift(h), unit, eps);
      const double d = norm_sup(q.density.field() - gibbs->density.field());
      entry["quadrature_sup_distance"] = d;
      check(d <= 1e-8, "Gibbs density differs from the quadrature solution at eps " + num(eps));
    } catch (const PrecisionExhausted&) {
      entry["quadrature_sup_distance"] = "not computable";
    }

    json wells = json::array();
    const auto masses = well_masses(*gibbs, h);
    for (const auto& w : masses) wells.push_back(json{{"location", w.location}, {"mass", w.mass}});
    entry["well_masses"] = wells;
    if (global.size() > 1) {
      // Equal split asserted only when a cyclic shift maps the potential onto itself.
      const auto& s = h.field().samples();
      const auto shift = static_cast<Eigen::Index>(std::llround((global[1].location - global[0].location) * g.size()));
      bool symmetric = true;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        symmetric = symmetric && std::abs(s[(i + shift) % s.size()] - s[i]) <= 1e-12;
      }
      entry["symmetric_wells"] = symmetric;
      if (symmetric) {
        for (const auto& w : masses) {
          check(std::abs(w.mass - 1.0 / double(masses.size())) <= 1e-10, "symmetric wells do not split mass equally");
        }
      }
    }
    per_eps.push_back(entry);
  }

  json out{{"minima", json::array()}, {"densities", per_eps}};
  for (const auto& m : h.minima()) {
    out["minima"].push_back(json{{"location", m.location}, {"value", m.value}, {"curvature", m.curvature}});
  }
  if (global.size() <= 1) {
    const auto rep = stage("concentration", [&] { return concentration_study(h, config_.eps, config_.delta); });
    std::vector<Row> rows;
    for (const auto& r : rep.rows) {
      if (r.resolved) rows.push_back({r.epsilon, r.outside_mass, r.eps_times_log_mass});
    }
    write_csv("concentration.csv", {"eps", "outside_mass", "eps_times_log_mass"}, rows);
    json cj{{"delta", rep.delta}, {"center", rep.center}, {"delta_h", rep.delta_h}, {"flat", rep.flat}};
    if (rep.strictly_decreasing) cj["strictly_decreasing"] = *rep.strictly_decreasing;
    if (rep.laplace_ok) cj["laplace_within_20_percent"] = *rep.laplace_ok;
    check(rep.passed(), "concentration assertions failed");
    out["concentration"] = cj;
  } else {
    out["concentration"] = "several global minima: well masses reported instead";
  }
  return out;
}

json Run::run_torus() {
  const Grid2d grid(config_.grid_points());
  const TorusField2D h = stage("field", [&] { return make_torus_field(resolved_.stream, grid); });
  json results = json::array();
  for (std::size_t gi = 0; gi < config_.gamma_matrices.size(); ++gi) {
    const HomogeneousDiffusion2D gamma(parse_gamma_matrix(config_.gamma_matrices[gi]));
    for (std::size_t ei = 0; ei < config_.eps.size(); ++ei) {
      const double eps = config_.eps[ei];
      const auto sol = stage("solve_2d", [&] { return solve_stationary_fd_2d(h, gamma, eps, grid.size()); });
      const auto rig = stage("rigidity", [&] { return rigidity_check(h, gamma, eps, grid.size()); });
      const double dev = (sol.density.samples().array() - 1.0).abs().maxCoeff();
      std::vector<Row> rows;
      for (Eigen::Index j = 0; j < grid.size(); ++j)
        for (Eigen::Index i = 0; i < grid.size(); ++i)
          rows.push_back({grid.point(i), grid.point(j), sol.density.samples()(i, j)});
      write_csv("density_g" + std::to_string(gi) + "_e" + std::to_string(ei) + ".csv", {"x", "y", "value"}, rows);
      check(dev <= 1e-8, "stationary density not uniform within 1e-8");
      check(rig.passed, "rigidity check: " + rig.message);
      results.push_back(json{{"gamma", config_.gamma_matrices[gi]},
                             {"epsilon", eps},
                             {"uniform_sup_deviation", dev},
                             {"condition_estimate", sol.condition_estimate},
                             {"rigidity",
                              json{{"verdict", rig.message},
                                   {"r_l2", rig.r_l2},
                                   {"r_sup", rig.r_sup},
                                   {"advective_energy", rig.advective_energy},
                                   {"gradient_energy", rig.gradient_energy},
                                   {"condition_estimate", rig.condition_estimate}}}});
    }
  }
  json out{{"field", h.label()}, {"divergence_sup", h.divergence_sup()}, {"results", results}};

  if (config_.probe_steps > 0) {
    const SdeConfig sde = sde_config(config_, config_.probe_steps);
    const HomogeneousDiffusion2D gamma(parse_gamma_matrix(config_.gamma_matrices.front()));
    const auto rows = stage("zero_noise_probe",
                            [&] { return zero_noise_probe_2d(h, gamma, config_.eps, sde, config_.tolerance); });
    std::vector<Row> csv;
    json pj = json::array();
    for (const auto& r : rows) {
      csv.push_back({r.epsilon, r.l1_to_uniform, r.tolerance});
      pj.push_back(json{{"epsilon", r.epsilon}, {"l1_to_uniform", r.l1_to_uniform}, {"passed", r.passed}});
      check(r.passed, "zero-noise probe L1 above tolerance at eps " + num(r.epsilon));
    }
    write_csv("zero_noise.csv", {"eps", "l1_to_uniform", "tolerance"}, csv);
    out["zero_noise_probe"] = pj;
  }
  if (config_.contrast) {
    const Field2d scalar = Field2d::sample(grid, Rule2D::cos_x(1.0, 0.5));
    const auto sol = stage("contrast", [&] { return solve_stationary_fd_2d(h, scalar, config_.eps.front(), grid.size()); });
    out["inhomogeneous_contrast"] = json{{"gamma", "(1 + 0.5 cos 2 pi x) I"},
                                         {"epsilon", config_.eps.front()},
                                         {"l1_from_uniform", l1_from_uniform(sol.density)}};
  }
  return out;
}

RunManifest Run::execute() {
  std::filesystem::create_directories(config_.output);
  json results;
  switch (config_.subcommand) {
    case Subcommand::solve: results = run_solve(); break;
    case Subcommand::converge: results = run_converge(); break;
    case Subcommand::simulate: results = run_simulate(); break;
    case Subcommand::gradflow: results = run_gradflow(); break;
    case Subcommand::torus: results = run_torus(); break;
  }

  const bool passed = failures_.empty();
  json summary{{"subcommand", to_string(config_.subcommand)},
               {"problem", config_.problem},
               {"passed", passed},
               {"failures", failures_},
               {"results", results}};
  {
    std::ofstream out(config_.output / "summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
    files_.push_back("summary.json");
  }

  RunManifest manifest{kVersion, {}, timings_, passed, failures_};
  for (const auto& f : files_) {
    const auto path = config_.output / f;
    manifest.artifacts.push_back({f, sha256_file(path), std::filesystem::file_size(path)});
  }

  const auto& c = config_;
  json cfg{{"subcommand", to_string(c.subcommand)},
           {"problem", c.problem},
           {"drift", resolved_.drift},
           {"gamma", resolved_.gamma},
           {"potential", resolved_.potential},
           {"stream", resolved_.stream},
           {"eps", c.eps},
           {"n", c.grid_points()},
           {"fd_n", c.fd_n},
           {"solver", c.solver},
           {"dt", c.dt},
           {"steps", c.steps},
           {"burn_in", c.burn_in ? json(*c.burn_in) : json(nullptr)},
           {"trajectories", c.trajectories},
           {"seed", c.seed},
           {"bins", c.bins},
           {"scheme", c.scheme},
           {"tolerance", c.tolerance},
           {"delta", c.delta},
           {"gamma_matrices", c.gamma_matrices},
           {"probe_steps", c.probe_steps},
           {"contrast", c.contrast}};
  json artifacts = json::array();
  for (const auto& a : manifest.artifacts) {
    artifacts.push_back(json{{"file", a.file}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  }
  json mj{{"version", kVersion},
          {"config", cfg},
          {"artifacts", artifacts},
          {"timings_seconds", timings_},
          {"passed", passed}};
  std::ofstream out(config_.output / "manifest.json", std::ios::binary);
  out << mj.dump(2) << "\n";
  return manifest;
}

}  // namespace

RunManifest run(const ExperimentConfig& config) {
  config.validate();
  return Run(config).execute();
}

}  // namespace stochstab
