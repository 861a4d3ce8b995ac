#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "stochstab/circle.hpp"
#include "support/oracles.hpp"

using namespace stochstab;
using std::numbers::pi;

namespace {

const Grid1d kGrid(512);

Flow1d sine_flow(const Grid1d& g = kGrid) { return Flow1d(Field1d::sample(g, Rule1D::sine(2.0, 1.0))); }
Diffusion1d unit_gamma(const Grid1d& g = kGrid) { return Diffusion1d(Field1d::constant(g, 1.0)); }
Diffusion1d cos_gamma(const Grid1d& g = kGrid) { return Diffusion1d(Field1d::sample(g, Rule1D::cosine(1.0, 0.5))); }

double h_sine(double x) { return 2.0 + std::sin(oracle::two_pi * x); }
double g_cos(double x) { return 1.0 + 0.5 * std::cos(oracle::two_pi * x); }

}  // namespace

TEST_SUITE("circle") {
  TEST_CASE("unperturbed density") {
    const auto one = unperturbed_density(Flow1d(Field1d::constant(kGrid, 1.0)));
    CHECK((one.samples().array() - 1.0).abs().maxCoeff() <= 1e-14);
    const auto five = unperturbed_density(Flow1d(Field1d::constant(kGrid, 5.0)));
    CHECK((five.samples().array() - 1.0).abs().maxCoeff() <= 1e-14);

    const auto rho0 = unperturbed_density(sine_flow());
    const double c = 1.0 / oracle::integrate([](double x) { return 1.0 / h_sine(x); }, 0, 1);
    CHECK(std::abs(c - std::sqrt(3.0)) <= 1e-12);
    CHECK(std::abs(rho0.samples()[0] - std::sqrt(3.0) / 2.0) <= 1e-12);
    CHECK(std::abs(rho0.samples()[128] - std::sqrt(3.0) / 3.0) <= 1e-12);
  }

  TEST_CASE("constant drift and diffusion give the uniform density") {
    const Flow1d h(Field1d::constant(kGrid, 1.0));
    for (double eps : {1.0, 0.1, 0.01}) {
      const auto sol = solve_stationary_quadrature(h, unit_gamma(), eps);
      CHECK((sol.density.samples().array() - 1.0).abs().maxCoeff() <= 1e-14);
      CHECK(sol.flux_constant == doctest::Approx(-1.0).epsilon(1e-14));
      const auto flux = flux_profile(sol, h.drift(), unit_gamma());
      CHECK((flux.samples().array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
    const auto fd = solve_stationary_fd(h, Diffusion1d(Field1d::constant(Grid1d(128), 1.0)), 0.1, 128);
    CHECK((fd.density.samples().array() - 1.0).abs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("pure diffusion through the unchecked solver path") {
    const auto sol = solve_stationary_fd(Field1d::constant(Grid1d(128), 0.0),
                                         Diffusion1d(Field1d::constant(Grid1d(128), 1.0)), 0.1, 128);
    CHECK((sol.density.samples().array() - 1.0).abs().maxCoeff() <= 1e-10);
    CHECK_THROWS_AS(Flow1d(Field1d::constant(kGrid, 0.0)), NonsingularityViolation);
  }

  TEST_CASE("quadrature solution matches nested adaptive quadrature") {
    struct Case {
      Diffusion1d gamma;
      double (*g)(double);
      double eps;
    };
    const std::vector<Case> cases{{unit_gamma(), [](double) { return 1.0; }, 0.1},
                                  {cos_gamma(), g_cos, 0.05},
                                  {unit_gamma(), [](double) { return 1.0; }, 0.02}};
    for (const auto& c : cases) {
      const auto sol = solve_stationary_quadrature(sine_flow(), c.gamma, c.eps);
      const double ref0 = oracle::circle_density_unnormalized(h_sine, c.g, c.eps, 0.0);
      for (int i : {37, 128, 300, 411}) {
        const double ref = oracle::circle_density_unnormalized(h_sine, c.g, c.eps, kGrid.point(i));
        const double got = sol.density.samples()[i] / sol.density.samples()[0];
        CHECK(std::abs(got - ref / ref0) <= 1e-9);
      }
    }
  }

  TEST_CASE("positive unit-mass density with the first-order residual bound") {
    const auto rho0 = unperturbed_density(sine_flow());
    const auto sol = solve_stationary_quadrature(sine_flow(), unit_gamma(), 0.1);
    CHECK(sol.density.samples().minCoeff() > 0.0);
    CHECK(std::abs(integrate(sol.density.field()) - 1.0) <= 1e-12);
    const auto rep = residual(sol, rho0);
    CHECK(rep.l2 <= 0.1 * norm_l2(differentiate(rho0.field())));
    CHECK(rep.zero_mean_defect <= 1e-10);
  }

  TEST_CASE("flux is constant") {
    for (auto gamma : {unit_gamma(), cos_gamma()}) {
      const auto sol = solve_stationary_quadrature(sine_flow(), gamma, 0.05);
      CHECK(flux_relative_spread(sol, sine_flow().drift(), gamma) <= 1e-10);
      const auto flux = flux_profile(sol, sine_flow().drift(), gamma);
      CHECK(std::abs(flux.samples().mean() + sol.flux_constant) <= 1e-10 * std::abs(sol.flux_constant));
    }
  }

  TEST_CASE("finite differences agree with the quadrature solver") {
    const Grid1d fine(1024);
    const auto q = solve_stationary_quadrature(sine_flow(fine), cos_gamma(fine), 0.05);
    const auto fd = solve_stationary_fd(sine_flow(fine), cos_gamma(fine), 0.05, 1024);
    CHECK(norm_sup(q.density.field() - fd.density.field()) <= 1e-4);
    CHECK(std::isfinite(fd.condition_estimate));
    CHECK_FALSE(fd.clamped);
    CHECK(std::abs(fd.flux_constant - q.flux_constant) <= 1e-4 * std::abs(q.flux_constant));
  }

  TEST_CASE("finite-difference error decays at second order") {
    std::vector<double> hs, errs;
    for (int n : {128, 256, 512, 1024}) {
      const Grid1d g(n);
      const auto q = solve_stationary_quadrature(sine_flow(g), unit_gamma(g), 0.1);
      const auto fd = solve_stationary_fd(sine_flow(g), unit_gamma(g), 0.1, n);
      hs.push_back(1.0 / n);
      errs.push_back(norm_sup(q.density.field() - fd.density.field()));
    }
    CHECK(std::abs(fit_order(hs, errs).slope - 2.0) <= 0.3);
  }

  TEST_CASE("residual halves when eps halves") {
    const auto rho0 = unperturbed_density(sine_flow());
    const auto r1 = residual(solve_stationary_quadrature(sine_flow(), unit_gamma(), 0.1), rho0);
    const auto r2 = residual(solve_stationary_quadrature(sine_flow(), unit_gamma(), 0.05), rho0);
    const double ratio = r2.l2 / r1.l2;
    CHECK(ratio >= 0.4);
    CHECK(ratio <= 0.6);
  }

  TEST_CASE("identity residual") {
    const Flow1d h(Field1d::constant(kGrid, 1.0));
    const auto rep = residual(solve_stationary_quadrature(h, unit_gamma(), 0.1), unperturbed_density(h));
    CHECK(rep.l2 <= 1e-14);
    CHECK(rep.deriv_l2 <= 1e-12);
    CHECK(rep.sup <= 1e-14);
    CHECK(rep.zero_mean_defect <= 1e-14);
    const auto cert = certify_bounds(h, unit_gamma(), unperturbed_density(h), rep);
    CHECK(cert.l2_bound == 0.0);
    CHECK(cert.passed());
  }

  TEST_CASE("certificates with unit diffusion") {
    const auto rho0 = unperturbed_density(sine_flow());
    for (double eps : {0.2, 0.1, 0.05, 0.02, 0.01}) {
      const auto rep = residual(solve_stationary_quadrature(sine_flow(), unit_gamma(), eps), rho0);
      const auto cert = certify_bounds(sine_flow(), unit_gamma(), rho0, rep);
      CHECK(cert.alpha == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::isinf(cert.eps_threshold_l2));
      REQUIRE(cert.l2_applicable());
      CHECK(*cert.l2_ok);
      CHECK(cert.passed());
    }
  }

  TEST_CASE("certificates with variable diffusion") {
    const auto rho0 = unperturbed_density(sine_flow());
    const auto at = [&](double eps) {
      const auto rep = residual(solve_stationary_quadrature(sine_flow(), cos_gamma(), eps), rho0);
      return certify_bounds(sine_flow(), cos_gamma(), rho0, rep);
    };
    const auto cert = at(0.1);
    CHECK(std::abs(cert.max_gamma_prime - pi) <= 1e-4);
    CHECK(std::abs(cert.eps_threshold_l2 - 2.0 / pi) <= 1e-4);
    CHECK(cert.passed());
    const auto outside = at(1.0);
    CHECK_FALSE(outside.l2_applicable());
    CHECK(outside.passed());
  }

  TEST_CASE("norms of r are computed against rho_0 on the same grid") {
    const auto rho0 = unperturbed_density(sine_flow());
    const auto sol = solve_stationary_quadrature(sine_flow(), unit_gamma(), 0.05);
    const auto rep = residual(sol, rho0);
    CHECK(rep.sup <= rep.deriv_l2 + 1e-12);
    CHECK(rep.l2 <= rep.sup);
  }

  TEST_CASE("convergence study, asymptotic regime") {
    const std::vector<double> eps{0.2, 0.1, 0.05, 0.02, 0.01};
    const auto rep = convergence_study(sine_flow(), unit_gamma(), eps);
    CHECK(rep.certificates_passed());
    CHECK(rep.poincare_passed());
    CHECK(rep.sup_monotone());
    CHECK(rep.l2_fit.slope >= 0.9);
    CHECK(rep.l2_fit.slope <= 1.5);
    CHECK(rep.sup_fit.slope >= 0.9);
    // The derivative norm reaches first order only once eps is small.
    CHECK(rep.deriv_fit.interval_slopes.back() == doctest::Approx(1.0).epsilon(0.05));
    std::vector<double> tail_eps, tail_deriv;
    for (std::size_t i = 2; i < rep.rows.size(); ++i) {
      tail_eps.push_back(rep.rows[i].epsilon);
      tail_deriv.push_back(rep.rows[i].deriv_l2);
    }
    CHECK(fit_order(tail_eps, tail_deriv).slope >= 0.9);
    for (const auto& row : rep.rows) CHECK(row.flux_spread <= 1e-10);
  }

  TEST_CASE("convergence study with variable diffusion") {
    const std::vector<double> eps{0.2, 0.1, 0.05, 0.02, 0.01};
    const auto rep = convergence_study(sine_flow(), cos_gamma(), eps);
    CHECK(rep.certificates_passed());
    CHECK(rep.poincare_passed());
    CHECK(rep.sup_monotone());
    CHECK(rep.l2_fit.slope >= 0.9);
  }

  TEST_CASE("exact family") {
    const Flow1d h(Field1d::constant(kGrid, 1.0));
    const std::vector<double> eps{0.1, 0.05, 0.025};
    const auto rep = convergence_study(h, unit_gamma(), eps);
    CHECK(rep.l2_fit.exact);
    CHECK(std::isnan(rep.l2_fit.slope));
    for (const auto& row : rep.rows) CHECK(row.l2 <= 1e-14);
  }

  TEST_CASE("convergence study input errors") {
    CHECK_THROWS_AS(convergence_study(sine_flow(), unit_gamma(), std::vector<double>{0.1, 0.05}), InsufficientData);
    CHECK_THROWS_AS(convergence_study(sine_flow(), unit_gamma(), std::vector<double>{0.05, 0.1, 0.2}), InvalidInput);
    CHECK_THROWS_AS(convergence_study(sine_flow(), cos_gamma(), std::vector<double>{1.0, 0.5, 0.1}), InvalidInput);
  }

  TEST_CASE("precision exhaustion names a safe eps") {
    const Grid1d g(64);
    const auto h = sine_flow(g);
    double safe = 0.0;
    try {
      solve_stationary_quadrature(h, unit_gamma(g), 1e-4);
      FAIL("expected PrecisionExhausted");
    } catch (const PrecisionExhausted& e) {
      safe = e.smallest_safe_eps();
    }
    REQUIRE(safe > 1e-4);
    CHECK_NOTHROW(solve_stationary_quadrature(h, unit_gamma(g), safe * 1.01));
    CHECK_THROWS_AS(solve_stationary_quadrature(h, unit_gamma(g), 0.0), InvalidInput);
  }

  TEST_CASE("finite-difference grid requirements") {
    CHECK_THROWS_AS(solve_stationary_fd(sine_flow(), unit_gamma(), 0.1, 32), InvalidInput);
    CHECK_THROWS_AS(solve_stationary_fd(sine_flow(), unit_gamma(), 0.1, 129), InvalidInput);
  }

  TEST_CASE("solvers are deterministic") {
    const auto a = solve_stationary_quadrature(sine_flow(), cos_gamma(), 0.03);
    const auto b = solve_stationary_quadrature(sine_flow(), cos_gamma(), 0.03);
    CHECK(a.density.samples() == b.density.samples());
    const auto c = solve_stationary_fd(sine_flow(), cos_gamma(), 0.03, 256);
    const auto d = solve_stationary_fd(sine_flow(), cos_gamma(), 0.03, 256);
    CHECK(c.density.samples() == d.density.samples());
  }

  TEST_CASE("bin masses") {
    const auto rho0 = unperturbed_density(sine_flow());
    const auto m = bin_masses(rho0, 64);
    CHECK(std::abs(m.sum() - 1.0) <= 1e-13);
    const double ref = std::sqrt(3.0) * oracle::integrate([](double x) { return 1.0 / h_sine(x); }, 0.0, 1.0 / 64);
    CHECK(std::abs(m[0] - ref) <= 1e-10);
  }
}
