#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "stochstab/fields.hpp"
#include "stochstab/fields2d.hpp"
#include "stochstab/order.hpp"
#include "support/oracles.hpp"

using namespace stochstab;
using std::numbers::pi;

namespace {

Field1d sine_drift(Eigen::Index n) { return Field1d::sample(Grid1d(n), Rule1D::sine(2.0, 1.0)); }

}  // namespace

TEST_SUITE("fields") {
  TEST_CASE("grid rejects odd and tiny sizes") {
    CHECK_THROWS_AS(Grid1d(7), InvalidInput);
    CHECK_THROWS_AS(Grid1d(6), InvalidInput);
    CHECK_THROWS_AS(Grid1d(65), InvalidInput);
    const Grid1d g(8);
    CHECK(g.point(3) == 3.0 / 8.0);
    CHECK(g.spacing() == 0.125);
  }

  TEST_CASE("non-finite samples are rejected") {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(16);
    v[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Field1d(Grid1d(16), v), InvalidInput);
    v[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Field1d(Grid1d(16), v), InvalidInput);
    CHECK_THROWS_AS(Field1d(Grid1d(16), Eigen::VectorXd::Ones(8)), InvalidInput);
  }

  TEST_CASE("derivative of a constant vanishes") {
    const auto d = differentiate(Field1d::constant(Grid1d(32), 4.0));
    CHECK(norm_sup(d) <= 1e-14);
  }

  TEST_CASE("derivative of sin(2 pi x) on 64 points") {
    const Grid1d g(64);
    const auto d = differentiate(Field1d::sample(g, Rule1D::sine(0.0, 1.0)));
    const auto exact = Field1d::generate(g, [](double x) { return 2 * pi * std::cos(2 * pi * x); });
    CHECK(norm_sup(d - exact) <= 1e-10);
  }

  TEST_CASE("derivative of 1/(2 + sin 2 pi x) matches the symbolic derivative") {
    const Grid1d g(256);
    const auto f = Field1d::sample(g, Rule1D::reciprocal_sine(1.0, 2.0, 1.0));
    const auto exact = Field1d::generate(g, [](double x) {
      const double s = 2.0 + std::sin(2 * pi * x);
      return -2 * pi * std::cos(2 * pi * x) / (s * s);
    });
    CHECK(norm_sup(differentiate(f) - exact) <= 1e-8);
    const auto rule_derivative = Field1d::generate(g, [&](double x) { return f.rule()->derivative(x); });
    CHECK(norm_sup(rule_derivative - exact) <= 1e-13);
  }

  TEST_CASE("central differences converge at second order") {
    std::vector<double> hs, errs;
    for (int n : {32, 64, 128, 256}) {
      const Grid1d g(n);
      const auto f = Field1d::sample(g, Rule1D::reciprocal_sine(1.0, 2.0, 1.0));
      const auto exact = differentiate(f);
      hs.push_back(1.0 / n);
      errs.push_back(norm_sup(differentiate_fd(f) - exact));
    }
    CHECK(fit_order(hs, errs).slope == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("integrals") {
    CHECK(integrate(Field1d::constant(Grid1d(16), 3.0)) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(std::abs(integrate(Field1d::sample(Grid1d(64), Rule1D::sine(0.0, 1.0)))) <= 1e-15);
    const auto f = Field1d::sample(Grid1d(256), Rule1D::reciprocal_sine(1.0, 2.0, 1.0));
    const double closed_form = 1.0 / std::sqrt(3.0);
    const double quad = oracle::integrate([](double x) { return 1.0 / (2.0 + std::sin(oracle::two_pi * x)); }, 0, 1);
    CHECK(std::abs(quad - closed_form) <= 1e-12);
    CHECK(std::abs(integrate(f) - closed_form) <= 1e-12);
  }

  TEST_CASE("cumulative integrals") {
    const Grid1d g(64);
    const auto ramp = cumulative_integral(Field1d::constant(g, 1.0));
    CHECK((ramp.values() - g.points()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK_FALSE(ramp.periodic());

    const auto c = cumulative_integral(Field1d::sample(g, Rule1D::cosine(0.0, 1.0)));
    const Eigen::VectorXd expected = (2 * pi * g.points()).array().sin() / (2 * pi);
    CHECK((c.values() - expected).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(c.periodic());
    CHECK(c[0] == 0.0);

    const auto s = cumulative_integral(sine_drift(64));
    const double oracle_total = oracle::integrate([](double x) { return 2.0 + std::sin(oracle::two_pi * x); }, 0, 1);
    CHECK(std::abs(s.at(1.0) - 2.0) <= 1e-10);
    CHECK(std::abs(s.at(1.0) - oracle_total) <= 1e-10);
  }

  TEST_CASE("differentiating a mean-zero antiderivative recovers the integrand") {
    const Grid1d g(128);
    const auto f = Field1d::sample(g, Rule1D::trig(0.0, {{1, 0.3, -0.2}, {3, 0.0, 0.5}}));
    const auto cum = cumulative_integral(f);
    const Field1d big_f(g, cum.values());
    CHECK(norm_sup(differentiate(big_f) - f) <= 1e-10);
  }

  TEST_CASE("norms") {
    const auto two = Field1d::constant(Grid1d(16), 2.0);
    CHECK(norm_l2(two) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(norm_sup(two) == 2.0);
    const auto s = Field1d::sample(Grid1d(64), Rule1D::sine(0.0, 1.0));
    CHECK(std::abs(norm_l2(s) - 1.0 / std::sqrt(2.0)) <= 1e-10);
    CHECK(norm_sup(s) == doctest::Approx(1.0).epsilon(1e-12));

    const auto rho0 = Field1d::sample(Grid1d(256), Rule1D::reciprocal_sine(std::sqrt(3.0), 2.0, 1.0));
    const double quad = std::sqrt(oracle::integrate(
        [](double x) {
          const double v = std::sqrt(3.0) / (2.0 + std::sin(oracle::two_pi * x));
          return v * v;
        },
        0, 1));
    CHECK(std::abs(norm_l2(rho0) - quad) <= 1e-8);
  }

  TEST_CASE("integral of a derivative vanishes") {
    for (const auto& rule : {Rule1D::sine(2, 1), Rule1D::reciprocal_sine(1, 2, 1, 3), Rule1D::cosine(1, 0.5, 2)}) {
      const auto f = Field1d::sample(Grid1d(128), rule);
      CHECK(std::abs(integrate(differentiate(f))) <= 1e-12);
    }
  }

  TEST_CASE("grid refinement leaves integrals unchanged") {
    for (const auto& rule : {Rule1D::sine(2, 1), Rule1D::reciprocal_sine(std::sqrt(3.0), 2, 1), Rule1D::cosine(1, 0.5)}) {
      const double coarse = integrate(Field1d::sample(Grid1d(256), rule));
      const double fine = integrate(Field1d::sample(Grid1d(512), rule));
      CHECK(std::abs(coarse - fine) < 1e-10);
    }
  }

  TEST_CASE("rule resampling reproduces shared points exactly") {
    const auto coarse = Field1d::sample(Grid1d(64), Rule1D::reciprocal_sine(1, 2, 1));
    const auto fine = resample(coarse, Grid1d(256));
    for (Eigen::Index i = 0; i < 64; ++i) CHECK(fine[4 * i] == coarse[i]);
  }

  TEST_CASE("spectral resampling of a sampled field") {
    const Grid1d g(64);
    const auto f = Field1d::generate(g, [](double x) { return std::cos(2 * pi * 3 * x) + 0.5; });
    const auto up = resample(f, Grid1d(256));
    const auto exact = Field1d::generate(Grid1d(256), [](double x) { return std::cos(2 * pi * 3 * x) + 0.5; });
    CHECK(norm_sup(up - exact) <= 1e-12);
    CHECK(std::abs(evaluate(f, 0.123) - (std::cos(2 * pi * 3 * 0.123) + 0.5)) <= 1e-12);
  }

  TEST_CASE("grid mismatch is reported") {
    CHECK_THROWS_AS(Field1d::constant(Grid1d(16), 1.0) + Field1d::constant(Grid1d(32), 1.0), GridMismatch);
  }

  TEST_CASE("flow fields and diffusion coefficients") {
    const Grid1d g(64);
    const Flow1d h(Field1d::sample(g, Rule1D::sine(2, 1)));
    CHECK_FALSE(h.negated());
    CHECK(h.alpha() == doctest::Approx(1.0).epsilon(1e-3));

    const Flow1d neg(Field1d::sample(g, Rule1D::sine(-2, 1)));
    CHECK(neg.negated());
    CHECK(min_sample(neg.field()) > 0.0);
    CHECK(max_sample(neg.drift()) < 0.0);

    CHECK_THROWS_AS(Flow1d(Field1d::sample(g, Rule1D::sine(0, 1))), NonsingularityViolation);
    CHECK_THROWS_AS(Flow1d(Field1d::constant(g, 0.0)), NonsingularityViolation);
    CHECK_THROWS_AS(Diffusion1d(Field1d::sample(g, Rule1D::cosine(0.2, 0.5))), InvalidInput);
    CHECK(Diffusion1d(Field1d::constant(g, 2.0)).is_constant());
    CHECK_FALSE(Diffusion1d(Field1d::sample(g, Rule1D::cosine(1, 0.5))).is_constant());
  }

  TEST_CASE("rule parsing") {
    CHECK(Rule1D::parse("sin:2,1")(0.25) == doctest::Approx(3.0));
    CHECK(Rule1D::parse("cos:1,0.5,2")(0.5) == doctest::Approx(1.5));
    CHECK(Rule1D::parse("recip-sin:1,2,1")(0.0) == doctest::Approx(0.5));
    CHECK(Rule1D::parse("trig:1;1,0,2")(0.25) == doctest::Approx(3.0));
    CHECK(Rule1D::parse("const:4")(0.7) == 4.0);
    CHECK_THROWS_AS(Rule1D::parse("sine:2,1"), ConfigError);
    CHECK_THROWS_AS(Rule1D::parse("sin:2"), ConfigError);
    CHECK_THROWS_AS(Rule1D::parse("sin:2,x"), ConfigError);
    CHECK_THROWS_AS(Rule1D::parse("sin:2,1,1.5"), ConfigError);
    CHECK(Rule2D::parse("sinsin:1")(0.25, 0.25) == doctest::Approx(1.0));
    CHECK_THROWS_AS(Rule2D::parse("nope:1"), ConfigError);
  }

  TEST_CASE("2-D partial derivatives") {
    const Grid2d g(32);
    const auto psi = Field2d::sample(g, Rule2D::sin_sin(1.0));
    const auto px = partial_x(psi);
    const auto py = partial_y(psi);
    double err = 0.0;
    for (Eigen::Index j = 0; j < 32; ++j) {
      for (Eigen::Index i = 0; i < 32; ++i) {
        const double x = g.point(i), y = g.point(j);
        err = std::max(err, std::abs(px(i, j) - 2 * pi * std::cos(2 * pi * x) * std::sin(2 * pi * y)));
        err = std::max(err, std::abs(py(i, j) - 2 * pi * std::sin(2 * pi * x) * std::cos(2 * pi * y)));
      }
    }
    CHECK(err <= 1e-10);
    CHECK(std::abs(integrate(psi)) <= 1e-15);
    CHECK_THROWS_AS(Grid2d(16), InvalidInput);
  }
}
