#include <doctest.h>

#include <cmath>
#include <vector>

#include "stochstab/errors.hpp"
#include "stochstab/order.hpp"

using namespace stochstab;

TEST_SUITE("order") {
  TEST_CASE("metric equal to eps") {
    const std::vector<double> eps{0.2, 0.1, 0.05, 0.02};
    const auto fit = fit_order(eps, eps);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fit.intercept) <= 1e-12);
    CHECK(fit.interval_slopes.size() == 3);
  }

  TEST_CASE("metric 3 eps^2") {
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
    std::vector<double> m;
    for (double e : eps) m.push_back(3.0 * e * e);
    const auto fit = fit_order(eps, m);
    CHECK(std::abs(fit.slope - 2.0) <= 1e-10);
    CHECK(std::abs(fit.intercept - std::log(3.0)) <= 1e-10);
    for (double s : fit.interval_slopes) CHECK(std::abs(s - 2.0) <= 1e-10);
  }

  TEST_CASE("nonpositive metrics are excluded and flagged") {
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05, 0.025};
    const std::vector<double> m{0.4, 0.0, 0.1, -1.0, 0.025};
    const auto fit = fit_order(eps, m);
    CHECK(fit.excluded == std::vector<std::size_t>{1, 3});
    CHECK(fit.slope == doctest::Approx(1.0));
  }

  TEST_CASE("too few valid pairs") {
    const std::vector<double> eps{0.4, 0.2, 0.1};
    CHECK_THROWS_AS(fit_order(eps, std::vector<double>{1.0, 0.0, 0.5}), InsufficientData);
    CHECK_THROWS_AS(fit_order(std::vector<double>{0.1, 0.05}, std::vector<double>{1.0, 0.5}), InsufficientData);
  }

  TEST_CASE("all-zero family is exact") {
    const std::vector<double> eps{0.1, 0.05, 0.025};
    const auto fit = fit_order_or_exact(eps, std::vector<double>{0.0, 0.0, 0.0});
    CHECK(fit.exact);
    CHECK(std::isnan(fit.slope));
  }
}
