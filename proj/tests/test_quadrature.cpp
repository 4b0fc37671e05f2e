#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

#include "semiwave/errors.hpp"
#include "semiwave/quadrature.hpp"

using namespace semiwave;

TEST_CASE("smooth integrands") {
  const auto r = integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
  CHECK(r.error < 1e-10);

  // gaussian against the error function
  const auto g = integrate([](double x) { return std::exp(-x * x); }, -1.0, 2.5);
  const double oracle = 0.5 * std::sqrt(M_PI) * (boost::math::erf(2.5) + boost::math::erf(1.0));
  CHECK(g.value == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("reversed limits change the sign") {
  const auto a = integrate([](double x) { return x * x; }, 0.0, 2.0);
  const auto b = integrate([](double x) { return x * x; }, 2.0, 0.0);
  CHECK(a.value == doctest::Approx(8.0 / 3.0));
  CHECK(b.value == doctest::Approx(-8.0 / 3.0));
}

TEST_CASE("oscillatory complex integrand") {
  const double k = 40.0;
  const auto r = integrate_complex(
      [k](double x) { return std::exp(Complex(0.0, k * x)); }, 0.0, 1.0);
  const Complex exact = (std::exp(Complex(0.0, k)) - 1.0) / Complex(0.0, k);
  CHECK(std::abs(r.value - exact) < 1e-12);
}

TEST_CASE("iterated 2D rule") {
  const auto r = integrate_2d([](double x, double y) { return std::exp(-x * x - y * y); }, -3.0,
                              3.0, -2.0, 1.0);
  const double ex = std::sqrt(M_PI) * boost::math::erf(3.0);
  const double ey = 0.5 * std::sqrt(M_PI) * (boost::math::erf(1.0) + boost::math::erf(2.0));
  CHECK(r.value == doctest::Approx(ex * ey).epsilon(1e-9));
}

TEST_CASE("endpoint singularity within the panel budget") {
  const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-8, 1e-8);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("non-convergence is an error") {
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(1.0 / x) / x; }, 1e-9, 1.0, 1e-14,
                            1e-14, 20),
                  QuadratureError);
}
