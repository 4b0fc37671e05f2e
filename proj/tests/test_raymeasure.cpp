#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "semiwave/errors.hpp"
#include "semiwave/raymeasure.hpp"

using namespace semiwave;
using boost::math::quadrature::gauss_kronrod;

namespace {

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

EnergySpec damped(double im) {
  EnergySpec e;
  e.E0 = 0.5;
  e.E1 = Complex(0.0, im);
  return e;
}

Observable box1(double xc, double xh, double kc, double kh) {
  return Observable::product_1d("q", bump_profile(xc, xh), bump_profile(kc, kh));
}

}  // namespace

TEST_CASE("free 1D pairing against the explicit flow") {
  const SourceProfile s = SourceProfile::gaussian();
  const Observable q = box1(1.5, 0.5, 1.0, 0.5);
  for (double gamma : {1.0, 0.25}) {
    const MeasurePairing m = pair(q, PotentialSpec::zero(1), damped(gamma), s, vec1(0.0));
    // x(t) = t, xi = 1 on the rightgoing ray; the leftgoing one never meets q
    const double oracle = gauss_kronrod<double, 61>::integrate(
                              [&](double t) { return bump((t - 1.5) / 0.5) * std::exp(-2 * gamma * t); },
                              1.0, 2.0, 20, 1e-15) *
                          std::norm(s.hat(1.0));
    CHECK(m.value == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(m.error_estimate < 1e-8);
    CHECK(m.nodes == 2);
  }
}

TEST_CASE("undamped pairing converges when rays escape") {
  const SourceProfile s = SourceProfile::gaussian();
  const MeasurePairing m = pair(box1(1.5, 0.5, 1.0, 0.5), PotentialSpec::zero(1), damped(0.0), s, vec1(0.0));
  CHECK(m.value > 0.0);
  for (const auto& d : m.directions) CHECK(d.escaped);
}

TEST_CASE("free 2D pairing against polar quadrature") {
  const SourceProfile s = SourceProfile::gaussian(2);
  const Observable q = Observable::bump("q", vec2(1.5, 0.3), vec2(0.6, 0.6), vec2(0.9, 0.2), vec2(0.4, 0.4));
  RayQuadrature quad;
  quad.n_dirs = 128;
  const MeasurePairing m = pair(q, PotentialSpec::zero(2), damped(1.0), s, vec2(0, 0), quad);
  auto inner = [&](double th) {
    const Vec w = vec2(std::cos(th), std::sin(th));
    return gauss_kronrod<double, 31>::integrate(
        [&](double t) { return q(t * w, w) * std::exp(-2 * t); }, 0.0, 3.0, 15, 1e-13);
  };
  const double oracle = gauss_kronrod<double, 61>::integrate(inner, -0.8, 1.2, 15, 1e-12) *
                        std::exp(-1.0) / (2 * M_PI);
  CHECK(m.value == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("measure vanishes off the energy shell") {
  const SourceProfile s = SourceProfile::gaussian();
  for (const auto& pot : {PotentialSpec::zero(1), PotentialSpec::barrier_1d()}) {
    const MeasurePairing m = pair(box1(1.0, 0.5, 2.0, 0.5), pot, damped(1.0), s, vec1(0.0));
    CHECK(std::abs(m.value) <= 1e-12);
  }
}

TEST_CASE("measure vanishes in the incoming zone") {
  const SourceProfile s = SourceProfile::gaussian();
  const Observable q = box1(3.0, 0.5, -1.0, 0.5);
  for (double x : {2.6, 3.0, 3.4}) {
    for (double k : {-1.4, -1.0, -0.6}) CHECK(in_incoming_zone(vec1(x), vec1(k), 2.0));
  }
  const MeasurePairing m = pair(q, PotentialSpec::zero(1), damped(1.0), s, vec1(0.0));
  CHECK(std::abs(m.value) <= 1e-12);
  CHECK_FALSE(in_incoming_zone(vec1(3.0), vec1(1.0), 2.0));
  CHECK_FALSE(in_incoming_zone(vec1(1.0), vec1(-1.0), 2.0));
}

TEST_CASE("Liouville identity on several observables") {
  const SourceProfile s = SourceProfile::gaussian();
  const std::vector<Observable> qs{box1(0.3, 0.5, 1.0, 0.4), box1(0.0, 0.4, -0.8, 0.6),
                                   box1(1.0, 0.8, 0.5, 1.0), box1(-0.5, 1.0, 0.0, 1.5),
                                   Observable::combine(1.0, box1(0.2, 0.3, 1.0, 0.3), -2.0,
                                                       box1(-0.2, 0.3, -1.0, 0.3))};
  for (const auto& pot : {PotentialSpec::zero(1), PotentialSpec::barrier_1d()}) {
    for (double gamma : {0.0, 1.0}) {
      for (const auto& q : qs) {
        const LiouvilleResidual r = liouville_residual(q, pot, damped(gamma), s, vec1(0.0));
        CHECK(std::abs(r.residual) <= 1e-6);
      }
    }
  }
  // source term alone is not zero, so the check is not vacuous
  CHECK(std::abs(liouville_residual(qs[0], PotentialSpec::zero(1), damped(1.0), s, vec1(0.0)).source) > 1e-2);
}

TEST_CASE("Liouville identity in 2D") {
  const SourceProfile s = SourceProfile::gaussian(2);
  const Observable q = Observable::bump("q", vec2(0.2, 0.1), vec2(0.7, 0.7), vec2(0.6, 0.3), vec2(0.8, 0.8));
  RayQuadrature quad;
  quad.n_dirs = 128;
  const LiouvilleResidual r = liouville_residual(
      q, PotentialSpec::gaussian_bump(2, 0.3, 0.7, vec2(1.0, 0.4)), damped(0.5), s, vec2(0, 0), quad);
  CHECK(std::abs(r.residual) <= 1e-6);
  CHECK(std::abs(r.source) > 1e-3);
}

TEST_CASE("undamped trapped rays diverge") {
  const SourceProfile s = SourceProfile::gaussian();
  CHECK_THROWS_AS(pair(box1(0.5, 0.5, 0.5, 0.5), PotentialSpec::harmonic_test(1), damped(0.0), s, vec1(0.0)),
                  DivergenceError);
}

TEST_CASE("near-source pairing") {
  const SourceProfile s = SourceProfile::gaussian();
  const Observable q = Observable::product_1d("q", plateau_profile(-0.5, 0.5, 0.25), plateau_profile(-8, 8, 0.5));
  CHECK(mu1_pair(q, s) == doctest::Approx(std::sqrt(M_PI) / (2 * M_PI)).epsilon(1e-9));

  const SourceProfile s2 = SourceProfile::gaussian(2, 1.0);
  const Observable q2 = Observable::bump("q2", vec2(0, 0), vec2(1, 1), vec2(0, 0), vec2(12, 12));
  // the bump is not flat, so compare with a direct 2D quadrature
  auto inner = [&](double a) {
    return gauss_kronrod<double, 61>::integrate(
        [&](double b) { return q2(vec2(0, 0), vec2(a, b)) * std::exp(-a * a - b * b); }, -12, 12, 15, 1e-13);
  };
  const double oracle = gauss_kronrod<double, 61>::integrate(inner, -12, 12, 15, 1e-12) / (4 * M_PI * M_PI);
  CHECK(mu1_pair(q2, s2) == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("two sources in free 1D space cross each other") {
  const SourceProfile s = SourceProfile::gaussian();
  const Observable q = box1(6.5, 0.5, 1.0, 0.5);
  const auto two = two_source_pair(q, PotentialSpec::zero(1), damped(1.0), {s, s}, {vec1(0.0), vec1(5.0)});
  CHECK_FALSE(two.unique);
  REQUIRE_FALSE(two.warnings.empty());
  CHECK(two.warnings[0].find("H8 fails") != std::string::npos);
  const double a = pair(q, PotentialSpec::zero(1), damped(1.0), s, vec1(0.0)).value;
  const double b = pair(q, PotentialSpec::zero(1), damped(1.0), s, vec1(5.0)).value;
  CHECK(two.value == doctest::Approx(a + b));
  // the far source dominates at x = 6.5
  CHECK(b > 100 * a);
}

TEST_CASE("two separated sources in 2D") {
  const SourceProfile s = SourceProfile::gaussian(2);
  const Observable q = Observable::bump("q", vec2(1.0, 0.0), vec2(0.5, 0.5), vec2(1.0, 0.0), vec2(0.5, 0.5));
  const auto two = two_source_pair(q, PotentialSpec::zero(2), damped(1.0), {s, s}, {vec2(0, 0), vec2(0, 3)});
  CHECK(two.value > 0.0);
  // a straight line through two points is a single direction: measure zero on the circle
  for (const auto& w : two.warnings) CHECK(w.find("H8 fails") == std::string::npos);
}
