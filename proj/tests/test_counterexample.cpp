#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "semiwave/counterexample.hpp"
#include "semiwave/errors.hpp"
#include "semiwave/raymeasure.hpp"

using namespace semiwave;
using boost::math::quadrature::gauss_kronrod;

namespace {

EnergySpec energy(double im = 0.0) {
  EnergySpec e;
  e.E0 = 0.5;
  e.E1 = Complex(0.0, im);
  return e;
}

// barrier_1d: V = exp(-(x - 2)^2)
double V(double x) { return std::exp(-(x - 2) * (x - 2)); }
double k(double x) { return std::sqrt(2 * (0.5 - V(x))); }

Observable probe() { return Observable::product_1d("q", bump_profile(-1.5, 1.0), bump_profile(-1.0, 0.5)); }

}  // namespace

TEST_CASE("loop geometry of the barrier") {
  const TwoBranchModel m = build_model(PotentialSpec::barrier_1d(), energy(), SourceProfile::gaussian());
  const double xt = 2 - std::sqrt(std::log(2.0));
  boost::math::quadrature::tanh_sinh<double> ts;
  CHECK(m.xi0 == doctest::Approx(k(0.0)).epsilon(1e-12));
  CHECK(m.turning_point == doctest::Approx(xt).epsilon(1e-9));
  CHECK(m.action == doctest::Approx(2 * ts.integrate(k, 0.0, xt)).epsilon(1e-9));
  CHECK(m.loop_time == doctest::Approx(2 * ts.integrate([](double x) { return 1 / k(x); }, 0.0, xt)).epsilon(1e-7));
  CHECK(m.maslov == 1);
  CHECK(m.theta_predicted == doctest::Approx(-M_PI / 2));
  CHECK(m.momentum(-1.0) == doctest::Approx(-k(-1.0)));
}

TEST_CASE("no loop above the barrier") {
  EnergySpec e = energy();
  e.E0 = 1.5;
  CHECK_THROWS_AS(build_model(PotentialSpec::barrier_1d(), e, SourceProfile::gaussian()), DomainError);
  CHECK_THROWS_AS(build_model(PotentialSpec::zero(1), energy(), SourceProfile::gaussian()), DomainError);
}

TEST_CASE("pairing parts against direct quadrature") {
  const auto s = SourceProfile::gaussian();
  const Observable q = probe();
  for (double gamma : {0.0, 0.5}) {
    const TwoBranchModel m = build_model(PotentialSpec::barrier_1d(), energy(gamma), s);
    const double S2 = std::norm(s.hat(m.xi0));
    auto t_d = [&](double x) {
      return gauss_kronrod<double, 31>::integrate([](double y) { return 1 / k(y); }, x, 0.0, 10, 1e-14);
    };
    auto dens = [&](double x, double extra) {
      return q(vec1(x), vec1(-k(x))) * S2 * std::exp(-2 * gamma * (t_d(x) + extra)) / (k(x) * m.xi0);
    };
    const double direct = gauss_kronrod<double, 61>::integrate([&](double x) { return dens(x, 0); }, -2.5, -0.5, 10, 1e-13);
    const double refl = gauss_kronrod<double, 61>::integrate([&](double x) { return dens(x, m.loop_time); }, -2.5, -0.5, 10, 1e-13);
    const PairingParts p = pairing_parts(m, q);
    CHECK(p.mean == doctest::Approx(direct + refl).epsilon(1e-8));
    CHECK(p.cross == doctest::Approx(std::sqrt(direct * refl)).epsilon(1e-8));
    // the ray measure sees the same two branches without interference
    const MeasurePairing ray = pair(q, PotentialSpec::barrier_1d(), energy(gamma), s, vec1(0.0));
    CHECK(ray.value == doctest::Approx(p.mean).epsilon(1e-7));
  }
}

TEST_CASE("observable preconditions") {
  const TwoBranchModel m = build_model(PotentialSpec::barrier_1d(), energy(), SourceProfile::gaussian());
  CHECK_THROWS_AS(pairing_parts(m, Observable::product_1d("q", bump_profile(-1.5, 1.0), bump_profile(1.0, 0.5))),
                  PreconditionError);
  CHECK_THROWS_AS(pairing_parts(m, Observable::product_1d("q", bump_profile(0.2, 0.5), bump_profile(-1.0, 0.5))),
                  PreconditionError);
  CHECK_THROWS_AS(pairing_parts(m, Observable::product_1d("q", bump_profile(-6.0, 0.5), bump_profile(-1.0, 0.5))),
                  PreconditionError);
}

TEST_CASE("subsequences select the extremes of the cosine") {
  const TwoBranchModel m = build_model(PotentialSpec::barrier_1d(), energy(), SourceProfile::gaussian());
  const Observable q = probe();
  const PairingParts p = pairing_parts(m, q);
  for (double nu : {1.0, 0.0, -1.0, 0.3}) {
    const auto hk = subsequence_limits(m, nu, 4, 0.0118);
    REQUIRE(hk.size() == 4);
    for (std::size_t i = 0; i < hk.size(); ++i) {
      CHECK(hk[i] <= 0.0118);
      if (i > 0) CHECK(hk[i] < hk[i - 1]);
      CHECK(std::cos(m.theta + m.action / hk[i]) == doctest::Approx(nu).epsilon(1e-9));
      CHECK(predicted_pairing(m, q, hk[i]) == doctest::Approx(p.mean + 2 * p.cross * nu).epsilon(1e-9));
      if (i > 0) {
        // consecutive k
        CHECK(m.action / hk[i] - m.action / hk[i - 1] == doctest::Approx(2 * M_PI));
      }
    }
    // the first one is the largest allowed
    CHECK(m.action / hk[0] - 2 * M_PI < m.action / 0.0118);
  }
  CHECK_THROWS(subsequence_limits(m, 1.5, 3, 0.01));
}

TEST_CASE("phase calibration recovers a shifted phase") {
  const TwoBranchModel m = build_model(PotentialSpec::barrier_1d(), energy(), SourceProfile::gaussian());
  const Observable q = probe();
  TwoBranchModel shifted = m;
  shifted.theta = m.theta_predicted + 0.2;
  for (double h : {0.0111, 0.0103}) {
    const double v = predicted_pairing(shifted, q, h);
    const double th = calibrate_phase(m, q, h, v);
    CHECK(std::remainder(th - shifted.theta, 2 * M_PI) == doctest::Approx(0.0).epsilon(1e-7));
  }
}

TEST_CASE("oscillation fit on synthetic data") {
  std::mt19937 rng(20261016);
  std::normal_distribution<double> noise(0.0, 1e-4);
  std::vector<double> h, v;
  for (int i = 0; i < 40; ++i) {
    h.push_back(1.0 / (85.0 + 15.0 * i / 39.0));
    v.push_back(0.9 + 0.4 * std::cos(1.8 / h.back() + 0.3) + noise(rng));
  }
  const OscillationFit fit = fit_oscillation(h, v);
  CHECK(fit.omega == doctest::Approx(1.8).epsilon(1e-4));
  CHECK(fit.mean == doctest::Approx(0.9).epsilon(1e-3));
  CHECK(std::abs(fit.amplitude) == doctest::Approx(0.4).epsilon(1e-3));
  CHECK(fit.residual < 3e-4);
  CHECK(fit.verdict == Verdict::holds);

  std::vector<double> junk;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < h.size(); ++i) junk.push_back(u(rng));
  CHECK(fit_oscillation(h, junk).verdict == Verdict::inconclusive);
  CHECK_THROWS(fit_oscillation({0.01, 0.02}, {1.0, 2.0}));
}

TEST_CASE("solver pairing follows the two-branch prediction") {
  const auto s = SourceProfile::gaussian();
  const TwoBranchModel m = build_model(PotentialSpec::barrier_1d(), energy(), s);
  const Observable q = probe();
  const auto hk = subsequence_limits(m, 1.0, 1, 0.0118);
  const auto values = pairing_scan(q, PotentialSpec::barrier_1d(), energy(), s, {hk[0]});
  const double pred = predicted_pairing(m, q, hk[0]);
  CHECK(values[0] == doctest::Approx(pred).epsilon(0.05));
}
