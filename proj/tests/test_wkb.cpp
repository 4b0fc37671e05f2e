#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "semiwave/errors.hpp"
#include "semiwave/wkb.hpp"

using namespace semiwave;

namespace {

EnergySpec energy(double E0, double im) {
  EnergySpec e;
  e.E0 = E0;
  e.E1 = Complex(0.0, im);
  return e;
}

constexpr double kTurning = 1.1674453888;  // barrier_1d at E0 = 1/2

}  // namespace

TEST_CASE("free 1D chart") {
  const EnergySpec e = energy(2.0, 0.0);
  const LagrangianChart ch = build_chart(PotentialSpec::zero(1), e, vec1(0.0), 1e-3, 5.0);
  REQUIRE(ch.rays.size() == 2);
  CHECK(ch.radius == doctest::Approx(2.0));
  CHECK(ch.warnings.empty());
  for (std::size_t i = 0; i < 2; ++i) {
    const double sign = ch.rays[i].xi0(0) > 0 ? 1.0 : -1.0;
    for (double t : {0.01, 0.7, 3.3}) {
      const ChartSample s = ch.sample(i, t);
      CHECK(s.x(0) == doctest::Approx(sign * 2 * t).epsilon(1e-10));
      CHECK(s.xi(0) == doctest::Approx(sign * 2).epsilon(1e-10));
      CHECK(s.psi == doctest::Approx(2 * std::abs(s.x(0))).epsilon(1e-10));
      CHECK(s.jacobian == doctest::Approx(4.0).epsilon(1e-10));
      CHECK(s.maslov == 0);
    }
  }
}

TEST_CASE("free 2D chart") {
  const EnergySpec e = energy(2.0, 0.0);
  const LagrangianChart ch = build_chart(PotentialSpec::zero(2), e, vec2(0, 0), 1e-3, 4.0, 8);
  REQUIRE(ch.rays.size() == 8);
  for (std::size_t i = 0; i < ch.rays.size(); ++i) {
    const double th = ch.rays[i].theta;
    for (double t : {0.05, 1.0, 3.5}) {
      const ChartSample s = ch.sample(i, t);
      CHECK(s.x(0) == doctest::Approx(2 * t * std::cos(th)).epsilon(1e-9));
      CHECK(s.x(1) == doctest::Approx(2 * t * std::sin(th)).epsilon(1e-9));
      CHECK(s.jacobian == doctest::Approx(4 * t).epsilon(1e-9));
      CHECK(s.psi == doctest::Approx(4 * t).epsilon(1e-9));
    }
  }
}

TEST_CASE("chart sampling outside the integrated interval") {
  const LagrangianChart ch = build_chart(PotentialSpec::zero(1), energy(0.5, 0.0), vec1(0.0), 1e-3, 2.0);
  CHECK_THROWS(ch.sample(0, 2.5));
  CHECK_THROWS_AS(build_chart(PotentialSpec::zero(1), energy(0.5, 0.0), vec1(0.0), 0.0, 2.0), PreconditionError);
  CHECK_THROWS_AS(build_chart(PotentialSpec::zero(1), energy(0.5, 0.0), vec1(0.0), 2.0, 1.0), PreconditionError);
}

TEST_CASE("density identity along rays") {
  const SourceProfile s1 = SourceProfile::gaussian();
  const SourceProfile s2 = SourceProfile::gaussian(2, 0.7);
  for (double im : {0.0, 1.0}) {
    const EnergySpec e = energy(0.5, im);
    const LagrangianChart c1 = build_chart(PotentialSpec::barrier_1d(), e, vec1(0.0), 1e-3, 6.0);
    const LagrangianChart c2 = build_chart(PotentialSpec::gaussian_bump(2, 0.3, 0.7, vec2(1.0, 0.4)), e,
                                           vec2(0, 0), 1e-3, 5.0, 16);
    for (double t : {0.01, 0.3, 0.9}) {
      for (std::size_t i = 0; i < c1.rays.size(); ++i) {
        if (t < c1.valid_until(i)) CHECK(std::abs(density_ratio(c1, s1, e, i, t) - 1) < 1e-6);
      }
      for (std::size_t i = 0; i < c2.rays.size(); ++i) {
        if (t < c2.valid_until(i)) CHECK(std::abs(density_ratio(c2, s2, e, i, t) - 1) < 1e-6);
      }
    }
  }
  // damping appears as exp(-2 Im E1 t) in |b0|^2 J
  const EnergySpec e = energy(0.5, 1.0);
  const LagrangianChart ch = build_chart(PotentialSpec::zero(1), e, vec1(0.0), 1e-3, 2.0);
  const Complex b = principal_amplitude(ch, s1, e, 0, 0.5);
  CHECK(std::norm(b) * ch.sample(0, 0.5).jacobian / std::norm(s1.hat(1.0)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("small-t Jacobian approaches the free law linearly") {
  const EnergySpec e = energy(0.5, 0.0);
  const PotentialSpec pot = PotentialSpec::gaussian_bump(2, 0.3, 0.7, vec2(0.3, 0.2));
  const LagrangianChart ch = build_chart(pot, e, vec2(0, 0), 1e-4, 1.0, 8);
  const double r = ch.radius;
  for (std::size_t i = 0; i < ch.rays.size(); ++i) {
    const double d1 = std::abs(ch.sample(i, 0.02).jacobian / (r * r * 0.02) - 1);
    const double d2 = std::abs(ch.sample(i, 0.01).jacobian / (r * r * 0.01) - 1);
    CHECK(d1 < 0.05);
    // O(t): halving t halves the defect
    CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("phase gradient equals the ray momentum") {
  const EnergySpec e = energy(0.5, 0.0);
  const PotentialSpec pot = PotentialSpec::gaussian_bump(2, 0.3, 0.7, vec2(1.0, 0.4));
  const Vec base = vec2(0, 0);
  for (const Vec& x : {vec2(0.8, 0.1), vec2(-0.5, 0.9), vec2(1.2, -0.7)}) {
    const Located p = locate_2d(pot, e.E0, base, x, x.norm(), std::atan2(x(1), x(0)));
    CHECK((p.sample.x - x).norm() < 1e-10);
    const double d = 1e-3;
    for (int k = 0; k < 2; ++k) {
      auto psi_at = [&](double s) {
        Vec y = x;
        y(k) += s;
        return locate_2d(pot, e.E0, base, y, p.t, p.theta).sample.psi;
      };
      const double g = (-psi_at(2 * d) + 8 * psi_at(d) - 8 * psi_at(-d) + psi_at(-2 * d)) / (12 * d);
      CHECK(std::abs(g - p.sample.xi(k)) < 1e-5);
    }
  }
}

TEST_CASE("transport equation along rays") {
  const EnergySpec e = energy(0.5, 0.0);
  const LagrangianChart c1 = build_chart(PotentialSpec::barrier_1d(), e, vec1(0.0), 1e-3, 6.0);
  const LagrangianChart c2 = build_chart(PotentialSpec::gaussian_bump(2, 0.3, 0.7, vec2(1.0, 0.4)), e,
                                         vec2(0, 0), 1e-3, 4.0, 12);
  for (double t : {0.2, 0.8, 1.1}) {
    CHECK(std::abs(transport_defect(c1, 0, t)) < 1e-7);
    CHECK(std::abs(transport_defect(c1, 1, t)) < 1e-7);
  }
  for (std::size_t i = 0; i < c2.rays.size(); ++i) {
    for (double t : {0.3, 1.5, 3.0}) {
      if (t < c2.valid_until(i)) CHECK(std::abs(transport_defect(c2, i, t)) < 1e-7);
    }
  }
}

TEST_CASE("turning points are caustics") {
  const EnergySpec e = energy(0.5, 0.0);
  const LagrangianChart cut = build_chart(PotentialSpec::barrier_1d(), e, vec1(0.0), 1e-3, 6.0);
  REQUIRE_FALSE(cut.warnings.empty());
  const std::size_t right = cut.rays[0].xi0(0) > 0 ? 0 : 1;
  const double tc = cut.valid_until(right);
  CHECK(cut.sample(right, tc).x(0) == doctest::Approx(kTurning).epsilon(1e-7));
  CHECK(std::abs(cut.sample(right, tc).xi(0)) < 1e-5);
  CHECK_THROWS_AS(cut.sample(right, tc + 0.1), CausticError);
  CHECK_THROWS_AS(principal_amplitude(cut, SourceProfile::gaussian(), e, right, tc), CausticError);
  CHECK(cut.valid_until(1 - right) == doctest::Approx(6.0));

  ChartOptions through;
  through.through_caustics = true;
  const LagrangianChart full = build_chart(PotentialSpec::barrier_1d(), e, vec1(0.0), 1e-3, 6.0, 2, through);
  REQUIRE(full.rays[right].caustics.size() == 1);
  CHECK(full.rays[right].caustics[0] == doctest::Approx(tc).epsilon(1e-8));
  const ChartSample after = full.sample(right, tc + 1.0);
  CHECK(after.maslov == 1);
  CHECK(after.xi(0) < 0.0);
  CHECK(std::abs(density_ratio(full, SourceProfile::gaussian(), e, right, tc + 1.0) - 1) < 1e-6);
}

TEST_CASE("WKB field against the solver") {
  const SourceProfile s = SourceProfile::gaussian();
  const EnergySpec e = energy(0.5, 1.0);
  ChartOptions through;
  through.through_caustics = true;
  struct Case {
    PotentialSpec pot;
    double a, b;
    int multiplicity;
  };
  for (const Case& c : {Case{PotentialSpec::zero(1), 0.5, 1.5, 1}, Case{PotentialSpec::barrier_1d(), 0.5, 0.9, 2}}) {
    const LagrangianChart ch = build_chart(c.pot, e, vec1(0.0), 1e-3, 12.0, 2, through);
    std::vector<double> err;
    for (double h : {0.04, 0.02}) {
      const Grid1D g = make_grid(c.pot, e, s, h);
      const WaveField u = solve(c.pot, e, s, h, g);
      const WkbField w = wkb_field(ch, s, e, h, grid_points_in(g, c.a, c.b));
      CHECK(w.multiplicity.front() == c.multiplicity);
      err.push_back(relative_error(w, u));
    }
    CHECK(err[0] < 0.2);
    CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.25));
  }
}

TEST_CASE("WKB field refuses caustic neighbourhoods") {
  const SourceProfile s = SourceProfile::gaussian();
  const EnergySpec e = energy(0.5, 0.0);
  ChartOptions through;
  through.through_caustics = true;
  const LagrangianChart ch = build_chart(PotentialSpec::barrier_1d(), e, vec1(0.0), 1e-3, 12.0, 2, through);
  Vec pts(3);
  pts << 0.5, kTurning, 1.0;
  CHECK_THROWS_AS(wkb_field(ch, s, e, 0.01, pts), CausticError);
  Vec ok(2);
  ok << 0.5, 1.0;
  CHECK_NOTHROW(wkb_field(ch, s, e, 0.01, ok));
}

TEST_CASE("2D WKB value in free space") {
  // far field of the outgoing 2D Green function convolved with S_h:
  // u ~ i (2 pi)^{-1/2} e^{-i pi/4} S^(xi0) (r^2 t)^{-1/2} h^{-1/2} e^{i r |x| / h}
  const SourceProfile s = SourceProfile::gaussian(2);
  const EnergySpec e = energy(0.5, 0.0);
  const double h = 0.01;
  const Vec x = vec2(1.2, -0.5);
  const Located p = locate_2d(PotentialSpec::zero(2), e.E0, vec2(0, 0), x, 1.0, 0.0);
  CHECK(p.t == doctest::Approx(x.norm()).epsilon(1e-12));
  const Complex v = wkb_value_2d(p, s, e, 1.0, h);
  const Complex expected = Complex(0, 1) / std::sqrt(2 * M_PI) * std::exp(Complex(0, -M_PI / 4)) *
                           std::exp(Complex(0, x.norm() / h)) / std::sqrt(x.norm() * h) *
                           std::exp(-0.5);
  CHECK(std::abs(v - expected) < 1e-10 * std::abs(expected));
}
