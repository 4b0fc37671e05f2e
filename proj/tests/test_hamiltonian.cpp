#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "semiwave/errors.hpp"
#include "semiwave/hamiltonian.hpp"
#include "semiwave/potential.hpp"

using namespace semiwave;

namespace {

double energy(const PotentialSpec& pot, const PhasePointd& p) {
  return 0.5 * p.xi.squaredNorm() + pot.value(p.x);
}

EnergySpec at_energy(double E0, double im = 0.0) {
  EnergySpec e;
  e.E0 = E0;
  e.E1 = Complex(0.0, im);
  return e;
}

}  // namespace

TEST_CASE("potential derivatives match finite differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  const std::vector<PotentialSpec> pots{
      PotentialSpec::gaussian_bump(2, 1.3, 0.8, vec2(0.5, -0.25)),
      PotentialSpec::harmonic_test(2, 1.5)};
  for (const auto& pot : pots) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = vec2(U(rng), U(rng));
      const double d = 1e-5;
      Vec fd(2);
      Mat fh(2, 2);
      for (int i = 0; i < 2; ++i) {
        Vec e = Vec::Zero(2);
        e(i) = d;
        fd(i) = (pot.value(x + e) - pot.value(x - e)) / (2 * d);
        fh.col(i) = (pot.gradient(x + e) - pot.gradient(x - e)) / (2 * d);
      }
      CHECK((fd - pot.gradient(x)).norm() < 1e-8);
      CHECK((fh - pot.hessian(x)).norm() < 1e-7);
    }
  }
  const PotentialSpec ramp = PotentialSpec::ramp_1d();
  for (double x : {-1.0, 1.5, 2.7, 4.2}) {
    const double d = 1e-5;
    CHECK(ramp.derivative(x) ==
          doctest::Approx((ramp.value(vec1(x + d)) - ramp.value(vec1(x - d))) / (2 * d)).epsilon(1e-6));
  }
}

TEST_CASE("family parsing and parameter checks") {
  for (auto f : {PotentialFamily::zero, PotentialFamily::gaussian_bump, PotentialFamily::barrier_1d,
                 PotentialFamily::harmonic_test, PotentialFamily::double_well,
                 PotentialFamily::ramp_1d, PotentialFamily::tabulated}) {
    CHECK(parse_potential_family(to_string(f)) == f);
  }
  CHECK_THROWS_AS(parse_potential_family("coulomb"), ConfigError);
  CHECK_THROWS_AS(PotentialSpec(PotentialFamily::barrier_1d, 1, {1.0}), ConfigError);
  CHECK_THROWS_AS(PotentialSpec(PotentialFamily::barrier_1d, 2, {1.0, 1.0, 2.0}), ConfigError);
}

TEST_CASE("tabulated potential follows its table") {
  std::vector<double> x, v;
  for (int i = 0; i <= 120; ++i) {
    x.push_back(-6.0 + 0.1 * i);
    v.push_back(std::exp(-x.back() * x.back()));
  }
  const PotentialSpec tab = PotentialSpec::tabulated(x, v);
  for (double s : {-1.23, 0.0, 0.41, 2.2}) {
    CHECK(tab.value(vec1(s)) == doctest::Approx(std::exp(-s * s)).epsilon(1e-3));
  }
  CHECK(tab.value(vec1(10.0)) == 0.0);
  CHECK_THROWS_AS(PotentialSpec::tabulated({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}), ConfigError);
}

TEST_CASE("energy validation cites the hypothesis") {
  const PotentialSpec free = PotentialSpec::zero(1);
  try {
    at_energy(0.5, -1.0).validate(free);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("H6") != std::string::npos);
  }
  try {
    at_energy(0.5).validate(PotentialSpec::gaussian_bump(1, 1.0, 1.0, vec1(0.0)));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("H3") != std::string::npos);
  }
  CHECK_NOTHROW(at_energy(0.5, 1.0).validate(free));
}

TEST_CASE("free flow is a straight line") {
  const PotentialSpec free = PotentialSpec::zero(2);
  const PhasePointd start(vec2(0.5, -1.0), vec2(0.6, 0.8));
  const Trajectory tr = flow(free, start, 3.0);
  CHECK((tr.end().x - (start.x + 3.0 * start.xi)).norm() < 1e-10);
  CHECK((tr.end().xi - start.xi).norm() < 1e-12);
  CHECK(tr.action.back() == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("energy is conserved along random flows") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  const PotentialSpec pot = PotentialSpec::gaussian_bump(2, 1.0, 1.0, vec2(1.0, 0.5));
  for (int trial = 0; trial < 25; ++trial) {
    const PhasePointd start(vec2(U(rng), U(rng)), vec2(U(rng), U(rng)));
    const Trajectory tr = flow(pot, start, 15.0, 1e-11);
    const double p0 = energy(pot, start);
    for (const auto& p : tr.points) CHECK(std::abs(energy(pot, p) - p0) <= 1e-9 * (1.0 + std::abs(p0)));
    CHECK(tr.energy_drift <= 1e-9 * (1.0 + std::abs(p0)));
  }
}

TEST_CASE("flow is reversible") {
  const PotentialSpec pot = PotentialSpec::barrier_1d();
  const PhasePointd start(vec1(0.0), vec1(0.9));
  const Trajectory fwd = flow(pot, start, 4.0, 1e-12);
  const Trajectory back = flow(pot, fwd.end().reversed(), 4.0, 1e-12);
  CHECK(std::abs(back.end().x(0) - start.x(0)) < 1e-9);
  CHECK(std::abs(back.end().xi(0) + start.xi(0)) < 1e-9);
}

TEST_CASE("harmonic turning points and Maslov count") {
  const PotentialSpec osc = PotentialSpec::harmonic_test(1, 1.0);
  const Trajectory tr = flow(osc, PhasePointd(vec1(0.0), vec1(1.0)), 10.0, 1e-12);
  // xi = cos t vanishes at pi/2 + k pi
  REQUIRE(tr.turning_count == 3);
  for (int k = 0; k < 3; ++k) CHECK(tr.turning_times[k] == doctest::Approx(M_PI / 2 + k * M_PI).epsilon(1e-10));
  CHECK(maslov_count_1d(tr) == 3);
}

TEST_CASE("barrier loop action against a direct quadrature") {
  const PotentialSpec pot = PotentialSpec::barrier_1d(1.0, 1.0, 2.0);
  const double E0 = 0.5;
  const double xt = 2.0 - std::sqrt(std::log(2.0));
  auto k = [&](double x) { return std::sqrt(std::max(0.0, 2.0 * (E0 - std::exp(-(x - 2) * (x - 2))))); };
  const double oracle = 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(k, 0.0, xt, 20, 1e-15);
  CHECK(oracle == doctest::Approx(1.8051002639671692).epsilon(1e-12));

  FlowOptions opts;
  opts.tol = 1e-12;
  opts.stop_event = [](const DenseSegment& seg) -> std::optional<double> {
    if (seg.t0 > 0.0 && seg(seg.t0)(0) > 0.0 && seg(seg.t1())(0) <= 0.0) {
      return find_root([&](double t) { return seg(t)(0); }, seg.t0, seg.t1());
    }
    return std::nullopt;
  };
  const Trajectory loop = flow(pot, PhasePointd(vec1(0.0), vec1(std::sqrt(2 * (E0 - pot.value(vec1(0.0)))))), 50.0, opts);
  CHECK(action_integral(loop) == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(maslov_count_1d(loop) == 1);
  CHECK(loop.at(loop.turning_times[0]).x(0) == doctest::Approx(xt).epsilon(1e-10));
}

TEST_CASE("degenerate turning point is refused") {
  // a ray aimed at the top of a barrier at exactly its height creeps toward it
  const PotentialSpec pot = PotentialSpec::barrier_1d(0.5, 1.0, 2.0);
  const double xi0 = std::sqrt(2 * (0.5 - pot.value(vec1(0.0))));
  const Trajectory creep = flow(pot, PhasePointd(vec1(0.0), vec1(xi0)), 30.0, 1e-12);
  CHECK(creep.end().x(0) < 2.0 + 1e-3);
  CHECK(creep.end().xi(0) < 1e-2);

  Trajectory tr = flow(PotentialSpec::harmonic_test(1), PhasePointd(vec1(0.0), vec1(1.0)), 2.0);
  tr.degenerate_turning = true;
  CHECK_THROWS_AS(maslov_count_1d(tr), DegenerateTurningError);
  CHECK_THROWS_AS(maslov_count_1d(Trajectory{}), PreconditionError);
}

TEST_CASE("non-trapping verdicts on the canonical potentials") {
  const EnergySpec e = at_energy(0.5);
  CHECK(check_nontrapping(PotentialSpec::zero(1), e).verdict == Verdict::holds);
  CHECK(check_nontrapping(PotentialSpec::gaussian_bump(1, 0.3, 1.0, vec1(2.0)), e).verdict ==
        Verdict::holds);
  CHECK(check_nontrapping(PotentialSpec::barrier_1d(), e).verdict == Verdict::holds);
  const HypothesisReport trap = check_nontrapping(PotentialSpec::double_well(), e);
  CHECK(trap.verdict == Verdict::fails);
  CHECK_FALSE(trap.witnesses.empty());
  CHECK(check_nontrapping(PotentialSpec::zero(2), e).verdict == Verdict::holds);
  CHECK(check_nontrapping(PotentialSpec::harmonic_test(2), e).verdict != Verdict::holds);
}

TEST_CASE("return set") {
  const EnergySpec e = at_energy(0.5);
  const Vec o = vec1(0.0);
  CHECK(return_set_measure(PotentialSpec::zero(1), e, o, o).verdict == Verdict::holds);
  CHECK(return_set_measure(PotentialSpec::gaussian_bump(1, 0.3, 1.0, vec1(2.0)), e, o, o).verdict ==
        Verdict::holds);

  const HypothesisReport barrier = return_set_measure(PotentialSpec::barrier_1d(), e, o, o);
  CHECK(barrier.verdict == Verdict::fails);
  CHECK(barrier.witnesses.size() == 1);
  CHECK(barrier.witnesses[0].xi(0) > 0.0);
  CHECK(barrier.counting_measure == 1.0);
  CHECK(barrier.null_singletons_measure == 0.0);

  ReturnSetOptions nulls;
  nulls.convention = SingletonConvention::null_singletons;
  CHECK(return_set_measure(PotentialSpec::ramp_1d(), e, o, o, 0.0, 64, 0.0, nulls).verdict ==
        Verdict::holds);
  CHECK(return_set_measure(PotentialSpec::ramp_1d(), e, o, o).verdict == Verdict::fails);

  // two sources on a line in free space: the ray from one passes through the other
  const HypothesisReport cross = return_set_measure(PotentialSpec::zero(1), e, o, vec1(5.0));
  CHECK(cross.verdict == Verdict::fails);
  REQUIRE(cross.witnesses.size() == 1);
  CHECK(cross.witnesses[0].xi(0) > 0.0);

  CHECK(return_set_measure(PotentialSpec::zero(2), e, vec2(0, 0), vec2(0, 0)).verdict ==
        Verdict::holds);
}
