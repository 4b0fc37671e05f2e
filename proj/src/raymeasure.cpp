#include "semiwave/raymeasure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semiwave/errors.hpp"
#include "semiwave/ode.hpp"
#include "semiwave/parallel.hpp"
#include "semiwave/quadrature.hpp"

namespace semiwave {

namespace {

/// Crude sup-norm estimate of f over the box on a uniform lattice.
double sup_estimate(const PhaseFunction& f, const PhaseBox& box) {
  const int n = box.dim();
  const int per_axis = n == 1 ? 41 : 11;
  const int axes = 2 * n;
  long total = 1;
  for (int a = 0; a < axes; ++a) total *= per_axis;
  double best = 0.0;
  Vec x(n), xi(n);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int a = 0; a < axes; ++a) {
      const double s = static_cast<double>(rem % per_axis) / (per_axis - 1);
      rem /= per_axis;
      if (a < n) {
        x(a) = box.x_lo(a) + s * (box.x_hi(a) - box.x_lo(a));
      } else {
        xi(a - n) = box.xi_lo(a - n) + s * (box.xi_hi(a - n) - box.xi_lo(a - n));
      }
    }
    best = std::max(best, std::abs(f(x, xi)));
  }
  return 1.25 * best + 1e-300;
}

double stop_radius(const PotentialSpec& pot, const PhaseBox& box) {
  const double r_pot = pot.decaying() ? pot.scale_radius() : std::numeric_limits<double>::infinity();
  return std::max(r_pot, box.x_radius());
}

std::string describe(const Vec& v) {
  std::ostringstream out;
  out << "(" << v.transpose() << ")";
  return out.str();
}

/// Sums per-direction contributions; in 2D the sphere error is estimated by
/// comparing with the rule on every other node.
MeasurePairing assemble(std::vector<DirectionContribution> dirs, const RayQuadrature& quad,
                        long steps) {
  MeasurePairing out;
  out.nodes = static_cast<int>(dirs.size());
  out.steps = steps;
  double coarse = 0.0;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double c = dirs[i].weight * dirs[i].integral;
    out.value += c;
    abs_sum += std::abs(c);
    if (i % 2 == 0) coarse += 2.0 * c;
    out.t_cut = std::max(out.t_cut, dirs[i].t_cut);
    out.tail_bound += std::abs(dirs[i].weight) * dirs[i].tail_bound;
  }
  out.error_estimate = out.tail_bound + 100.0 * quad.rtol * abs_sum + 1e-15;
  if (dirs.size() > 2) out.error_estimate += std::abs(out.value - coarse);
  out.directions = std::move(dirs);
  return out;
}

}  // namespace

bool in_incoming_zone(const Vec& x, const Vec& xi, double radius, double cos_max) {
  const double nx = x.norm(), nxi = xi.norm();
  if (!(nx > radius) || nxi == 0.0) return false;
  return x.dot(xi) / (nx * nxi) < cos_max;
}

RayIntegral integrate_along_ray(const PotentialSpec& pot, const PhasePointd& start, double damping,
                                const PhaseFunction& f, double f_bound, const PhaseBox& box,
                                const RayQuadrature& quad) {
  const int n = pot.dimension();
  const double speed = std::max(1e-3, start.xi.norm());
  const double R = stop_radius(pot, box);
  double T = quad.T_max;
  if (T <= 0.0) {
    T = damping > 0.0 ? std::log(1.0 / quad.damping_cutoff) / (2.0 * damping)
                      : 100.0 * ((std::isfinite(R) ? R : box.x_radius()) + 1.0) / speed;
  }
  const double box_size = std::min((box.x_hi - box.x_lo).minCoeff(), (box.xi_hi - box.xi_lo).minCoeff());

  auto rhs = [&](double t, const Vec& y, Vec& dy) {
    const Vec x = y.head(n);
    const Vec xi = y.segment(n, n);
    dy.head(n) = xi;
    dy.segment(n, n) = -pot.gradient(x);
    dy(2 * n) = f(x, xi) * std::exp(-2.0 * damping * t);
  };
  Vec y0(2 * n + 1);
  y0 << start.x, start.xi, 0.0;
  OdeOptions opts;
  opts.rtol = quad.rtol;
  opts.atol = quad.atol;
  opts.max_step = quad.step_fraction * box_size / speed;
  DormandPrince dp(rhs, 0.0, y0, opts);

  RayIntegral out;
  int outgoing = 0;
  try {
    while (dp.t() < T) {
      dp.step(T);
      const auto x = dp.y().head(n);
      const auto xi = dp.y().segment(n, n);
      outgoing = (x.norm() > R && x.dot(xi) > 0.0) ? outgoing + 1 : 0;
      if (outgoing >= 2) {
        out.escaped = true;
        break;
      }
    }
  } catch (const DormandPrince::StepUnderflow& e) {
    throw IntegrationFailure(std::string("ray integral: ") + e.what(), Trajectory{});
  }
  out.value = dp.y()(2 * n);
  out.t_cut = dp.t();
  out.steps = static_cast<long>(dp.accepted_steps());
  if (!out.escaped) {
    if (damping <= 0.0) {
      throw DivergenceError("undamped ray from x = " + describe(start.x) + " with xi = " +
                            describe(start.xi) + " does not leave the observable region by t = " +
                            std::to_string(T));
    }
    out.tail_bound = f_bound * std::exp(-2.0 * damping * out.t_cut) / (2.0 * damping);
  }
  return out;
}

MeasurePairing pair(const Observable& q, const PotentialSpec& pot, const EnergySpec& espec,
                    const SourceProfile& profile, const Vec& base, const RayQuadrature& quad) {
  if (q.dim() != pot.dimension()) throw PreconditionError("pair: dimension mismatch");
  const SphereDensity sphere = sphere_density(profile, pot, espec, base, quad.n_dirs);
  const double gamma = espec.damping();
  const PhaseFunction f = [&q](const Vec& x, const Vec& xi) { return q(x, xi); };
  const double bound = sup_estimate(f, q.box());
  const Vec leray = sphere.leray_weights();

  const auto rays = parallel_map(sphere.nodes.size(), [&](std::size_t i) {
    return integrate_along_ray(pot, PhasePointd(base, sphere.nodes[i]), gamma, f, bound, q.box(),
                               quad);
  });
  std::vector<DirectionContribution> dirs;
  long steps = 0;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    dirs.push_back({sphere.nodes[i], leray(k) * sphere.density(k), rays[i].value, rays[i].t_cut,
                    rays[i].tail_bound, rays[i].escaped});
    steps += rays[i].steps;
  }
  return assemble(std::move(dirs), quad, steps);
}

LiouvilleResidual liouville_residual(const Observable& q, const PotentialSpec& pot,
                                     const EnergySpec& espec, const SourceProfile& profile,
                                     const Vec& base, const RayQuadrature& quad) {
  if (q.dim() != pot.dimension()) throw PreconditionError("liouville_residual: dimension mismatch");
  const SphereDensity sphere = sphere_density(profile, pot, espec, base, quad.n_dirs);
  const double gamma = espec.damping();
  const PhaseFunction f = [&](const Vec& x, const Vec& xi) {
    if (!q.box().contains(x, xi)) return 0.0;
    return -q.hamilton_derivative(pot, x, xi) + 2.0 * gamma * q(x, xi);
  };
  const double bound = sup_estimate(f, q.box());
  const Vec leray = sphere.leray_weights();

  const auto rays = parallel_map(sphere.nodes.size(), [&](std::size_t i) {
    return integrate_along_ray(pot, PhasePointd(base, sphere.nodes[i]), gamma, f, bound, q.box(),
                               quad);
  });
  std::vector<DirectionContribution> dirs;
  long steps = 0;
  LiouvilleResidual out;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double w = leray(k) * sphere.density(k);
    dirs.push_back({sphere.nodes[i], w, rays[i].value, rays[i].t_cut, rays[i].tail_bound,
                    rays[i].escaped});
    steps += rays[i].steps;
    out.source += w * q(base, sphere.nodes[i]);
  }
  const MeasurePairing transport = assemble(std::move(dirs), quad, steps);
  out.transport = transport.value;
  out.error_estimate = transport.error_estimate;
  out.residual = out.transport - out.source;
  return out;
}

double mu1_pair(const Observable& q, const SourceProfile& profile, const Vec& base,
                double abs_tol) {
  const int n = q.dim();
  if (profile.dimension() != n) throw PreconditionError("mu1_pair: dimension mismatch");
  const Vec x0 = base.size() == 0 ? Vec::Zero(n) : base;
  const auto& box = q.box();
  const double prefactor = std::pow(kTwoPi, -n);
  if (n == 1) {
    const auto r = integrate(
        [&](double k) {
          const Vec xi = vec1(k);
          return q(x0, xi) * std::norm(profile.hat(xi));
        },
        box.xi_lo(0), box.xi_hi(0), abs_tol, 1e-11, 20000);
    return prefactor * r.value;
  }
  if (n == 2) {
    const auto r = integrate_2d(
        [&](double a, double b) {
          const Vec xi = vec2(a, b);
          return q(x0, xi) * std::norm(profile.hat(xi));
        },
        box.xi_lo(0), box.xi_hi(0), box.xi_lo(1), box.xi_hi(1), abs_tol, 1e-9);
    return prefactor * r.value;
  }
  throw PreconditionError("mu1_pair: n <= 2 supported");
}

MeasurePairing two_source_pair(const Observable& q, const PotentialSpec& pot,
                               const EnergySpec& espec,
                               const std::array<SourceProfile, 2>& profiles,
                               const std::array<Vec, 2>& bases, const RayQuadrature& quad,
                               const TwoSourceOptions& check) {
  std::vector<std::string> warnings;
  bool unique = true;
  for (int k = 0; k < 2; ++k) {
    const auto report = return_set_measure(pot, espec, bases[k], bases[1 - k], check.T_max,
                                           check.n_dirs, check.hit_tol);
    if (report.verdict == Verdict::fails) {
      unique = false;
      std::ostringstream msg;
      msg << "H8 fails: " << report.witnesses.size() << " direction(s) from source " << k + 1
          << " reach source " << 2 - k << "; prediction not unique";
      warnings.push_back(msg.str());
    } else if (report.verdict == Verdict::inconclusive) {
      warnings.push_back("H8 check inconclusive for source " + std::to_string(k + 1));
    }
  }
  MeasurePairing a = pair(q, pot, espec, profiles[0], bases[0], quad);
  const MeasurePairing b = pair(q, pot, espec, profiles[1], bases[1], quad);
  a.value += b.value;
  a.error_estimate += b.error_estimate;
  a.tail_bound += b.tail_bound;
  a.t_cut = std::max(a.t_cut, b.t_cut);
  a.nodes += b.nodes;
  a.steps += b.steps;
  a.directions.insert(a.directions.end(), b.directions.begin(), b.directions.end());
  a.unique = unique;
  a.warnings = std::move(warnings);
  return a;
}

}  // namespace semiwave
