#include "semiwave/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "semiwave/errors.hpp"
#include "semiwave/parallel.hpp"
#include "semiwave/quadrature.hpp"

namespace semiwave {

namespace {

int state_size(int n) { return n == 1 ? 3 : 9; }

Vec launch_momentum(int n, double r, double theta) {
  if (n == 1) return vec1(std::cos(theta) >= 0.0 ? r : -r);
  return vec2(r * std::cos(theta), r * std::sin(theta));
}

/// Signed Jacobian of (t, angle) -> x. In 1D the sign is that of xi, so a turning
/// point shows up as a sign change.
double signed_jacobian(int n, double r, const Vec& y) {
  if (n == 1) return y(1) * r;
  return y(2) * y(6) - y(3) * y(5);
}

ChartSample sample_state(int n, double r, const ChartRay& ray, double t) {
  const Vec y = ray.state(t);
  ChartSample s;
  s.t = t;
  s.x = y.head(n);
  s.xi = y.segment(n, n);
  s.psi = y(2 * n);
  s.jacobian = std::abs(signed_jacobian(n, r, y));
  s.maslov = static_cast<int>(
      std::count_if(ray.caustics.begin(), ray.caustics.end(), [t](double c) { return c < t; }));
  return s;
}

/// tr(d xi / d x) along the ray.
double laplacian_psi(const PotentialSpec& pot, int n, const Vec& y) {
  if (n == 1) return -pot.derivative(y(0)) / y(1);
  const Vec x = y.head(2);
  Mat A(2, 2), B(2, 2);
  A.col(0) = y.segment(2, 2);
  A.col(1) = y.segment(5, 2);
  B.col(0) = -pot.gradient(x);
  B.col(1) = y.segment(7, 2);
  return (B * A.inverse()).trace();
}

}  // namespace

ChartRay chart_ray(const PotentialSpec& pot, double E0, const Vec& base, double theta,
                   double /*t_lo*/, double t_hi, const ChartOptions& options) {
  const int n = pot.dimension();
  if (n != 1 && n != 2) throw PreconditionError("chart_ray: n <= 2 supported");
  const double r = shell_radius(pot, E0, base);
  ChartRay ray;
  ray.theta = theta;
  ray.xi0 = launch_momentum(n, r, theta);

  auto rhs = [&pot, n](double, const Vec& y, Vec& dy) {
    const Vec x = y.head(n);
    const Vec xi = y.segment(n, n);
    dy.head(n) = xi;
    dy.segment(n, n) = -pot.gradient(x);
    dy(2 * n) = xi.squaredNorm();
    if (n == 2) {
      dy.segment(5, 2) = y.segment(7, 2);
      dy.segment(7, 2) = -pot.hessian(x) * y.segment(5, 2);
    }
  };
  Vec y0 = Vec::Zero(state_size(n));
  y0.head(n) = base;
  y0.segment(n, n) = ray.xi0;
  if (n == 2) y0.segment(7, 2) = r * vec2(-std::sin(theta), std::cos(theta));

  OdeOptions opts;
  opts.rtol = options.tol;
  opts.atol = options.tol * 1e-2;
  opts.max_step = std::max(1e-3, 0.05 * t_hi);
  DormandPrince dp(rhs, 0.0, y0, opts);

  double j_prev = signed_jacobian(n, r, y0);
  ray.t_end = t_hi;
  try {
    while (dp.t() < t_hi) {
      dp.step(t_hi);
      const DenseSegment& seg = dp.segment();
      ray.state.append(seg);
      const double j_now = signed_jacobian(n, r, dp.y());
      if (j_prev != 0.0 && (j_now == 0.0 || (j_now > 0.0) != (j_prev > 0.0))) {
        const double tc = find_root(
            [&](double t) { return signed_jacobian(n, r, seg(t)); }, dp.t_prev(), dp.t());
        ray.caustics.push_back(tc);
        if (!options.through_caustics) {
          ray.t_end = tc;
          break;
        }
      }
      j_prev = j_now;
    }
  } catch (const DormandPrince::StepUnderflow& e) {
    throw IntegrationFailure(std::string("chart ray: ") + e.what(), Trajectory{});
  }
  return ray;
}

LagrangianChart build_chart(const PotentialSpec& pot, const EnergySpec& espec, const Vec& base,
                            double t_lo, double t_hi, int n_dirs, const ChartOptions& options) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo)) {
    throw PreconditionError("build_chart: need 0 < t_lo < t_hi");
  }
  const int n = pot.dimension();
  LagrangianChart chart;
  chart.dimension = n;
  chart.base = base;
  chart.radius = shell_radius(pot, espec.E0, base);
  chart.E0 = espec.E0;
  chart.t_lo = t_lo;
  chart.t_hi = t_hi;
  chart.through_caustics = options.through_caustics;
  chart.potential = std::make_shared<const PotentialSpec>(pot);

  std::vector<double> thetas;
  if (n == 1) {
    thetas = {0.0, kPi};
  } else {
    for (int k = 0; k < n_dirs; ++k) thetas.push_back(kTwoPi * k / n_dirs);
  }
  chart.rays = parallel_map(thetas.size(), [&](std::size_t k) {
    return chart_ray(pot, espec.E0, base, thetas[k], t_lo, t_hi, options);
  });
  for (std::size_t k = 0; k < chart.rays.size(); ++k) {
    const auto& ray = chart.rays[k];
    if (ray.caustics.empty()) continue;
    std::ostringstream msg;
    msg << "ray " << k << " (theta = " << ray.theta << ") meets a caustic at t = "
        << ray.caustics.front();
    if (!options.through_caustics) msg << "; chart truncated";
    chart.warnings.push_back(msg.str());
  }
  return chart;
}

double LagrangianChart::valid_until(std::size_t i) const { return rays.at(i).t_end; }

ChartSample LagrangianChart::sample(std::size_t i, double t) const {
  const ChartRay& ray = rays.at(i);
  if (t < 0.0 || t > ray.t_end * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "t = " << t << " lies outside the chart on ray " << i << " (valid up to "
        << ray.t_end << ")";
    throw CausticError(msg.str());
  }
  return sample_state(dimension, radius, ray, std::min(t, ray.t_end));
}

Complex principal_amplitude(const LagrangianChart& chart, const SourceProfile& profile,
                            const EnergySpec& espec, std::size_t ray, double t) {
  const ChartSample s = chart.sample(ray, t);
  const double scale = chart.dimension == 1 ? chart.radius * chart.radius
                                            : chart.radius * chart.radius * std::max(t, 1e-300);
  if (!(s.jacobian > 1e-10 * scale)) {
    std::ostringstream msg;
    msg << "amplitude blows up: Jacobian " << s.jacobian << " at t = " << t << " on ray " << ray;
    throw CausticError(msg.str());
  }
  const int n = chart.dimension;
  const Complex I(0.0, 1.0);
  const double geometric = std::pow(kTwoPi, 0.5 * (1 - n));
  const Complex hessian_phase = std::exp(I * (kPi * (1 - n) / 4.0));
  const Complex maslov = std::exp(-I * (kPi * s.maslov / 2.0));
  return I * geometric * hessian_phase * profile.hat(chart.rays[ray].xi0) *
         std::exp(I * espec.E1 * t) * maslov / std::sqrt(s.jacobian);
}

double density_ratio(const LagrangianChart& chart, const SourceProfile& profile,
                     const EnergySpec& espec, std::size_t ray, double t) {
  const Complex b0 = principal_amplitude(chart, profile, espec, ray, t);
  const ChartSample s = chart.sample(ray, t);
  const int n = chart.dimension;
  const double reference = std::pow(kTwoPi, 1 - n) * std::norm(profile.hat(chart.rays[ray].xi0));
  return std::norm(b0) * s.jacobian * std::exp(2.0 * espec.damping() * t) / reference;
}

double transport_defect(const LagrangianChart& chart, std::size_t ray, double t) {
  if (chart.potential == nullptr) throw PreconditionError("transport_defect: chart has no potential");
  const ChartRay& r = chart.rays.at(ray);
  const int n = chart.dimension;
  const double a = chart.t_lo;
  if (t < a || t > chart.valid_until(ray)) throw CausticError("transport_defect: t outside chart");
  for (double c : r.caustics) {
    if (c > a && c < t) throw CausticError("transport_defect: caustic between t_lo and t");
  }
  const auto integral = integrate(
      [&](double s) { return -0.5 * laplacian_psi(*chart.potential, n, r.state(s)); }, a, t, 1e-13,
      1e-12);
  const double closed = 0.5 * std::log(chart.sample(ray, a).jacobian / chart.sample(ray, t).jacobian);
  return integral.value - closed;
}

WkbField wkb_field(const LagrangianChart& chart, const SourceProfile& profile,
                   const EnergySpec& espec, double h, const Vec& points, double caustic_margin) {
  if (chart.dimension != 1) throw PreconditionError("wkb_field: 1D charts only");
  WkbField out;
  out.h = h;
  out.x = points;
  out.values = CVec::Zero(points.size());
  out.multiplicity.assign(static_cast<std::size_t>(points.size()), 0);
  if (points.size() == 0) return out;
  out.x_lo = points.minCoeff();
  out.x_hi = points.maxCoeff();

  for (std::size_t i = 0; i < chart.rays.size(); ++i) {
    const ChartRay& ray = chart.rays[i];
    double begin = 0.0;
    int nu = 0;
    std::vector<double> ends = ray.caustics;
    if (ends.empty() || ends.back() < ray.t_end) ends.push_back(ray.t_end);
    for (double end : ends) {
      if (end > ray.t_end) break;
      out.branches.push_back({i, begin, end, nu});
      begin = end;
      ++nu;
    }
    // turning points the field must keep away from
    std::vector<double> turn_x;
    for (double c : ray.caustics) {
      if (c <= ray.t_end) turn_x.push_back(ray.state(c)(0));
    }
    for (Eigen::Index k = 0; k < points.size(); ++k) {
      const double p = points(k);
      for (double xt : turn_x) {
        if (std::abs(p - xt) < caustic_margin) {
          std::ostringstream msg;
          msg << "point x = " << p << " is within " << caustic_margin << " of the caustic at "
              << xt;
          throw CausticError(msg.str());
        }
      }
    }
  }

  const Complex I(0.0, 1.0);
  for (const WkbBranch& br : out.branches) {
    const ChartRay& ray = chart.rays[br.ray];
    const auto g = [&](double t) { return ray.state(t)(0); };
    const double xa = g(br.t_begin), xb = g(br.t_end);
    const double lo = std::min(xa, xb), hi = std::max(xa, xb);
    for (Eigen::Index k = 0; k < points.size(); ++k) {
      const double p = points(k);
      if (p < lo || p > hi) continue;
      // the launch point itself belongs to both rays; skip the zero-length start
      if (br.t_begin == 0.0 && p == xa) continue;
      double t;
      if (p == xb) {
        t = br.t_end;
      } else {
        t = find_root([&](double s) { return g(s) - p; }, br.t_begin, br.t_end);
      }
      const Complex b0 = principal_amplitude(chart, profile, espec, br.ray, t);
      const double psi = ray.state(t)(2);
      out.values(k) += b0 * std::exp(I * (psi / h)) / std::sqrt(h);
      ++out.multiplicity[static_cast<std::size_t>(k)];
    }
  }
  return out;
}

double relative_error(const WkbField& wkb, const WaveField& field) {
  const Grid1D& g = field.grid;
  double num = 0.0, den = 0.0;
  for (Eigen::Index k = 0; k < wkb.x.size(); ++k) {
    const long i = std::lround((wkb.x(k) - g.x_min) / g.dx);
    if (i < 0 || i >= g.N || std::abs(g.x(i) - wkb.x(k)) > 1e-9 * (1.0 + std::abs(wkb.x(k)))) {
      throw PreconditionError("relative_error: WKB points are not solver grid points");
    }
    num += std::norm(field.values(i) - wkb.values(k));
    den += std::norm(field.values(i));
  }
  if (!(den > 0.0)) throw PreconditionError("relative_error: empty or zero reference");
  return std::sqrt(num / den);
}

Vec grid_points_in(const Grid1D& grid, double a, double b) {
  const long i0 = std::max(0L, static_cast<long>(std::ceil((a - grid.x_min) / grid.dx - 1e-9)));
  const long i1 = std::min(grid.N - 1, static_cast<long>(std::floor((b - grid.x_min) / grid.dx + 1e-9)));
  if (i1 < i0) return Vec();
  Vec out(i1 - i0 + 1);
  for (long i = i0; i <= i1; ++i) out(i - i0) = grid.x(i);
  return out;
}

Located locate_2d(const PotentialSpec& pot, double E0, const Vec& base, const Vec& x,
                  double t_guess, double theta_guess, double tol) {
  if (pot.dimension() != 2) throw PreconditionError("locate_2d: 2D potentials only");
  const double r = shell_radius(pot, E0, base);
  ChartOptions opts;
  opts.through_caustics = true;
  auto eval = [&](double t, double theta, ChartRay& ray) {
    ray = chart_ray(pot, E0, base, theta, 0.0, t, opts);
    return sample_state(2, r, ray, t);
  };

  Located out;
  out.t = std::max(t_guess, 1e-6);
  out.theta = theta_guess;
  ChartRay ray;
  ChartSample s = eval(out.t, out.theta, ray);
  double res = (s.x - x).norm();
  const double scale = tol * (1.0 + x.norm());
  for (int it = 0; it < 60 && res > scale; ++it) {
    out.iterations = it + 1;
    const Vec y = ray.state(out.t);
    Mat D(2, 2);
    D.col(0) = y.segment(2, 2);
    D.col(1) = y.segment(5, 2);
    if (std::abs(D.determinant()) < 1e-14) throw CausticError("locate_2d: singular chart Jacobian");
    const Vec delta = D.fullPivLu().solve(s.x - x);
    double lambda = 1.0;
    for (int k = 0; k < 30; ++k) {
      const double t_new = out.t - lambda * delta(0);
      const double th_new = out.theta - lambda * delta(1);
      if (t_new > 0.0) {
        ChartRay trial;
        const ChartSample s_new = eval(t_new, th_new, trial);
        const double res_new = (s_new.x - x).norm();
        if (res_new < res) {
          out.t = t_new;
          out.theta = th_new;
          s = s_new;
          ray = std::move(trial);
          res = res_new;
          break;
        }
      }
      lambda *= 0.5;
      if (k == 29) throw DomainError("locate_2d: line search failed");
    }
  }
  if (res > scale) throw DomainError("locate_2d: Newton did not converge");
  out.sample = s;
  return out;
}

Complex wkb_value_2d(const Located& p, const SourceProfile& profile, const EnergySpec& espec,
                     double radius, double h) {
  if (!(p.sample.jacobian > 0.0)) throw CausticError("wkb_value_2d: point on a caustic");
  const Complex I(0.0, 1.0);
  const Vec xi0 = vec2(radius * std::cos(p.theta), radius * std::sin(p.theta));
  const Complex b0 = I * std::pow(kTwoPi, -0.5) * std::exp(-I * (kPi / 4.0)) * profile.hat(xi0) *
                     std::exp(I * espec.E1 * p.t) *
                     std::exp(-I * (kPi * p.sample.maslov / 2.0)) / std::sqrt(p.sample.jacobian);
  return b0 * std::exp(I * (p.sample.psi / h)) / std::sqrt(h);
}

}  // namespace semiwave
