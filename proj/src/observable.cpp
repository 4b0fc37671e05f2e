#include "semiwave/observable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semiwave/errors.hpp"

namespace semiwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// e^{-1/t} for t > 0 and its derivative.
double flat(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double flat_prime(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

// Smooth step from 0 (t <= 0) to 1 (t >= 1).
double step(double t) {
  const double a = flat(t), b = flat(1.0 - t);
  return a / (a + b);
}

double step_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = flat(t), b = flat(1.0 - t);
  const double da = flat_prime(t), db = -flat_prime(1.0 - t);
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

}  // namespace

bool PhaseBox::contains(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& xi) const {
  return (x.array() >= x_lo.array()).all() && (x.array() <= x_hi.array()).all() &&
         (xi.array() >= xi_lo.array()).all() && (xi.array() <= xi_hi.array()).all();
}

double PhaseBox::x_radius() const {
  return x_lo.cwiseAbs().cwiseMax(x_hi.cwiseAbs()).norm();
}

PhaseBox PhaseBox::hull(const PhaseBox& a, const PhaseBox& b) {
  return {a.x_lo.cwiseMin(b.x_lo), a.x_hi.cwiseMax(b.x_hi), a.xi_lo.cwiseMin(b.xi_lo),
          a.xi_hi.cwiseMax(b.xi_hi)};
}

PhaseBox PhaseBox::interval(double x_lo, double x_hi, double xi_lo, double xi_hi) {
  return {vec1(x_lo), vec1(x_hi), vec1(xi_lo), vec1(xi_hi)};
}

Profile1D bump_profile(double center, double half_width) {
  if (!(half_width > 0.0)) throw PreconditionError("bump_profile: half width must be positive");
  Profile1D p;
  p.f = [=](double x) {
    const double t = (x - center) / half_width;
    return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
  };
  p.df = [=](double x) {
    const double t = (x - center) / half_width;
    if (std::abs(t) >= 1.0) return 0.0;
    const double s = 1.0 - t * t;
    return std::exp(1.0 - 1.0 / s) * (-2.0 * t / (s * s)) / half_width;
  };
  p.lo = center - half_width;
  p.hi = center + half_width;
  p.scale = half_width;
  return p;
}

Profile1D plateau_profile(double a, double b, double ramp) {
  if (!(b >= a) || !(ramp > 0.0)) throw PreconditionError("plateau_profile: need a <= b, ramp > 0");
  Profile1D p;
  p.f = [=](double x) { return step((x - a + ramp) / ramp) * step((b + ramp - x) / ramp); };
  p.df = [=](double x) {
    const double u = (x - a + ramp) / ramp, v = (b + ramp - x) / ramp;
    return (step_prime(u) * step(v) - step(u) * step_prime(v)) / ramp;
  };
  p.lo = a - ramp;
  p.hi = b + ramp;
  p.scale = ramp;
  return p;
}

Profile1D monomial_profile(int k) {
  Profile1D p;
  p.f = [k](double x) { return std::pow(x, k); };
  p.df = [k](double x) { return k == 0 ? 0.0 : k * std::pow(x, k - 1); };
  p.lo = -kInf;
  p.hi = kInf;
  p.scale = kInf;
  return p;
}

Profile1D product(const Profile1D& a, const Profile1D& b) {
  Profile1D p;
  p.f = [fa = a.f, fb = b.f](double x) { return fa(x) * fb(x); };
  p.df = [fa = a.f, fb = b.f, da = a.df, db = b.df](double x) {
    return da(x) * fb(x) + fa(x) * db(x);
  };
  p.lo = std::max(a.lo, b.lo);
  p.hi = std::min(a.hi, b.hi);
  p.scale = std::min(a.scale, b.scale);
  return p;
}

Observable::Observable(std::string id, Fn q, PhaseBox box, GradFn gradient)
    : id_(std::move(id)), q_(std::move(q)), box_(std::move(box)), gradient_(std::move(gradient)) {
  xi_scale_ = 0.5 * (box_.xi_hi - box_.xi_lo).minCoeff();
}

Observable Observable::separable(std::string id, std::vector<SeparableTerm> terms) {
  if (terms.empty()) throw PreconditionError("separable observable needs at least one term");
  double x_lo = kInf, x_hi = -kInf, xi_lo = kInf, xi_hi = -kInf, scale = kInf;
  for (const auto& t : terms) {
    x_lo = std::min(x_lo, t.phi.lo);
    x_hi = std::max(x_hi, t.phi.hi);
    xi_lo = std::min(xi_lo, t.chi.lo);
    xi_hi = std::max(xi_hi, t.chi.hi);
    scale = std::min(scale, t.chi.scale);
  }
  if (!std::isfinite(x_lo + x_hi + xi_lo + xi_hi)) {
    throw PreconditionError("separable observable '" + id + "' is not compactly supported");
  }
  auto q = [terms](const Vec& x, const Vec& xi) {
    double s = 0.0;
    for (const auto& t : terms) s += t.coefficient * t.phi.f(x(0)) * t.chi.f(xi(0));
    return s;
  };
  auto grad = [terms](const Vec& x, const Vec& xi, Vec& gx, Vec& gxi) {
    gx = Vec::Zero(1);
    gxi = Vec::Zero(1);
    for (const auto& t : terms) {
      gx(0) += t.coefficient * t.phi.df(x(0)) * t.chi.f(xi(0));
      gxi(0) += t.coefficient * t.phi.f(x(0)) * t.chi.df(xi(0));
    }
  };
  Observable obs(std::move(id), q, PhaseBox::interval(x_lo, x_hi, xi_lo, xi_hi), grad);
  obs.terms_ = std::move(terms);
  obs.xi_scale_ = scale;
  return obs;
}

Observable Observable::product_1d(std::string id, const Profile1D& phi, const Profile1D& chi) {
  return separable(std::move(id), {SeparableTerm{1.0, phi, chi}});
}

Observable Observable::bump(std::string id, const Vec& x_center, const Vec& x_half,
                            const Vec& xi_center, const Vec& xi_half) {
  const auto n = x_center.size();
  if (n == 1) {
    return product_1d(std::move(id), bump_profile(x_center(0), x_half(0)),
                      bump_profile(xi_center(0), xi_half(0)));
  }
  std::vector<Profile1D> px, pxi;
  for (Eigen::Index i = 0; i < n; ++i) {
    px.push_back(bump_profile(x_center(i), x_half(i)));
    pxi.push_back(bump_profile(xi_center(i), xi_half(i)));
  }
  auto q = [px, pxi](const Vec& x, const Vec& xi) {
    double v = 1.0;
    for (std::size_t i = 0; i < px.size(); ++i) v *= px[i].f(x(i)) * pxi[i].f(xi(i));
    return v;
  };
  auto grad = [px, pxi](const Vec& x, const Vec& xi, Vec& gx, Vec& gxi) {
    const auto m = static_cast<Eigen::Index>(px.size());
    Vec fx(m), fxi(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      fx(i) = px[i].f(x(i));
      fxi(i) = pxi[i].f(xi(i));
    }
    const double all_xi = fxi.prod();
    const double all_x = fx.prod();
    gx.resize(m);
    gxi.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      double ox = 1.0, oxi = 1.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j != i) {
          ox *= fx(j);
          oxi *= fxi(j);
        }
      }
      gx(i) = px[i].df(x(i)) * ox * all_xi;
      gxi(i) = pxi[i].df(xi(i)) * oxi * all_x;
    }
  };
  PhaseBox box{x_center - x_half, x_center + x_half, xi_center - xi_half, xi_center + xi_half};
  Observable obs(std::move(id), q, box, grad);
  obs.xi_scale_ = xi_half.minCoeff();
  return obs;
}

Observable Observable::combine(double a, const Observable& q1, double b, const Observable& q2) {
  if (q1.dim() != q2.dim()) throw PreconditionError("combine: dimension mismatch");
  const std::string id = q1.id() + "+" + q2.id();
  if (q1.is_separable() && q2.is_separable()) {
    std::vector<SeparableTerm> terms;
    for (auto t : q1.terms()) {
      t.coefficient *= a;
      terms.push_back(t);
    }
    for (auto t : q2.terms()) {
      t.coefficient *= b;
      terms.push_back(t);
    }
    return separable(id, terms);
  }
  auto q = [a, b, q1, q2](const Vec& x, const Vec& xi) { return a * q1(x, xi) + b * q2(x, xi); };
  auto grad = [a, b, q1, q2](const Vec& x, const Vec& xi, Vec& gx, Vec& gxi) {
    Vec gx1, gxi1, gx2, gxi2;
    q1.gradient(x, xi, gx1, gxi1);
    q2.gradient(x, xi, gx2, gxi2);
    gx = a * gx1 + b * gx2;
    gxi = a * gxi1 + b * gxi2;
  };
  Observable obs(id, q, PhaseBox::hull(q1.box(), q2.box()), grad);
  obs.xi_scale_ = std::min(q1.xi_scale(), q2.xi_scale());
  return obs;
}

Observable Observable::shell_weighted(const Observable& q, const PotentialSpec& pot, double E0) {
  const std::string id = q.id() + "*(p-E0)^2";
  if (q.is_separable()) {
    // (V + xi^2/2 - E0)^2 = V^2 + 2 V (xi^2/2 - E0) + (xi^2/2 - E0)^2
    Profile1D v;
    v.f = [pot](double x) { return pot.value(x); };
    v.df = [pot](double x) { return pot.derivative(x); };
    v.lo = -kInf;
    v.hi = kInf;
    v.scale = kInf;
    Profile1D v2;
    v2.f = [pot](double x) { return pot.value(x) * pot.value(x); };
    v2.df = [pot](double x) { return 2.0 * pot.value(x) * pot.derivative(x); };
    v2.lo = -kInf;
    v2.hi = kInf;
    v2.scale = kInf;
    Profile1D k;
    k.f = [E0](double xi) { return 0.5 * xi * xi - E0; };
    k.df = [](double xi) { return xi; };
    k.lo = -kInf;
    k.hi = kInf;
    k.scale = kInf;
    const Profile1D k2 = product(k, k);
    Profile1D one;
    one.f = [](double) { return 1.0; };
    one.df = [](double) { return 0.0; };
    one.lo = -kInf;
    one.hi = kInf;
    one.scale = kInf;

    std::vector<SeparableTerm> terms;
    const bool free = pot.family() == PotentialFamily::zero;
    for (const auto& t : q.terms()) {
      terms.push_back({t.coefficient, t.phi, product(t.chi, k2)});
      if (!free) {
        terms.push_back({2.0 * t.coefficient, product(t.phi, v), product(t.chi, k)});
        terms.push_back({t.coefficient, product(t.phi, v2), product(t.chi, one)});
      }
    }
    auto out = separable(id, terms);
    out.xi_scale_ = q.xi_scale();
    return out;
  }
  auto fn = [q, pot, E0](const Vec& x, const Vec& xi) {
    const double w = pot.symbol(x, xi) - E0;
    return q(x, xi) * w * w;
  };
  auto grad = [q, pot, E0](const Vec& x, const Vec& xi, Vec& gx, Vec& gxi) {
    Vec qx, qxi;
    q.gradient(x, xi, qx, qxi);
    const double w = pot.symbol(x, xi) - E0;
    const double qv = q(x, xi);
    gx = qx * w * w + 2.0 * qv * w * pot.gradient(x);
    gxi = qxi * w * w + 2.0 * qv * w * xi;
  };
  Observable out(id, fn, q.box(), grad);
  out.xi_scale_ = q.xi_scale();
  return out;
}

void Observable::gradient(const Vec& x, const Vec& xi, Vec& dq_dx, Vec& dq_dxi) const {
  if (gradient_) {
    gradient_(x, xi, dq_dx, dq_dxi);
    return;
  }
  const auto n = x.size();
  dq_dx.resize(n);
  dq_dxi.resize(n);
  const double d = 1e-3;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto diff = [&](auto eval) {
      return (-eval(2.0 * d) + 8.0 * eval(d) - 8.0 * eval(-d) + eval(-2.0 * d)) / (12.0 * d);
    };
    dq_dx(i) = diff([&](double s) {
      Vec y = x;
      y(i) += s;
      return q_(y, xi);
    });
    dq_dxi(i) = diff([&](double s) {
      Vec y = xi;
      y(i) += s;
      return q_(x, y);
    });
  }
}

double Observable::hamilton_derivative(const PotentialSpec& pot, const Vec& x,
                                       const Vec& xi) const {
  Vec gx, gxi;
  gradient(x, xi, gx, gxi);
  return xi.dot(gx) - pot.gradient(x).dot(gxi);
}

}  // namespace semiwave
