#include "semiwave/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace semiwave {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

Vec DenseSegment::operator()(double t) const {
  const double theta = step == 0.0 ? 0.0 : (t - t0) / step;
  const double theta1 = 1.0 - theta;
  return coeffs[0] +
         theta * (coeffs[1] + theta1 * (coeffs[2] + theta * (coeffs[3] + theta1 * coeffs[4])));
}

Vec DenseSolution::operator()(double t) const {
  if (segments_.empty()) throw std::logic_error("empty dense solution");
  t = std::clamp(t, t_begin(), t_end());
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double value, const DenseSegment& s) { return value < s.t0; });
  if (it != segments_.begin()) --it;
  return (*it)(t);
}

DormandPrince::DormandPrince(Rhs rhs, double t0, Vec y0, OdeOptions options)
    : rhs_(std::move(rhs)),
      options_(options),
      t_(t0),
      t_prev_(t0),
      y_(std::move(y0)),
      y_prev_(y_),
      h_(0.0) {
  for (auto& k : k_) k.resize(y_.size());
  y_stage_.resize(y_.size());
  y_new_.resize(y_.size());
  rhs_(t_, y_, k_[0]);
  h_ = options_.initial_step > 0.0 ? options_.initial_step : initial_step();
  h_ = std::min(h_, options_.max_step);
  segment_.t0 = t0;
  segment_.step = 0.0;
  for (auto& c : segment_.coeffs) c = Vec::Zero(y_.size());
  segment_.coeffs[0] = y_;
}

double DormandPrince::initial_step() const {
  const Vec scale =
      (options_.atol + options_.rtol * y_.array().abs()).matrix();
  const double d0 = std::sqrt((y_.array() / scale.array()).square().mean());
  const double d1v = std::sqrt((k_[0].array() / scale.array()).square().mean());
  double h0 = (d0 < 1e-5 || d1v < 1e-5) ? 1e-6 : 0.01 * d0 / d1v;
  // One explicit Euler probe for the second derivative scale.
  Vec y1 = y_ + h0 * k_[0];
  Vec f1(y_.size());
  rhs_(t_ + h0, y1, f1);
  const double d2 = std::sqrt((((f1 - k_[0]).array()) / scale.array()).square().mean()) / h0;
  const double h1 = std::max(d1v, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                               : std::pow(0.01 / std::max(d1v, d2), 1.0 / 5.0);
  return std::min(100.0 * h0, h1);
}

void DormandPrince::step(double t_stop) {
  if (!(t_stop > t_)) throw std::invalid_argument("DormandPrince::step: t_stop <= t");
  if (accepted_ + rejected_ >= options_.max_steps) {
    throw StepUnderflow("maximum number of steps exceeded at t=" + std::to_string(t_));
  }
  for (;;) {
    double h = std::min(h_, options_.max_step);
    bool last = false;
    if (t_ + h >= t_stop) {
      h = t_stop - t_;
      last = true;
    }
    const double h_min = options_.min_step_ratio * std::max(1.0, std::abs(t_));
    if (h < h_min && !last) {
      throw StepUnderflow("step size underflow at t=" + std::to_string(t_));
    }

    y_stage_ = y_ + h * a21 * k_[0];
    rhs_(t_ + c2 * h, y_stage_, k_[1]);
    y_stage_ = y_ + h * (a31 * k_[0] + a32 * k_[1]);
    rhs_(t_ + c3 * h, y_stage_, k_[2]);
    y_stage_ = y_ + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    rhs_(t_ + c4 * h, y_stage_, k_[3]);
    y_stage_ = y_ + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    rhs_(t_ + c5 * h, y_stage_, k_[4]);
    y_stage_ = y_ + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
    rhs_(t_ + h, y_stage_, k_[5]);
    y_new_ = y_ + h * (a71 * k_[0] + a73 * k_[2] + a74 * k_[3] + a75 * k_[4] + a76 * k_[5]);
    rhs_(t_ + h, y_new_, k_[6]);

    const Vec err =
        h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);
    const Eigen::ArrayXd scale =
        options_.atol + options_.rtol * y_.array().abs().max(y_new_.array().abs());
    double err_norm = std::sqrt((err.array() / scale).square().mean());
    if (!std::isfinite(err_norm)) err_norm = 1e10;

    if (err_norm <= 1.0) {
      segment_.t0 = t_;
      segment_.step = h;
      segment_.coeffs[0] = y_;
      segment_.coeffs[1] = y_new_ - y_;
      segment_.coeffs[2] = h * k_[0] - segment_.coeffs[1];
      segment_.coeffs[3] = segment_.coeffs[1] - h * k_[6] - segment_.coeffs[2];
      segment_.coeffs[4] =
          h * (d1 * k_[0] + d3 * k_[2] + d4 * k_[3] + d5 * k_[4] + d6 * k_[5] + d7 * k_[6]);

      t_prev_ = t_;
      y_prev_ = y_;
      t_ = last ? t_stop : t_ + h;
      y_ = y_new_;
      k_[0] = k_[6];
      ++accepted_;
      const double factor =
          err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      if (!last || factor < 1.0) h_ = h * factor;
      return;
    }
    ++rejected_;
    if (accepted_ + rejected_ >= options_.max_steps) {
      throw StepUnderflow("maximum number of steps exceeded at t=" + std::to_string(t_));
    }
    h_ = h * std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
    if (h_ < h_min) throw StepUnderflow("step size underflow at t=" + std::to_string(t_));
  }
}

double find_root(const std::function<double(double)>& g, double a, double b, double xtol) {
  double fa = g(a);
  double fb = g(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw std::invalid_argument("find_root: no sign change");
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = d;
      }
    } else {
      d = m;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = g(b);
  }
  return b;
}

}  // namespace semiwave
