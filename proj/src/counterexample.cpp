#include "semiwave/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <Eigen/Dense>

#include "semiwave/errors.hpp"
#include "semiwave/ode.hpp"
#include "semiwave/parallel.hpp"
#include "semiwave/quadrature.hpp"

namespace semiwave {

double TwoBranchModel::momentum(double x) const {
  const double k2 = 2.0 * (espec.E0 - potential.value(vec1(x)));
  if (!(k2 > 0.0)) throw DomainError("no classical momentum at x = " + std::to_string(x));
  return -std::sqrt(k2);
}

namespace {

/// Travel time from the source to x < 0 along the leftgoing ray.
double travel_time(const TwoBranchModel& m, double x) {
  if (x >= 0.0) return 0.0;
  return integrate([&](double s) { return 1.0 / -m.momentum(s); }, x, 0.0, 1e-13, 1e-12).value;
}

double branch_modulus(const TwoBranchModel& m, double x, double hat_modulus, double extra_time) {
  const double gamma = m.espec.damping();
  const double decay = gamma > 0.0 ? std::exp(-gamma * (travel_time(m, x) + extra_time)) : 1.0;
  return hat_modulus * decay / std::sqrt(-m.momentum(x) * m.xi0);
}

}  // namespace

double TwoBranchModel::direct_amplitude(double x) const {
  return branch_modulus(*this, x, std::abs(profile.hat(-xi0)), 0.0);
}

double TwoBranchModel::reflected_amplitude(double x) const {
  return reflection * branch_modulus(*this, x, std::abs(profile.hat(xi0)), loop_time);
}

TwoBranchModel build_model(const PotentialSpec& pot, const EnergySpec& espec,
                           const SourceProfile& profile, double overlap_lo) {
  if (pot.dimension() != 1) throw PreconditionError("build_model: 1D potentials only");
  espec.validate(pot);
  if (!(espec.E0 < pot.max_value())) {
    std::ostringstream msg;
    msg << "E0 = " << espec.E0 << " is above the barrier (max V = " << pot.max_value()
        << "): the rightgoing ray never returns, so there is nothing to interfere";
    throw DomainError(msg.str());
  }
  TwoBranchModel m;
  m.potential = pot;
  m.espec = espec;
  m.profile = profile;
  m.overlap_lo = overlap_lo;
  m.xi0 = shell_radius(pot, espec.E0, vec1(0.0));

  // 0 -> turning point -> back through 0
  FlowOptions opts;
  opts.tol = 1e-12;
  opts.stop_event = [](const DenseSegment& seg) -> std::optional<double> {
    const double a = seg(seg.t0)(0), b = seg(seg.t1())(0);
    if (seg.t0 > 0.0 && a > 0.0 && b <= 0.0) {
      return find_root([&](double t) { return seg(t)(0); }, seg.t0, seg.t1());
    }
    return std::nullopt;
  };
  const double T_cap = 1e3 * (1.0 + pot.scale_radius()) / m.xi0;
  m.loop = flow(pot, PhasePointd(vec1(0.0), vec1(m.xi0)), T_cap, opts);
  if (m.loop.end().x(0) > 1e-8 || m.loop.turning_times.empty()) {
    throw DomainError("build_model: the rightgoing ray does not return to the source");
  }
  m.loop_time = m.loop.times.back();
  m.turning_point = m.loop.at(m.loop.turning_times.front()).x(0);
  m.action = action_integral(m.loop);
  m.maslov = maslov_count_1d(m.loop);

  const Complex ratio = profile.hat(m.xi0) / profile.hat(-m.xi0);
  m.theta_predicted = -m.maslov * kPi / 2.0 + std::arg(ratio) + espec.E1.real() * m.loop_time;
  m.theta = m.theta_predicted;
  return m;
}

PairingParts pairing_parts(const TwoBranchModel& model, const Observable& q) {
  if (q.dim() != 1) throw PreconditionError("pairing_parts: 1D observable required");
  const PhaseBox& box = q.box();
  if (box.x_lo(0) < model.overlap_lo || box.x_hi(0) > model.overlap_hi) {
    std::ostringstream msg;
    msg << "observable x-support [" << box.x_lo(0) << ", " << box.x_hi(0)
        << "] leaves the doubly covered zone [" << model.overlap_lo << ", " << model.overlap_hi
        << "]";
    throw PreconditionError(msg.str());
  }
  if (box.xi_hi(0) > 0.0) {
    throw PreconditionError("observable momentum support must be leftgoing (xi <= 0)");
  }
  const auto weight = [&](double x) { return q(vec1(x), vec1(model.momentum(x))); };
  PairingParts out;
  out.mean = integrate(
                 [&](double x) {
                   const double a = model.direct_amplitude(x), b = model.reflected_amplitude(x);
                   return weight(x) * (a * a + b * b);
                 },
                 box.x_lo(0), box.x_hi(0), 1e-14, 1e-11)
                 .value;
  out.cross = integrate(
                  [&](double x) {
                    return weight(x) * model.direct_amplitude(x) * model.reflected_amplitude(x);
                  },
                  box.x_lo(0), box.x_hi(0), 1e-14, 1e-11)
                  .value;
  return out;
}

double predicted_pairing(const TwoBranchModel& model, const Observable& q, double h) {
  const PairingParts p = pairing_parts(model, q);
  return p.mean + 2.0 * p.cross * std::cos(model.theta + model.action / h);
}

double calibrate_phase(const TwoBranchModel& model, const Observable& q, double h, double value) {
  const PairingParts p = pairing_parts(model, q);
  if (!(p.cross > 0.0)) throw PreconditionError("calibrate_phase: no overlap between branches");
  const double c = std::clamp((value - p.mean) / (2.0 * p.cross), -1.0, 1.0);
  const double base = std::acos(c);
  const double shift = model.action / h;
  // candidates theta = +-base - shift mod 2 pi
  const auto wrap = [](double a) { return std::remainder(a, kTwoPi); };
  const double t1 = base - shift, t2 = -base - shift;
  const double d1 = std::abs(wrap(t1 - model.theta_predicted));
  const double d2 = std::abs(wrap(t2 - model.theta_predicted));
  return model.theta_predicted + (d1 <= d2 ? wrap(t1 - model.theta_predicted)
                                           : wrap(t2 - model.theta_predicted));
}

std::vector<double> subsequence_limits(const TwoBranchModel& model, double nu, int K,
                                       double h_max) {
  if (!(model.action > 0.0)) throw PreconditionError("subsequence_limits: action must be positive");
  if (nu < -1.0 || nu > 1.0) throw PreconditionError("subsequence_limits: nu must lie in [-1, 1]");
  const double offset = std::acos(nu) - model.theta;
  // smallest k with a positive denominator and h_k <= h_max
  double k = std::ceil((model.action / h_max - offset) / kTwoPi);
  k = std::max(k, std::floor(-offset / kTwoPi) + 1.0);
  std::vector<double> out;
  for (int j = 0; j < K; ++j) out.push_back(model.action / (offset + kTwoPi * (k + j)));
  return out;
}

OscillationFit fit_oscillation(const std::vector<double>& h, const std::vector<double>& values,
                               double residual_limit) {
  const std::size_t n = h.size();
  if (n != values.size() || n < 5) throw PreconditionError("fit_oscillation: need >= 5 samples");
  Vec s(static_cast<Eigen::Index>(n)), v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    s(static_cast<Eigen::Index>(i)) = 1.0 / h[i];
    v(static_cast<Eigen::Index>(i)) = values[i];
  }
  const double span = s.maxCoeff() - s.minCoeff();
  if (!(span > 0.0)) throw PreconditionError("fit_oscillation: degenerate h list");

  const auto solve_linear = [&](double omega, Vec& coeffs) {
    Mat M(v.size(), 3);
    M.col(0).setOnes();
    M.col(1) = (omega * s).array().cos().matrix();
    M.col(2) = (omega * s).array().sin().matrix();
    coeffs = M.colPivHouseholderQr().solve(v);
    return (M * coeffs - v).squaredNorm();
  };

  // sampling limit of the (possibly uneven) 1/h grid
  const double gap = span / static_cast<double>(n - 1);
  const double omega_max = kPi / gap;
  const double omega_min = kPi / span;
  const double d_omega = kTwoPi / span / 40.0;
  Vec coeffs;
  double best = std::numeric_limits<double>::infinity(), best_omega = omega_min;
  for (double w = omega_min; w <= omega_max; w += d_omega) {
    const double r = solve_linear(w, coeffs);
    if (r < best) {
      best = r;
      best_omega = w;
    }
  }
  const auto refined = boost::math::tools::brent_find_minima(
      [&](double w) {
        Vec c;
        return solve_linear(w, c);
      },
      best_omega - d_omega, best_omega + d_omega, 52);

  OscillationFit fit;
  fit.h = h;
  fit.values = values;
  fit.omega = refined.first;
  const double rss = solve_linear(fit.omega, coeffs);
  fit.mean = coeffs(0);
  fit.amplitude = std::hypot(coeffs(1), coeffs(2));
  // B cos(w s + phi) = B cos phi cos(w s) - B sin phi sin(w s)
  fit.phase = std::atan2(-coeffs(2), coeffs(1));
  fit.residual = std::sqrt(rss / static_cast<double>(n));
  if (fit.residual <= residual_limit * fit.amplitude) {
    fit.verdict = Verdict::holds;
  } else {
    std::ostringstream msg;
    msg << "fit residual " << fit.residual << " exceeds " << residual_limit
        << " of the fitted amplitude " << fit.amplitude;
    fit.note = msg.str();
  }
  return fit;
}

std::vector<double> pairing_scan(const Observable& q, const PotentialSpec& pot,
                                 const EnergySpec& espec, const SourceProfile& profile,
                                 const std::vector<double>& h_list, const ScanOptions& options) {
  return parallel_map(h_list.size(), [&](std::size_t i) {
    const double h = h_list[i];
    const Grid1D grid = make_grid(pot, espec, profile, h, options.grid);
    const WaveField field = solve(pot, espec, profile, h, grid);
    return wigner_pair(q, field, options.wigner).value;
  });
}

OscillationFit measure_oscillation(const TwoBranchModel& model, const Observable& q,
                                   const std::vector<double>& h_list, const ScanOptions& options) {
  pairing_parts(model, q);
  const auto values = pairing_scan(q, model.potential, model.espec, model.profile, h_list, options);
  OscillationFit fit = fit_oscillation(h_list, values);
  for (double h : h_list) fit.predictions.push_back(predicted_pairing(model, q, h));
  return fit;
}

}  // namespace semiwave
