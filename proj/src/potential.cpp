#include "semiwave/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/Splines>

#include "semiwave/errors.hpp"

namespace semiwave {

namespace {

constexpr double kNegligible = 1e-14;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

struct PotentialSpec::Spline {
  Eigen::Spline<double, 1, 3> curve;
  double x0;
  double x1;

  /// Value and first two x-derivatives; zero outside [x0, x1].
  [[nodiscard]] std::array<double, 3> eval(double x) const {
    if (x <= x0 || x >= x1) return {0.0, 0.0, 0.0};
    const double scale = 1.0 / (x1 - x0);
    const auto d = curve.derivatives((x - x0) * scale, 2);
    return {d(0, 0), d(0, 1) * scale, d(0, 2) * scale * scale};
  }
};

std::string to_string(PotentialFamily family) {
  switch (family) {
    case PotentialFamily::zero:
      return "zero";
    case PotentialFamily::gaussian_bump:
      return "gaussian-bump";
    case PotentialFamily::barrier_1d:
      return "barrier-1d";
    case PotentialFamily::harmonic_test:
      return "harmonic-test";
    case PotentialFamily::double_well:
      return "double-well";
    case PotentialFamily::ramp_1d:
      return "ramp-1d";
    case PotentialFamily::tabulated:
      return "tabulated";
  }
  return "unknown";
}

PotentialFamily parse_potential_family(const std::string& name) {
  for (auto f : {PotentialFamily::zero, PotentialFamily::gaussian_bump,
                 PotentialFamily::barrier_1d, PotentialFamily::harmonic_test,
                 PotentialFamily::double_well, PotentialFamily::ramp_1d,
                 PotentialFamily::tabulated}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown potential family '" + name + "'");
}

PotentialSpec::PotentialSpec(PotentialFamily family, int dimension, std::vector<double> params,
                             double decay_rate)
    : family_(family),
      dimension_(dimension),
      params_(std::move(params)),
      decay_rate_(decay_rate > 0.0 ? decay_rate : 2.0) {
  validate();
}

void PotentialSpec::validate() {
  if (dimension_ < 1 || dimension_ > 3) throw ConfigError("potential dimension must be 1, 2 or 3");
  const auto need = [&](std::size_t count) {
    if (params_.size() != count) {
      throw ConfigError("potential '" + to_string(family_) + "' expects " +
                        std::to_string(count) + " parameters, got " +
                        std::to_string(params_.size()));
    }
  };
  const auto one_dimensional = [&] {
    if (dimension_ != 1) throw ConfigError("potential '" + to_string(family_) + "' is 1D only");
  };
  switch (family_) {
    case PotentialFamily::zero:
      need(0);
      break;
    case PotentialFamily::gaussian_bump: {
      need(2 + static_cast<std::size_t>(dimension_));
      Vec c(dimension_);
      for (int i = 0; i < dimension_; ++i) c(i) = params_[2 + i];
      bumps_.push_back({params_[0], params_[1], c});
      break;
    }
    case PotentialFamily::barrier_1d:
      one_dimensional();
      need(3);
      bumps_.push_back({params_[0], params_[1], vec1(params_[2])});
      break;
    case PotentialFamily::harmonic_test:
      need(1);
      break;
    case PotentialFamily::double_well:
      one_dimensional();
      need(3);
      bumps_.push_back({params_[0], params_[1], vec1(-params_[2])});
      bumps_.push_back({params_[0], params_[1], vec1(params_[2])});
      break;
    case PotentialFamily::ramp_1d:
      one_dimensional();
      need(4);
      if (!(params_[2] > params_[1]) || !(params_[3] > 0.0)) {
        throw ConfigError("ramp-1d needs left < right and steepness > 0");
      }
      break;
    case PotentialFamily::tabulated: {
      one_dimensional();
      if (params_.size() < 8 || params_.size() % 2 != 0) {
        throw ConfigError("tabulated potential needs at least 4 (x, V) pairs");
      }
      const std::size_t m = params_.size() / 2;
      Eigen::RowVectorXd xs(m);
      Eigen::Matrix<double, 1, Eigen::Dynamic> vs(m);
      for (std::size_t i = 0; i < m; ++i) {
        xs(i) = params_[i];
        vs(i) = params_[m + i];
        if (i > 0 && !(xs(i) > xs(i - 1))) {
          throw ConfigError("tabulated potential abscissae must be strictly increasing");
        }
      }
      const double vmax = vs.cwiseAbs().maxCoeff();
      if (std::abs(vs(0)) > 1e-8 * std::max(1.0, vmax) ||
          std::abs(vs(m - 1)) > 1e-8 * std::max(1.0, vmax)) {
        throw ConfigError("tabulated potential must vanish at both ends of the table");
      }
      const double x0 = xs(0), x1 = xs(m - 1);
      const Eigen::RowVectorXd knots = (xs.array() - x0) / (x1 - x0);
      auto curve = Eigen::SplineFitting<Eigen::Spline<double, 1, 3>>::Interpolate(vs, 3, knots);
      spline_ = std::make_shared<const Spline>(Spline{curve, x0, x1});
      break;
    }
  }
  for (double p : params_) {
    if (!std::isfinite(p)) throw ConfigError("non-finite potential parameter");
  }
  for (const auto& b : bumps_) {
    if (!(b.width > 0.0)) throw ConfigError("bump width must be positive");
  }
}

PotentialSpec PotentialSpec::zero(int dimension) {
  return {PotentialFamily::zero, dimension, {}};
}

PotentialSpec PotentialSpec::gaussian_bump(int dimension, double height, double width,
                                           const Vec& center) {
  std::vector<double> p{height, width};
  for (Eigen::Index i = 0; i < center.size(); ++i) p.push_back(center(i));
  return {PotentialFamily::gaussian_bump, dimension, p};
}

PotentialSpec PotentialSpec::barrier_1d(double height, double width, double center) {
  return {PotentialFamily::barrier_1d, 1, {height, width, center}};
}

PotentialSpec PotentialSpec::harmonic_test(int dimension, double omega) {
  return {PotentialFamily::harmonic_test, dimension, {omega}};
}

PotentialSpec PotentialSpec::double_well(double height, double width, double separation) {
  return {PotentialFamily::double_well, 1, {height, width, separation}};
}

PotentialSpec PotentialSpec::ramp_1d(double height, double left, double right, double steepness) {
  return {PotentialFamily::ramp_1d, 1, {height, left, right, steepness}};
}

PotentialSpec PotentialSpec::tabulated(const std::vector<double>& x, const std::vector<double>& v) {
  if (x.size() != v.size()) throw ConfigError("tabulated potential: column length mismatch");
  std::vector<double> p(x);
  p.insert(p.end(), v.begin(), v.end());
  return {PotentialFamily::tabulated, 1, p};
}

PotentialSpec PotentialSpec::tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential table '" + path + "'");
  std::vector<double> xs, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (row >> a >> b) {
      xs.push_back(a);
      vs.push_back(b);
    }
  }
  return tabulated(xs, vs);
}

std::string PotentialSpec::id() const {
  std::ostringstream out;
  out << to_string(family_) << "/n" << dimension_;
  if (family_ == PotentialFamily::tabulated) {
    out << "/" << params_.size() / 2 << "pts";
  } else {
    for (double p : params_) out << "/" << p;
  }
  return out.str();
}

double PotentialSpec::value(const Eigen::Ref<const Vec>& x) const {
  switch (family_) {
    case PotentialFamily::zero:
      return 0.0;
    case PotentialFamily::harmonic_test:
      return 0.5 * params_[0] * params_[0] * x.squaredNorm();
    case PotentialFamily::ramp_1d: {
      const double k = params_[3];
      return params_[0] * (logistic(k * (x(0) - params_[1])) - logistic(k * (x(0) - params_[2])));
    }
    case PotentialFamily::tabulated:
      return spline_->eval(x(0))[0];
    default: {
      double v = 0.0;
      for (const auto& b : bumps_) {
        v += b.height * std::exp(-(x - b.center).squaredNorm() / (b.width * b.width));
      }
      return v;
    }
  }
}

Vec PotentialSpec::gradient(const Eigen::Ref<const Vec>& x) const {
  switch (family_) {
    case PotentialFamily::zero:
      return Vec::Zero(x.size());
    case PotentialFamily::harmonic_test:
      return params_[0] * params_[0] * x;
    case PotentialFamily::ramp_1d: {
      const double k = params_[3];
      const auto ds = [k](double z) {
        const double s = logistic(k * z);
        return k * s * (1.0 - s);
      };
      return vec1(params_[0] * (ds(x(0) - params_[1]) - ds(x(0) - params_[2])));
    }
    case PotentialFamily::tabulated:
      return vec1(spline_->eval(x(0))[1]);
    default: {
      Vec g = Vec::Zero(x.size());
      for (const auto& b : bumps_) {
        const double w2 = b.width * b.width;
        g += b.height * std::exp(-(x - b.center).squaredNorm() / w2) * (-2.0 / w2) *
             (x - b.center);
      }
      return g;
    }
  }
}

Mat PotentialSpec::hessian(const Eigen::Ref<const Vec>& x) const {
  const auto n = x.size();
  switch (family_) {
    case PotentialFamily::zero:
      return Mat::Zero(n, n);
    case PotentialFamily::harmonic_test:
      return params_[0] * params_[0] * Mat::Identity(n, n);
    case PotentialFamily::ramp_1d: {
      const double k = params_[3];
      const auto d2s = [k](double z) {
        const double s = logistic(k * z);
        return k * k * s * (1.0 - s) * (1.0 - 2.0 * s);
      };
      Mat out(1, 1);
      out(0, 0) = params_[0] * (d2s(x(0) - params_[1]) - d2s(x(0) - params_[2]));
      return out;
    }
    case PotentialFamily::tabulated: {
      Mat out(1, 1);
      out(0, 0) = spline_->eval(x(0))[2];
      return out;
    }
    default: {
      Mat hess = Mat::Zero(n, n);
      for (const auto& b : bumps_) {
        const double w2 = b.width * b.width;
        const Vec d = x - b.center;
        const double e = b.height * std::exp(-d.squaredNorm() / w2);
        hess += e * (4.0 / (w2 * w2) * d * d.transpose() - 2.0 / w2 * Mat::Identity(n, n));
      }
      return hess;
    }
  }
}

double PotentialSpec::scale_radius() const {
  switch (family_) {
    case PotentialFamily::zero:
      return 0.0;
    case PotentialFamily::harmonic_test:
      return std::numeric_limits<double>::infinity();
    case PotentialFamily::ramp_1d: {
      const double reach = std::log(std::max(1.0, std::abs(params_[0]) * params_[3]) / kNegligible);
      return std::max(std::abs(params_[1]), std::abs(params_[2])) + reach / params_[3];
    }
    case PotentialFamily::tabulated:
      return std::max(std::abs(spline_->x0), std::abs(spline_->x1));
    default: {
      double r = 0.0;
      for (const auto& b : bumps_) {
        const double amp = std::max(1.0, std::abs(b.height) / b.width);
        r = std::max(r, b.center.norm() + b.width * std::sqrt(std::log(amp / kNegligible) + 4.0));
      }
      return r;
    }
  }
}

double PotentialSpec::max_value() const {
  switch (family_) {
    case PotentialFamily::zero:
      return 0.0;
    case PotentialFamily::harmonic_test:
      return std::numeric_limits<double>::infinity();
    case PotentialFamily::gaussian_bump:
    case PotentialFamily::barrier_1d:
      return std::max(0.0, bumps_.front().height);
    default: {
      // 1D families: dense sampling plus golden-section polish of the best sample.
      const double r = scale_radius();
      constexpr int kSamples = 20001;
      double best_x = 0.0, best = 0.0;
      for (int i = 0; i < kSamples; ++i) {
        const double x = -r + 2.0 * r * i / (kSamples - 1);
        const double v = value(x);
        if (v > best) {
          best = v;
          best_x = x;
        }
      }
      if (best <= 0.0) return 0.0;
      const double step = 2.0 * r / (kSamples - 1);
      double a = best_x - step, b = best_x + step;
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 80; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (value(c) > value(d)) {
          b = d;
        } else {
          a = c;
        }
      }
      return std::max(best, value(0.5 * (a + b)));
    }
  }
}

void EnergySpec::validate(const PotentialSpec& pot) const {
  if (!std::isfinite(E0) || !std::isfinite(E1.real()) || !std::isfinite(E1.imag())) {
    throw ConfigError("energy values must be finite");
  }
  if (E1.imag() < 0.0) {
    throw ConfigError("hypothesis H6 violated: Im E1 = " + std::to_string(E1.imag()) +
                      " < 0 (the energy must approach the real axis from above)");
  }
  if (!(E0 > 0.0)) throw ConfigError("hypothesis H6 violated: E0 must be strictly positive");
  const double v0 = pot.value(Vec::Zero(pot.dimension()));
  if (!(E0 > v0)) {
    throw ConfigError("hypothesis H3 violated: E0 = " + std::to_string(E0) +
                      " <= V(0) = " + std::to_string(v0));
  }
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] > 0.0)) throw ConfigError("h_grid entries must be positive");
    if (i > 0 && !(h_grid[i] < h_grid[i - 1])) {
      throw ConfigError("h_grid must be strictly decreasing");
    }
  }
}

double shell_radius(const PotentialSpec& pot, double E0, const Eigen::Ref<const Vec>& base) {
  const double gap = E0 - pot.value(base);
  if (!(gap > 0.0)) {
    throw DomainError("no classical sphere: E0 <= V(base)");
  }
  return std::sqrt(2.0 * gap);
}

}  // namespace semiwave
