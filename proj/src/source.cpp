#include "semiwave/source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unsupported/Eigen/Splines>

#include "semiwave/errors.hpp"
#include "semiwave/quadrature.hpp"

namespace semiwave {

struct SourceProfile::Table {
  Eigen::Spline<double, 2, 3> curve;
  double y0;
  double y1;
  double l2;

  [[nodiscard]] Complex eval(double y) const {
    if (y <= y0 || y >= y1) return 0.0;
    const auto p = curve((y - y0) / (y1 - y0));
    return {p(0), p(1)};
  }
};

std::string to_string(ProfileFamily family) {
  return family == ProfileFamily::gaussian ? "gaussian" : "tabulated";
}

std::string to_string(ProfileNormalization normalization) {
  return normalization == ProfileNormalization::raw ? "raw" : "unit-fourier-peak";
}

ProfileFamily parse_profile_family(const std::string& name) {
  if (name == "gaussian") return ProfileFamily::gaussian;
  if (name == "tabulated") return ProfileFamily::tabulated;
  throw ConfigError("unknown source family '" + name + "'");
}

ProfileNormalization parse_profile_normalization(const std::string& name) {
  if (name == "raw") return ProfileNormalization::raw;
  if (name == "unit-fourier-peak") return ProfileNormalization::unit_fourier_peak;
  throw ConfigError("unknown source normalization '" + name + "'");
}

SourceProfile SourceProfile::gaussian(int dimension, double width, double amplitude,
                                      ProfileNormalization normalization, Vec center) {
  if (dimension < 1 || dimension > 3) throw ConfigError("source dimension must be 1, 2 or 3");
  if (!(width > 0.0)) throw ConfigError("source width must be positive");
  SourceProfile s;
  s.family_ = ProfileFamily::gaussian;
  s.normalization_ = normalization;
  s.dimension_ = dimension;
  s.width_ = width;
  s.amplitude_ = amplitude;
  s.center_ = center.size() == 0 ? Vec::Zero(dimension) : std::move(center);
  if (s.center_.size() != dimension) throw ConfigError("source center has the wrong dimension");
  s.prefactor_ = normalization == ProfileNormalization::unit_fourier_peak
                     ? amplitude * std::pow(kTwoPi * width * width, -0.5 * dimension)
                     : amplitude;
  return s;
}

SourceProfile SourceProfile::tabulated(const std::vector<double>& y, const std::vector<double>& re,
                                       const std::vector<double>& im) {
  const std::size_t m = y.size();
  if (m < 4 || re.size() != m || (!im.empty() && im.size() != m)) {
    throw ConfigError("tabulated source needs >= 4 rows and matching columns");
  }
  Eigen::RowVectorXd knots(m);
  Eigen::Matrix<double, 2, Eigen::Dynamic> pts(2, m);
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0 && !(y[i] > y[i - 1])) throw ConfigError("tabulated source abscissae must increase");
    knots(i) = (y[i] - y.front()) / (y.back() - y.front());
    pts(0, i) = re[i];
    pts(1, i) = im.empty() ? 0.0 : im[i];
  }
  SourceProfile s;
  s.family_ = ProfileFamily::tabulated;
  s.normalization_ = ProfileNormalization::raw;
  s.dimension_ = 1;
  s.center_ = Vec::Zero(1);
  auto table = std::make_shared<Table>();
  table->curve = Eigen::SplineFitting<Eigen::Spline<double, 2, 3>>::Interpolate(pts, 3, knots);
  table->y0 = y.front();
  table->y1 = y.back();
  const auto sq = integrate([&](double t) { return std::norm(table->eval(t)); }, table->y0,
                            table->y1, 1e-14, 1e-12, 20000);
  table->l2 = std::sqrt(sq.value);
  s.width_ = 0.5 * (y.back() - y.front());
  s.table_ = std::move(table);
  return s;
}

SourceProfile SourceProfile::tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open source table '" + path + "'");
  std::vector<double> y, re, im;
  std::string line;
  bool has_imag = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b, c;
    if (!(row >> a >> b)) continue;
    y.push_back(a);
    re.push_back(b);
    if (row >> c) {
      im.push_back(c);
    } else {
      has_imag = false;
    }
  }
  if (!has_imag) im.clear();
  return tabulated(y, re, im);
}

std::string SourceProfile::id() const {
  std::ostringstream out;
  out << to_string(family_) << "/n" << dimension_;
  if (family_ == ProfileFamily::gaussian) {
    out << "/w" << width_ << "/a" << amplitude_ << "/" << to_string(normalization_);
  }
  return out.str();
}

Complex SourceProfile::operator()(const Eigen::Ref<const Vec>& y) const {
  if (family_ == ProfileFamily::tabulated) return table_->eval(y(0));
  return prefactor_ * std::exp(-(y - center_).squaredNorm() / (2.0 * width_ * width_));
}

Complex SourceProfile::hat(const Eigen::Ref<const Vec>& xi) const {
  if (family_ == ProfileFamily::tabulated) {
    const double k = xi(0);
    const auto res = integrate_complex(
        [&](double y) { return table_->eval(y) * std::exp(Complex(0.0, -k * y)); }, table_->y0,
        table_->y1, 1e-13, 1e-11, 20000);
    return res.value;
  }
  const double mass = prefactor_ * std::pow(kTwoPi * width_ * width_, 0.5 * dimension_);
  return mass * std::exp(-0.5 * width_ * width_ * xi.squaredNorm()) *
         std::exp(Complex(0.0, -center_.dot(xi)));
}

double SourceProfile::l2_norm() const {
  if (family_ == ProfileFamily::tabulated) return table_->l2;
  // int exp(-|y|^2 / w^2) dy = (pi w^2)^{n/2}
  return std::abs(prefactor_) * std::pow(kPi * width_ * width_, 0.25 * dimension_);
}

double SourceProfile::support_radius() const {
  if (family_ == ProfileFamily::tabulated) {
    return std::max(std::abs(table_->y0), std::abs(table_->y1));
  }
  return center_.norm() + 9.0 * width_;
}

Complex source_h(const SourceProfile& profile, double h, const Eigen::Ref<const Vec>& x) {
  return std::pow(h, -0.5 * profile.dimension()) * profile(x / h);
}

CVec make_S_h(const SourceProfile& profile, double h, const Vec& grid) {
  if (!(h > 0.0)) throw PreconditionError("make_S_h: h must be positive");
  if (profile.dimension() != 1) throw PreconditionError("make_S_h: 1D grids only");
  if (grid.size() >= 2) {
    const double dx = (grid(grid.size() - 1) - grid(0)) / static_cast<double>(grid.size() - 1);
    if (dx > profile.width() * h / 8.0) {
      throw ResolutionError("grid spacing " + std::to_string(dx) +
                            " does not resolve the source scale h * width / 8 = " +
                            std::to_string(profile.width() * h / 8.0));
    }
  }
  CVec out(grid.size());
  const double scale = std::pow(h, -0.5);
  for (Eigen::Index i = 0; i < grid.size(); ++i) out(i) = scale * profile(grid(i) / h);
  return out;
}

SphereDensity sphere_density(const SourceProfile& profile, const PotentialSpec& pot,
                             const EnergySpec& espec, const Vec& base, int n_nodes) {
  const int n = pot.dimension();
  if (profile.dimension() != n) throw PreconditionError("sphere_density: dimension mismatch");
  if (n > 2) throw PreconditionError("sphere_density: n <= 2 supported");
  SphereDensity d;
  d.base = base;
  d.dimension = n;
  d.radius = shell_radius(pot, espec.E0, base);
  if (n == 1) {
    d.nodes = {vec1(d.radius), vec1(-d.radius)};
    d.weights = Vec::Ones(2);
  } else {
    if (n_nodes < 3) throw PreconditionError("sphere_density: need >= 3 nodes on the circle");
    for (int k = 0; k < n_nodes; ++k) {
      const double a = kTwoPi * k / n_nodes;
      d.nodes.push_back(d.radius * vec2(std::cos(a), std::sin(a)));
    }
    d.weights = Vec::Constant(n_nodes, kTwoPi * d.radius / n_nodes);
  }
  const double prefactor = std::pow(kTwoPi, 1 - n);
  d.density.resize(static_cast<Eigen::Index>(d.nodes.size()));
  for (std::size_t i = 0; i < d.nodes.size(); ++i) {
    d.density(static_cast<Eigen::Index>(i)) = prefactor * std::norm(profile.hat(d.nodes[i]));
  }
  return d;
}

}  // namespace semiwave
