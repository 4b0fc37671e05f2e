#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Core>

namespace semiwave {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// A point (x, xi) of phase space T*R^n.
template <typename Scalar>
struct PhasePoint {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorType x;
  VectorType xi;

  PhasePoint() = default;
  PhasePoint(VectorType position, VectorType momentum)
      : x(std::move(position)), xi(std::move(momentum)) {}

  [[nodiscard]] Eigen::Index dim() const { return x.size(); }
  [[nodiscard]] bool finite() const { return x.allFinite() && xi.allFinite(); }

  /// Time-reversed point (x, -xi).
  [[nodiscard]] PhasePoint reversed() const { return {x, -xi}; }
};

using PhasePointd = PhasePoint<double>;

/// One-component vector, handy for the many 1D call sites.
inline Vec vec1(double v) {
  Vec out(1);
  out(0) = v;
  return out;
}

inline Vec vec2(double a, double b) {
  Vec out(2);
  out << a, b;
  return out;
}

/// Surface measure of the unit sphere S^{n-1} (counting measure for n = 1).
inline double unit_sphere_area(int n) {
  switch (n) {
    case 1:
      return 2.0;
    case 2:
      return kTwoPi;
    case 3:
      return 4.0 * kPi;
    default:
      return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
  }
}

}  // namespace semiwave
