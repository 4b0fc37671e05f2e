#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semiwave/potential.hpp"
#include "semiwave/types.hpp"

namespace semiwave {

/// Axis-aligned box in phase space, x in [x_lo, x_hi], xi in [xi_lo, xi_hi].
struct PhaseBox {
  Vec x_lo, x_hi, xi_lo, xi_hi;

  [[nodiscard]] int dim() const { return static_cast<int>(x_lo.size()); }
  [[nodiscard]] bool contains(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& xi) const;
  /// Radius of the smallest centered ball containing the x-projection.
  [[nodiscard]] double x_radius() const;
  static PhaseBox hull(const PhaseBox& a, const PhaseBox& b);
  static PhaseBox interval(double x_lo, double x_hi, double xi_lo, double xi_hi);
};

/// Smooth 1D profile with its derivative.
struct Profile1D {
  std::function<double(double)> f;
  std::function<double(double)> df;
  double lo = 0.0;  // f vanishes outside [lo, hi]
  double hi = 0.0;
  /// Length over which f varies; controls the lag window of Wigner pairings.
  double scale = 1.0;
};

/// exp(1 - 1/(1 - t^2)) rescaled to [center - half, center + half]; peak value 1.
Profile1D bump_profile(double center, double half_width);
/// 1 on [a, b], 0 outside [a - ramp, b + ramp], smooth in between.
Profile1D plateau_profile(double a, double b, double ramp);
/// Polynomial profile xi^k, unbounded support (only used multiplied by a bump).
Profile1D monomial_profile(int k);
Profile1D product(const Profile1D& a, const Profile1D& b);

/// Compactly supported test symbol q(x, xi) on T*R^n.
class Observable {
 public:
  using Fn = std::function<double(const Vec& x, const Vec& xi)>;
  using GradFn = std::function<void(const Vec& x, const Vec& xi, Vec& dq_dx, Vec& dq_dxi)>;

  /// 1D term phi(x) chi(xi) of a sum-of-products symbol.
  struct SeparableTerm {
    double coefficient = 1.0;
    Profile1D phi;
    Profile1D chi;
  };

  Observable() = default;
  Observable(std::string id, Fn q, PhaseBox box, GradFn gradient = {});

  /// Sum of coefficient * phi(x) chi(xi) in 1D.
  static Observable separable(std::string id, std::vector<SeparableTerm> terms);
  /// phi(x) chi(xi) in 1D.
  static Observable product_1d(std::string id, const Profile1D& phi, const Profile1D& chi);
  /// Product of bump profiles in each x and xi coordinate.
  static Observable bump(std::string id, const Vec& x_center, const Vec& x_half,
                         const Vec& xi_center, const Vec& xi_half);
  /// a q1 + b q2.
  static Observable combine(double a, const Observable& q1, double b, const Observable& q2);
  /// q (p - E0)^2 with p = xi^2/2 + V; stays separable in 1D when q is.
  static Observable shell_weighted(const Observable& q, const PotentialSpec& pot, double E0);

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] int dim() const { return box_.dim(); }
  [[nodiscard]] const PhaseBox& box() const { return box_; }
  [[nodiscard]] bool is_separable() const { return !terms_.empty(); }
  [[nodiscard]] const std::vector<SeparableTerm>& terms() const { return terms_; }
  [[nodiscard]] bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  /// Smallest momentum scale over which q varies.
  [[nodiscard]] double xi_scale() const { return xi_scale_; }
  void set_xi_scale(double s) { xi_scale_ = s; }

  [[nodiscard]] double operator()(const Vec& x, const Vec& xi) const { return q_(x, xi); }
  [[nodiscard]] double operator()(double x, double xi) const { return q_(vec1(x), vec1(xi)); }

  /// Analytic gradient if available, otherwise fourth-order central differences.
  void gradient(const Vec& x, const Vec& xi, Vec& dq_dx, Vec& dq_dxi) const;
  /// H_p q = xi . grad_x q - grad V . grad_xi q.
  [[nodiscard]] double hamilton_derivative(const PotentialSpec& pot, const Vec& x,
                                           const Vec& xi) const;

 private:
  std::string id_;
  Fn q_;
  PhaseBox box_;
  GradFn gradient_;
  std::vector<SeparableTerm> terms_;
  double xi_scale_ = 1.0;
};

}  // namespace semiwave
