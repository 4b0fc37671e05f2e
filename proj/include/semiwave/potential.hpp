#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semiwave/types.hpp"

namespace semiwave {

enum class PotentialFamily {
  zero,
  gaussian_bump,
  barrier_1d,
  harmonic_test,
  double_well,
  ramp_1d,
  tabulated,
};

std::string to_string(PotentialFamily family);
PotentialFamily parse_potential_family(const std::string& name);

/// Smooth potential V on R^n together with its derivatives.
///
/// Parameter vectors by family:
///   zero           ()
///   gaussian-bump  (height, width, center_1..center_n)   V = height exp(-|x-c|^2 / width^2)
///   barrier-1d     (height, width, center)               1D gaussian-bump
///   harmonic-test  (omega)                               V = omega^2 |x|^2 / 2, non-decaying
///   double-well    (height, width, separation)           1D bumps at +-separation
///   ramp-1d        (height, left, right, steepness)      1D mesa height (s(x-left) - s(x-right)),
///                                                        s the logistic of slope steepness
///   tabulated      (x_1..x_m, V_1..V_m)                  1D cubic spline, zero outside the table
class PotentialSpec {
 public:
  PotentialSpec() : PotentialSpec(PotentialFamily::zero, 1, {}) {}
  PotentialSpec(PotentialFamily family, int dimension, std::vector<double> params,
                double decay_rate = 0.0);

  static PotentialSpec zero(int dimension = 1);
  static PotentialSpec gaussian_bump(int dimension, double height, double width, const Vec& center);
  static PotentialSpec barrier_1d(double height = 1.0, double width = 1.0, double center = 2.0);
  static PotentialSpec harmonic_test(int dimension = 1, double omega = 1.0);
  static PotentialSpec double_well(double height = 1.0, double width = 0.5, double separation = 2.0);
  static PotentialSpec ramp_1d(double height = 1.0, double left = 1.5, double right = 4.0,
                               double steepness = 4.0);
  static PotentialSpec tabulated(const std::vector<double>& x, const std::vector<double>& v);
  /// Two-column CSV (x, V); '#' lines and a non-numeric header are skipped.
  static PotentialSpec tabulated_csv(const std::string& path);

  [[nodiscard]] PotentialFamily family() const { return family_; }
  [[nodiscard]] int dimension() const { return dimension_; }
  [[nodiscard]] const std::vector<double>& params() const { return params_; }
  /// Declared decay exponent rho in |V(x)| <= C <x>^{-rho}.
  [[nodiscard]] double decay_rate() const { return decay_rate_; }
  [[nodiscard]] bool decaying() const { return family_ != PotentialFamily::harmonic_test; }
  [[nodiscard]] std::string id() const;

  [[nodiscard]] double value(const Eigen::Ref<const Vec>& x) const;
  [[nodiscard]] Vec gradient(const Eigen::Ref<const Vec>& x) const;
  [[nodiscard]] Mat hessian(const Eigen::Ref<const Vec>& x) const;

  double value(double x) const { return value(vec1(x)); }
  double derivative(double x) const { return gradient(vec1(x))(0); }

  /// Radius beyond which |V| and |grad V| are below 1e-14 (infinite when non-decaying).
  [[nodiscard]] double scale_radius() const;
  /// Upper bound of V over R^n (infinite when unbounded).
  [[nodiscard]] double max_value() const;

  /// p(x, xi) = |xi|^2 / 2 + V(x).
  [[nodiscard]] double symbol(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& xi) const {
    return 0.5 * xi.squaredNorm() + value(x);
  }

 private:
  struct Bump {
    double height;
    double width;
    Vec center;
  };
  struct Spline;

  void validate();

  PotentialFamily family_;
  int dimension_;
  std::vector<double> params_;
  double decay_rate_;
  std::vector<Bump> bumps_;
  std::shared_ptr<const Spline> spline_;
};

/// Complex-energy data E = E0 + h E1 and the semiclassical parameter list.
struct EnergySpec {
  double E0 = 0.5;
  Complex E1{0.0, 0.0};
  std::vector<double> h_grid{0.04, 0.02, 0.01, 0.005};

  [[nodiscard]] Complex energy(double h) const { return E0 + h * E1; }
  [[nodiscard]] double damping() const { return E1.imag(); }

  /// Checks Im E1 >= 0 (H6), E0 > V(0) (H3), E0 > 0 and a strictly decreasing
  /// positive h_grid. Throws ConfigError naming the violated hypothesis.
  void validate(const PotentialSpec& pot) const;
};

/// Radius of the classical momentum sphere over base, sqrt(2 (E0 - V(base))).
double shell_radius(const PotentialSpec& pot, double E0, const Eigen::Ref<const Vec>& base);

}  // namespace semiwave
