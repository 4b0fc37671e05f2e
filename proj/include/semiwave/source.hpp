#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semiwave/potential.hpp"
#include "semiwave/types.hpp"

namespace semiwave {

enum class ProfileFamily { gaussian, tabulated };

/// raw:                S is taken as given.
/// unit-fourier-peak:  gaussian amplitude rescaled so that |S^(0)| = amplitude.
enum class ProfileNormalization { raw, unit_fourier_peak };

std::string to_string(ProfileFamily family);
std::string to_string(ProfileNormalization normalization);
ProfileFamily parse_profile_family(const std::string& name);
ProfileNormalization parse_profile_normalization(const std::string& name);

/// Source profile S on R^n and its Fourier transform S^(xi) = int e^{-i y.xi} S(y) dy.
class SourceProfile {
 public:
  /// amplitude * exp(-|y - center|^2 / (2 width^2)), times (2 pi width^2)^{-n/2}
  /// under unit-fourier-peak.
  static SourceProfile gaussian(int dimension = 1, double width = 1.0, double amplitude = 1.0,
                                ProfileNormalization normalization =
                                    ProfileNormalization::unit_fourier_peak,
                                Vec center = {});
  /// 1D cubic-spline profile, zero outside the table. imag may be empty.
  static SourceProfile tabulated(const std::vector<double>& y, const std::vector<double>& re,
                                 const std::vector<double>& im = {});
  /// CSV with columns y, S (and optionally Im S).
  static SourceProfile tabulated_csv(const std::string& path);

  [[nodiscard]] ProfileFamily family() const { return family_; }
  [[nodiscard]] ProfileNormalization normalization() const { return normalization_; }
  [[nodiscard]] int dimension() const { return dimension_; }
  [[nodiscard]] double width() const { return width_; }
  [[nodiscard]] double amplitude() const { return amplitude_; }
  [[nodiscard]] const Vec& center() const { return center_; }
  [[nodiscard]] std::string id() const;

  [[nodiscard]] Complex operator()(const Eigen::Ref<const Vec>& y) const;
  [[nodiscard]] Complex operator()(double y) const { return (*this)(vec1(y)); }
  [[nodiscard]] Complex hat(const Eigen::Ref<const Vec>& xi) const;
  [[nodiscard]] Complex hat(double xi) const { return hat(vec1(xi)); }

  /// ||S||_{L^2(R^n)}.
  [[nodiscard]] double l2_norm() const;
  /// Radius in profile coordinates outside which |S| is negligible.
  [[nodiscard]] double support_radius() const;

 private:
  struct Table;

  ProfileFamily family_ = ProfileFamily::gaussian;
  ProfileNormalization normalization_ = ProfileNormalization::unit_fourier_peak;
  int dimension_ = 1;
  double width_ = 1.0;
  double amplitude_ = 1.0;
  double prefactor_ = 1.0;
  Vec center_;
  std::shared_ptr<const Table> table_;
};

/// S_h(x) = h^{-n/2} S(x / h).
Complex source_h(const SourceProfile& profile, double h, const Eigen::Ref<const Vec>& x);

/// Samples of S_h on a uniform 1D grid. Throws ResolutionError unless the grid
/// has at least 8 points per source width h * width.
CVec make_S_h(const SourceProfile& profile, double h, const Vec& grid);

/// Source density on the classical sphere {xi : |xi|^2 / 2 + V(base) = E0}.
struct SphereDensity {
  Vec base;
  double radius = 0.0;
  int dimension = 1;
  std::vector<Vec> nodes;
  /// Surface-measure quadrature weights (counting measure in 1D).
  Vec weights;
  /// (2 pi)^{1-n} |S^(xi)|^2 at the nodes.
  Vec density;

  /// Weights of the delta measure of the shell, dsigma / |xi|.
  [[nodiscard]] Vec leray_weights() const { return weights / radius; }
  [[nodiscard]] double total_mass() const { return weights.dot(density); }
};

SphereDensity sphere_density(const SourceProfile& profile, const PotentialSpec& pot,
                             const EnergySpec& espec, const Vec& base, int n_nodes);

}  // namespace semiwave
