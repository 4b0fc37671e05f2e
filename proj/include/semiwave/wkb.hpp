#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semiwave/helmholtz1d.hpp"
#include "semiwave/ode.hpp"
#include "semiwave/potential.hpp"
#include "semiwave/source.hpp"

namespace semiwave {

/// One ray of the outgoing Lagrangian manifold launched from the source sphere.
/// The dense state is (x, xi, psi) in 1D and (x, xi, psi, dx, dxi) in 2D, where
/// (dx, dxi) is the tangent flow along the launch angle.
struct ChartRay {
  Vec xi0;
  double theta = 0.0;
  DenseSolution state;
  double t_end = 0.0;
  /// Caustic times (1D: turning points) in increasing order.
  std::vector<double> caustics;
};

struct ChartSample {
  double t = 0.0;
  Vec x;
  Vec xi;
  double psi = 0.0;
  /// Jacobian of (t, xi) -> x against dt x (dsigma / |xi|).
  double jacobian = 0.0;
  /// Caustics crossed before t.
  int maslov = 0;
};

struct LagrangianChart {
  int dimension = 1;
  Vec base;
  double radius = 0.0;
  double E0 = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  /// Continue through caustics (1D turning points) instead of truncating.
  bool through_caustics = false;
  std::vector<ChartRay> rays;
  std::vector<std::string> warnings;
  std::shared_ptr<const PotentialSpec> potential;

  /// State on ray i at time t; throws CausticError past a truncation.
  [[nodiscard]] ChartSample sample(std::size_t i, double t) const;
  /// Largest usable time on ray i.
  [[nodiscard]] double valid_until(std::size_t i) const;
};

struct ChartOptions {
  double tol = 1e-12;
  bool through_caustics = false;
};

/// Integrates rays from (base, xi), |xi| = sqrt(2 (E0 - V(base))), over [0, t_hi].
/// In 1D the two rays are +xi0 and -xi0; in 2D n_dirs equally spaced angles.
/// Without through_caustics each ray is cut at its first caustic (with a warning).
LagrangianChart build_chart(const PotentialSpec& pot, const EnergySpec& espec, const Vec& base,
                            double t_lo, double t_hi, int n_dirs = 2,
                            const ChartOptions& options = {});

/// One ray at an arbitrary launch angle (2D) or direction sign (1D, theta = 0 or pi).
ChartRay chart_ray(const PotentialSpec& pot, double E0, const Vec& base, double theta, double t_lo,
                   double t_hi, const ChartOptions& options = {});

/// b0 = i (2 pi)^{(1-n)/2} e^{i pi (1-n)/4} S^(xi0) e^{i E1 t} J^{-1/2} e^{-i nu pi / 2}.
Complex principal_amplitude(const LagrangianChart& chart, const SourceProfile& profile,
                            const EnergySpec& espec, std::size_t ray, double t);

/// |b0|^2 J e^{2 Im E1 t} / ((2 pi)^{1-n} |S^(xi0)|^2); equal to 1 along the chart.
double density_ratio(const LagrangianChart& chart, const SourceProfile& profile,
                     const EnergySpec& espec, std::size_t ray, double t);

/// Real part of the integrated transport equation, log a(t) - log a(t_lo) with
/// d log a / dt = -tr(d xi / d x) / 2, against the closed form log sqrt(J(t_lo) / J(t)).
/// Returns the difference of the two.
double transport_defect(const LagrangianChart& chart, std::size_t ray, double t);

/// Branch of a 1D chart: ray index and the time interval between caustics.
struct WkbBranch {
  std::size_t ray = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  int maslov = 0;
};

struct WkbField {
  double h = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  Vec x;
  CVec values;
  std::vector<WkbBranch> branches;
  /// Number of branches contributing at each point.
  std::vector<int> multiplicity;
};

/// Sum over 1D branches of h^{-1/2} b0 e^{i psi / h} at the given points. Throws
/// CausticError when a point sits within caustic_margin of a turning point.
WkbField wkb_field(const LagrangianChart& chart, const SourceProfile& profile,
                   const EnergySpec& espec, double h, const Vec& points,
                   double caustic_margin = 1e-3);

/// Relative L2 difference between a WKB field and the solver field at the same
/// grid points.
double relative_error(const WkbField& wkb, const WaveField& field);

/// Points of a solver grid inside [a, b].
Vec grid_points_in(const Grid1D& grid, double a, double b);

struct Located {
  double t = 0.0;
  double theta = 0.0;
  ChartSample sample;
  int iterations = 0;
};

/// Newton solve for the chart parameters (t, theta) with x(t, theta) = x in 2D.
Located locate_2d(const PotentialSpec& pot, double E0, const Vec& base, const Vec& x,
                  double t_guess, double theta_guess, double tol = 1e-12);

/// WKB value h^{-1/2} b0 e^{i psi / h} at a located 2D point.
Complex wkb_value_2d(const Located& p, const SourceProfile& profile, const EnergySpec& espec,
                     double radius, double h);

}  // namespace semiwave
