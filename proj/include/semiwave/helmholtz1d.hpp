#pragma once

#include <string>
#include <vector>

#include "semiwave/hamiltonian.hpp"
#include "semiwave/observable.hpp"
#include "semiwave/potential.hpp"
#include "semiwave/raymeasure.hpp"
#include "semiwave/source.hpp"

namespace semiwave {

/// Uniform grid on [x_min, x_max] whose outer layer_width on each side carries the
/// absorbing potential gamma(x) = gamma_max * s^power, s the depth into the layer.
struct Grid1D {
  double x_min = -9.0;
  double x_max = 9.0;
  long N = 0;
  double dx = 0.0;
  double layer_width = 3.0;
  double gamma_max = 1.0;
  int layer_power = 3;

  [[nodiscard]] double x(long i) const { return x_min + static_cast<double>(i) * dx; }
  [[nodiscard]] Vec points() const;
  [[nodiscard]] double interior_lo() const { return x_min + layer_width; }
  [[nodiscard]] double interior_hi() const { return x_max - layer_width; }
  [[nodiscard]] bool in_interior(double x) const { return x >= interior_lo() && x <= interior_hi(); }
  [[nodiscard]] double gamma(double x) const;
};

struct GridOptions {
  /// Interior is [-half_width, half_width]; the layers sit outside it.
  double half_width = 6.0;
  double layer_width = 3.0;
  double gamma_max = 1.0;
  /// Grid points per radian of the fastest oscillation: dx <= h / (ppw * max |xi|).
  double points_per_wavelength = 40.0;
};

/// Picks dx from the largest classical momentum on the interior and the source scale.
Grid1D make_grid(const PotentialSpec& pot, const EnergySpec& espec, const SourceProfile& profile,
                 double h, const GridOptions& options = {});

/// Discrete solution of (-h^2/2 d^2 + V - E - i gamma) u = S_h.
struct WaveField {
  Grid1D grid;
  double h = 0.0;
  Complex energy;
  CVec values;
  double residual_norm = 0.0;
  double source_norm = 0.0;
  long unknowns = 0;
  std::string solver;

  [[nodiscard]] double relative_residual() const {
    return source_norm > 0.0 ? residual_norm / source_norm : residual_norm;
  }
};

WaveField solve(const PotentialSpec& pot, const EnergySpec& espec, const SourceProfile& profile,
                double h, const Grid1D& grid);

/// h * int_{|x| < eps} |u|^2 dx.
double near_origin_mass(const WaveField& field, double eps);

/// Least-squares slope of log near_origin_mass against log eps.
double near_origin_slope(const WaveField& field, const std::vector<double>& eps);

/// Relative L2 difference of two fields over [a, b] (the second interpolated linearly
/// onto the first grid when the grids differ).
double relative_l2_difference(const WaveField& u, const CVec& reference, double a, double b);

struct WignerOptions {
  /// The lag window spans |y| <= lag_factor * h / xi_scale(q).
  double lag_factor = 320.0;
  /// Upper bound on the FFT length.
  long max_lags = 1L << 20;
};

struct WignerPairing {
  double value = 0.0;
  double imag = 0.0;
  long lags = 0;
  /// |xi| < band is free of aliasing.
  double band = 0.0;
  bool separable_path = false;
};

/// h <Op_h(q) u, u> through the discrete Wigner transform
/// W(x, xi) = (2 pi h)^{-1} int e^{-i y xi / h} u(x + y/2) conj(u(x - y/2)) dy.
WignerPairing wigner_pair(const Observable& q, const WaveField& field,
                          const WignerOptions& options = {});
/// Same quadratic form for an arbitrary sampled function on a grid.
WignerPairing wigner_pair(const Observable& q, const Grid1D& grid, const CVec& u, double h,
                          const WignerOptions& options = {});

struct ConvergenceRow {
  double h = 0.0;
  double value = 0.0;
  double imag = 0.0;
  double ray_prediction = 0.0;
  double abs_error = 0.0;
  double relative_residual = 0.0;
  std::string status = "ok";
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double ray_prediction = 0.0;
  double ray_error = 0.0;
  double extrapolated = 0.0;
  double observed_order = 0.0;
  bool monotone = true;
  bool oscillatory = false;
  std::vector<std::string> notes;
};

struct ConvergenceOptions {
  GridOptions grid;
  WignerOptions wigner;
  RayQuadrature rays;
  SingletonConvention convention = SingletonConvention::counting;
  bool check_return_set = true;
};

/// Solves at each h (in parallel) and compares with the ray pairing at the origin.
/// Refuses potentials whose return set fails the H5 check.
ConvergenceTable convergence_study(const Observable& q, const PotentialSpec& pot,
                                   const EnergySpec& espec, const SourceProfile& profile,
                                   const std::vector<double>& h_list,
                                   const ConvergenceOptions& options = {});

struct Mu1Check {
  double value = 0.0;
  double prediction = 0.0;
  double relative_error = 0.0;
};

/// <Op_h(q (p - E0)^2) u_h, u_h> (no leading h), against mu1_pair.
Mu1Check mu1_check(const Observable& q, const WaveField& field, const EnergySpec& espec,
                   const PotentialSpec& pot, const SourceProfile& profile,
                   const WignerOptions& options = {});

}  // namespace semiwave
