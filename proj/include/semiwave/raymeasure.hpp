#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semiwave/hamiltonian.hpp"
#include "semiwave/observable.hpp"
#include "semiwave/potential.hpp"
#include "semiwave/source.hpp"

namespace semiwave {

struct RayQuadrature {
  double rtol = 1e-11;
  double atol = 1e-13;
  /// Rays stop once the damping factor exp(-2 Im E1 t) drops below this.
  double damping_cutoff = 1e-12;
  /// Sphere nodes in n = 2 (ignored in 1D).
  int n_dirs = 64;
  /// Hard time limit; 0 derives it from the damping cutoff.
  double T_max = 0.0;
  /// Step cap as a fraction of the observable box size over the launch speed.
  double step_fraction = 0.05;
};

struct DirectionContribution {
  Vec xi;
  /// Leray weight dsigma / |xi| times the source density.
  double weight = 0.0;
  double integral = 0.0;
  double t_cut = 0.0;
  double tail_bound = 0.0;
  bool escaped = false;
};

/// <q, mu> computed along damped rays.
struct MeasurePairing {
  double value = 0.0;
  double error_estimate = 0.0;
  double t_cut = 0.0;
  double tail_bound = 0.0;
  int nodes = 0;
  long steps = 0;
  std::vector<DirectionContribution> directions;
  /// False when the crossing hypothesis fails for a two-source pairing.
  bool unique = true;
  std::vector<std::string> warnings;
};

/// Time integral of f(rho(t)) exp(-2 Im E1 t) along the ray from start, truncated on
/// outgoing escape past stop_radius or when the damping factor is negligible.
struct RayIntegral {
  double value = 0.0;
  double t_cut = 0.0;
  double tail_bound = 0.0;
  long steps = 0;
  bool escaped = false;
};

using PhaseFunction = std::function<double(const Vec& x, const Vec& xi)>;

RayIntegral integrate_along_ray(const PotentialSpec& pot, const PhasePointd& start, double damping,
                                const PhaseFunction& f, double f_bound, const PhaseBox& box,
                                const RayQuadrature& quad);

/// <q, mu> = sum over the shell of int_0^inf q(exp(t H_p)(base, xi)) e^{-2 Im E1 t} dt
///           (2 pi)^{1-n} |S^(xi)|^2 dsigma(xi) / |xi|.
MeasurePairing pair(const Observable& q, const PotentialSpec& pot, const EnergySpec& espec,
                    const SourceProfile& profile, const Vec& base, const RayQuadrature& quad = {});

struct LiouvilleResidual {
  double residual = 0.0;
  /// <-H_p q + 2 Im E1 q, mu>
  double transport = 0.0;
  /// (2 pi)^{1-n} int q(base, xi) |S^(xi)|^2 over the shell
  double source = 0.0;
  double error_estimate = 0.0;
};

LiouvilleResidual liouville_residual(const Observable& q, const PotentialSpec& pot,
                                     const EnergySpec& espec, const SourceProfile& profile,
                                     const Vec& base, const RayQuadrature& quad = {});

/// (2 pi)^{-n} int q(base, xi) |S^(xi)|^2 dxi over all of R^n.
double mu1_pair(const Observable& q, const SourceProfile& profile, const Vec& base = {},
                double abs_tol = 1e-12);

struct TwoSourceOptions {
  int n_dirs = 64;
  double hit_tol = 0.0;
  double T_max = 0.0;
};

/// pair at x1 + pair at x2, after checking that no ray from one source reaches the
/// other. When that check fails the result is kept but flagged non-unique.
MeasurePairing two_source_pair(const Observable& q, const PotentialSpec& pot,
                               const EnergySpec& espec,
                               const std::array<SourceProfile, 2>& profiles,
                               const std::array<Vec, 2>& bases, const RayQuadrature& quad = {},
                               const TwoSourceOptions& check = {});

/// Phase-space region {|x| > radius, cos(x, xi) < cos_max}.
bool in_incoming_zone(const Vec& x, const Vec& xi, double radius, double cos_max = -0.5);

}  // namespace semiwave
