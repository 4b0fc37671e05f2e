#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semiwave/hamiltonian.hpp"
#include "semiwave/helmholtz1d.hpp"
#include "semiwave/observable.hpp"
#include "semiwave/potential.hpp"
#include "semiwave/source.hpp"

namespace semiwave {

/// Field left of the source as the sum of the direct leftgoing wave and the wave
/// that went right, turned back at the barrier and crossed the source again.
/// In x < 0 the two branches share the momentum -|xi(x)| and differ in phase by A / h + theta.
struct TwoBranchModel {
  PotentialSpec potential;
  EnergySpec espec;
  SourceProfile profile;
  double xi0 = 0.0;
  double turning_point = 0.0;
  /// Loop action int xi^2 dt over 0 -> turning point -> 0.
  double action = 0.0;
  double loop_time = 0.0;
  int maslov = 0;
  /// arg(b_reflected / b_direct) from the Maslov and source factors.
  double theta_predicted = 0.0;
  /// Replaced by calibrate_phase.
  double theta = 0.0;
  /// |reflection coefficient|, 1 for a simple turning point.
  double reflection = 1.0;
  double overlap_lo = -6.0;
  double overlap_hi = 0.0;
  Trajectory loop;

  /// Leftgoing momentum at x in the overlap.
  [[nodiscard]] double momentum(double x) const;
  /// |b| of the direct and reflected branches at x < 0.
  [[nodiscard]] double direct_amplitude(double x) const;
  [[nodiscard]] double reflected_amplitude(double x) const;
};

/// Requires E0 < max V to the right of the source (the rightgoing ray must come back).
TwoBranchModel build_model(const PotentialSpec& pot, const EnergySpec& espec,
                           const SourceProfile& profile, double overlap_lo = -6.0);

struct PairingParts {
  /// int q (|a-|^2 + |a+|^2) dx
  double mean = 0.0;
  /// int q |a-| |a+| dx
  double cross = 0.0;
};

/// Splits the limit pairing into its mean and cross parts; q must live in the overlap
/// with leftgoing momentum only.
PairingParts pairing_parts(const TwoBranchModel& model, const Observable& q);

/// mean + 2 cross cos(theta + A / h).
double predicted_pairing(const TwoBranchModel& model, const Observable& q, double h);

/// Phase offset that reproduces one measured pairing value, taking the root of
/// cos(theta + A / h) = (value - mean) / (2 cross) nearest theta_predicted.
double calibrate_phase(const TwoBranchModel& model, const Observable& q, double h, double value);

/// h_k = A / (arccos(nu) - theta + 2 pi k), decreasing, for the K smallest k with h_k <= h_max.
std::vector<double> subsequence_limits(const TwoBranchModel& model, double nu, int K,
                                       double h_max);

struct OscillationFit {
  std::vector<double> h;
  std::vector<double> values;
  std::vector<double> predictions;
  double mean = 0.0;
  double amplitude = 0.0;
  /// Angular frequency in the variable 1/h.
  double omega = 0.0;
  double phase = 0.0;
  /// RMS misfit.
  double residual = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::string note;
};

/// Least-squares fit of A + B cos(omega / h + phase), scanning omega up to the
/// sampling limit of the 1/h grid, then refining the best minimum.
OscillationFit fit_oscillation(const std::vector<double>& h, const std::vector<double>& values,
                               double residual_limit = 0.05);

struct ScanOptions {
  GridOptions grid;
  WignerOptions wigner;
};

/// Solver pairings h <Op_h(q) u_h, u_h> over the h list, in parallel.
std::vector<double> pairing_scan(const Observable& q, const PotentialSpec& pot,
                                 const EnergySpec& espec, const SourceProfile& profile,
                                 const std::vector<double>& h_list, const ScanOptions& options = {});

/// pairing_scan + fit_oscillation, with the model's predictions attached.
OscillationFit measure_oscillation(const TwoBranchModel& model, const Observable& q,
                                   const std::vector<double>& h_list,
                                   const ScanOptions& options = {});

}  // namespace semiwave
