#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semiwave/errors.hpp"
#include "semiwave/ode.hpp"
#include "semiwave/potential.hpp"
#include "semiwave/types.hpp"

namespace semiwave {

/// Sampled integral curve of x' = xi, xi' = -grad V.
struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePointd> points;
  /// Accumulated int xi . dx up to each sample.
  std::vector<double> action;
  /// 1D only: sign changes of xi, with refined crossing times.
  int turning_count = 0;
  std::vector<double> turning_times;
  bool degenerate_turning = false;
  /// max_k |p(points[k]) - p(points[0])|.
  double energy_drift = 0.0;
  /// Continuous state (x, xi, action) over [times.front(), times.back()].
  DenseSolution dense;

  [[nodiscard]] bool empty() const { return times.empty(); }
  [[nodiscard]] const PhasePointd& end() const { return points.back(); }
  [[nodiscard]] PhasePointd at(double t) const;
};

/// Step-size underflow or exhausted step budget; carries what was integrated so far.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

struct FlowOptions {
  double tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  /// Record every accepted step (default) or only the uniform grid below.
  double sample_dt = 0.0;
  /// Optional terminal event: given the last accepted step, return the event time
  /// inside it to stop there.
  std::function<std::optional<double>(const DenseSegment&)> stop_event;
};

Trajectory flow(const PotentialSpec& pot, const PhasePointd& start, double t_end,
                const FlowOptions& options = {});

/// Same, with the common (tolerance only) call shape.
inline Trajectory flow(const PotentialSpec& pot, const PhasePointd& start, double t_end,
                       double tol) {
  FlowOptions options;
  options.tol = tol;
  return flow(pot, start, t_end, options);
}

/// Final accumulated action int xi . dx of the trajectory.
double action_integral(const Trajectory& traj);

/// Number of simple turning points (zeros of xi) along a 1D trajectory.
int maslov_count_1d(const Trajectory& traj);

enum class Hypothesis { H2, H5, H8 };
enum class Verdict { holds, fails, inconclusive };
/// How a set of returning directions is measured in one dimension, where the
/// sphere is the two points {+xi0, -xi0}.
enum class SingletonConvention { counting, null_singletons };

std::string to_string(Hypothesis h);
std::string to_string(Verdict v);
std::string to_string(SingletonConvention c);
SingletonConvention parse_singleton_convention(const std::string& name);

struct HypothesisReport {
  Hypothesis id = Hypothesis::H2;
  Verdict verdict = Verdict::inconclusive;
  double measure_estimate = 0.0;
  /// Phase points (initial x, initial xi) that violate the hypothesis.
  std::vector<PhasePointd> witnesses;
  /// 1D: measure of the witness set under each convention.
  double counting_measure = 0.0;
  double null_singletons_measure = 0.0;
  SingletonConvention convention = SingletonConvention::counting;

  int samples = 0;
  int failed_integrations = 0;
  double T_max = 0.0;
  double escape_radius = 0.0;
  double hit_tol = 0.0;
  std::vector<std::string> notes;
};

/// Escape radius used when none is given: past the potential's support.
double default_escape_radius(const PotentialSpec& pot);

/// Samples p^{-1}(E0) within |x| <= R (n_radii radii, n_dirs position and momentum
/// angles) and integrates each sample forward and backward. A ray escapes when
/// |x| > R with x . xi > 0 on two consecutive accepted steps. R <= 0 or
/// T_max <= 0 select defaults.
HypothesisReport check_nontrapping(const PotentialSpec& pot, const EnergySpec& espec,
                                   double escape_radius = 0.0, double T_max = 0.0,
                                   int n_dirs = 16, int n_radii = 8, double tol = 1e-10);

struct ReturnSetOptions {
  double escape_radius = 0.0;  // <= 0: default_escape_radius, enlarged to contain base and target
  SingletonConvention convention = SingletonConvention::counting;
  double tol = 1e-11;
};

/// Directions xi on the sphere over base whose ray passes within hit_tol of target
/// at some t in (0, T_max]. target == base tests the return set, target != base the
/// two-source crossing set. T_max <= 0 or hit_tol <= 0 select defaults.
HypothesisReport return_set_measure(const PotentialSpec& pot, const EnergySpec& espec,
                                    const Vec& base, const Vec& target, double T_max = 0.0,
                                    int n_dirs = 64, double hit_tol = 0.0,
                                    const ReturnSetOptions& options = {});

}  // namespace semiwave
