#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "semiwave/types.hpp"

namespace semiwave {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 selects a step from the local derivative scale
  double max_step = std::numeric_limits<double>::infinity();
  /// Steps shorter than min_step_ratio * max(1, |t|) count as underflow.
  double min_step_ratio = 1e-14;
  std::size_t max_steps = 50'000'000;
};

/// Continuous extension of one accepted Dormand-Prince step.
struct DenseSegment {
  double t0 = 0.0;
  double step = 0.0;
  std::array<Vec, 5> coeffs;

  [[nodiscard]] double t1() const { return t0 + step; }
  [[nodiscard]] Vec operator()(double t) const;
};

/// Piecewise dense output over a whole integration; evaluation by bisection on segments.
class DenseSolution {
 public:
  void append(DenseSegment segment) { segments_.push_back(std::move(segment)); }
  [[nodiscard]] bool empty() const { return segments_.empty(); }
  [[nodiscard]] double t_begin() const { return segments_.front().t0; }
  [[nodiscard]] double t_end() const { return segments_.back().t1(); }
  [[nodiscard]] const std::vector<DenseSegment>& segments() const { return segments_; }

  /// Interpolated state; t is clamped into [t_begin, t_end].
  [[nodiscard]] Vec operator()(double t) const;

 private:
  std::vector<DenseSegment> segments_;
};

/// Embedded Runge-Kutta 5(4) of Dormand and Prince with FSAL and a 4th-order
/// continuous extension. Integrates forward in time only.
class DormandPrince {
 public:
  using Rhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

  DormandPrince(Rhs rhs, double t0, Vec y0, OdeOptions options = {});

  /// Takes one accepted step, never beyond t_stop. Throws StepUnderflow when
  /// the controller cannot meet the tolerance.
  void step(double t_stop = std::numeric_limits<double>::infinity());

  [[nodiscard]] double t() const { return t_; }
  [[nodiscard]] double t_prev() const { return t_prev_; }
  [[nodiscard]] const Vec& y() const { return y_; }
  [[nodiscard]] const Vec& y_prev() const { return y_prev_; }
  [[nodiscard]] const Vec& dydt() const { return k_[0]; }
  [[nodiscard]] std::size_t accepted_steps() const { return accepted_; }
  [[nodiscard]] std::size_t rejected_steps() const { return rejected_; }
  [[nodiscard]] double last_step() const { return t_ - t_prev_; }

  /// Dense output of the last accepted step, valid on [t_prev, t].
  [[nodiscard]] const DenseSegment& segment() const { return segment_; }
  [[nodiscard]] Vec dense(double t) const { return segment_(t); }

  void set_max_step(double max_step) { options_.max_step = max_step; }

  struct StepUnderflow : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

 private:
  [[nodiscard]] double initial_step() const;

  Rhs rhs_;
  OdeOptions options_;
  double t_;
  double t_prev_;
  Vec y_;
  Vec y_prev_;
  double h_;
  std::array<Vec, 7> k_;
  Vec y_stage_;
  Vec y_new_;
  DenseSegment segment_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

/// Locates a sign change of g on [a, b] (g(a), g(b) of opposite sign or zero) by
/// Brent's method.
double find_root(const std::function<double(double)>& g, double a, double b,
                 double xtol = 1e-14);

}  // namespace semiwave
