#include "semiwave/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semiwave/parallel.hpp"

namespace semiwave {

namespace {

DormandPrince::Rhs hamilton_rhs(const PotentialSpec& pot, bool with_action) {
  const int n = pot.dimension();
  return [&pot, n, with_action](double, const Vec& y, Vec& dy) {
    dy.head(n) = y.segment(n, n);
    const Vec g = pot.gradient(y.head(n));
    if (!g.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite potential gradient at x = " << y.head(n).transpose();
      throw DomainError(msg.str());
    }
    dy.segment(n, n) = -g;
    if (with_action) dy(2 * n) = y.segment(n, n).squaredNorm();
  };
}

PhasePointd split(const Vec& y, int n) { return {y.head(n), y.segment(n, n)}; }

enum class RayFate { escaped, stayed, failed };

/// Integrates until the ray is outgoing beyond R for two consecutive accepted steps.
RayFate escape_fate(const PotentialSpec& pot, const PhasePointd& start, double R, double T_max,
                    double tol) {
  const int n = pot.dimension();
  Vec y0(2 * n);
  y0 << start.x, start.xi;
  OdeOptions opts;
  opts.rtol = tol;
  opts.atol = tol;
  try {
    DormandPrince dp(hamilton_rhs(pot, false), 0.0, y0, opts);
    int outgoing = 0;
    while (dp.t() < T_max) {
      dp.step(T_max);
      const auto x = dp.y().head(n);
      const auto xi = dp.y().segment(n, n);
      outgoing = (x.norm() > R && x.dot(xi) > 0.0) ? outgoing + 1 : 0;
      if (outgoing >= 2) return RayFate::escaped;
    }
    return RayFate::stayed;
  } catch (const DormandPrince::StepUnderflow&) {
    return RayFate::failed;
  } catch (const DomainError&) {
    return RayFate::failed;
  }
}

}  // namespace

PhasePointd Trajectory::at(double t) const {
  const int n = static_cast<int>(points.front().dim());
  if (dense.empty()) return points.front();
  return split(dense(t), n);
}

Trajectory flow(const PotentialSpec& pot, const PhasePointd& start, double t_end,
                const FlowOptions& options) {
  if (!(options.tol > 0.0)) throw PreconditionError("flow: tol must be positive");
  if (!(t_end > 0.0)) throw PreconditionError("flow: t_end must be positive");
  const int n = pot.dimension();
  if (start.dim() != n) throw PreconditionError("flow: start point has the wrong dimension");
  if (!start.finite()) throw DomainError("flow: non-finite start point");
  if (!std::isfinite(pot.value(start.x))) throw DomainError("flow: non-finite potential at start");

  Vec y0(2 * n + 1);
  y0 << start.x, start.xi, 0.0;
  OdeOptions opts;
  opts.rtol = options.tol;
  opts.atol = options.tol;
  opts.max_step = options.max_step;

  Trajectory traj;
  const double p0 = pot.symbol(start.x, start.xi);
  auto record = [&](double t, const Vec& y) {
    traj.times.push_back(t);
    traj.points.push_back(split(y, n));
    traj.action.push_back(y(2 * n));
    traj.energy_drift =
        std::max(traj.energy_drift, std::abs(pot.symbol(y.head(n), y.segment(n, n)) - p0));
  };
  record(0.0, y0);

  DormandPrince dp(hamilton_rhs(pot, true), 0.0, y0, opts);
  long next_index = 1;
  while (dp.t() < t_end) {
    try {
      dp.step(t_end);
    } catch (const DormandPrince::StepUnderflow& e) {
      throw IntegrationFailure(std::string("flow: ") + e.what(), traj);
    }
    const DenseSegment& seg = dp.segment();
    traj.dense.append(seg);

    if (n == 1) {
      const double a = dp.y_prev()(1), b = dp.y()(1);
      if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) {
        const double tt = find_root([&](double s) { return seg(s)(1); }, seg.t0, seg.t1());
        traj.turning_times.push_back(tt);
        ++traj.turning_count;
        const double xt = seg(tt)(0);
        const double force = std::abs(pot.derivative(xt));
        if (force <= 1e-8 * (1.0 + std::abs(pot.value(xt)))) traj.degenerate_turning = true;
      }
    }

    std::optional<double> event;
    if (options.stop_event) event = options.stop_event(seg);
    const double t_last = event ? std::clamp(*event, seg.t0, seg.t1()) : dp.t();
    if (options.sample_dt > 0.0) {
      while (next_index * options.sample_dt <= t_last) {
        const double ts = next_index * options.sample_dt;
        record(ts, seg(ts));
        ++next_index;
      }
      const bool last = event.has_value() || dp.t() >= t_end;
      if (last && traj.times.back() < t_last) record(t_last, seg(t_last));
    } else {
      record(t_last, event ? seg(t_last) : dp.y());
    }
    if (event) {
      // Turning points after the event time do not belong to this trajectory.
      while (!traj.turning_times.empty() && traj.turning_times.back() > t_last) {
        traj.turning_times.pop_back();
        --traj.turning_count;
      }
      break;
    }
  }
  return traj;
}

double action_integral(const Trajectory& traj) {
  if (traj.empty()) throw PreconditionError("action_integral: empty trajectory");
  return traj.action.back();
}

int maslov_count_1d(const Trajectory& traj) {
  if (traj.empty()) throw PreconditionError("maslov_count_1d: empty trajectory");
  if (traj.points.front().dim() != 1) throw PreconditionError("maslov_count_1d: 1D only");
  if (traj.degenerate_turning) {
    throw DegenerateTurningError("tangential zero of xi (xi = 0 and V' = 0) along the trajectory");
  }
  return traj.turning_count;
}

std::string to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::H2:
      return "H2";
    case Hypothesis::H5:
      return "H5";
    case Hypothesis::H8:
      return "H8";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::fails:
      return "fails";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string to_string(SingletonConvention c) {
  return c == SingletonConvention::counting ? "counting" : "null-singletons";
}

SingletonConvention parse_singleton_convention(const std::string& name) {
  if (name == "counting") return SingletonConvention::counting;
  if (name == "null-singletons") return SingletonConvention::null_singletons;
  throw ConfigError("unknown singleton convention '" + name + "'");
}

double default_escape_radius(const PotentialSpec& pot) {
  if (!pot.decaying()) return 10.0;
  return std::max(1.0, pot.scale_radius());
}

HypothesisReport check_nontrapping(const PotentialSpec& pot, const EnergySpec& espec,
                                   double escape_radius, double T_max, int n_dirs, int n_radii,
                                   double tol) {
  if (n_dirs < 2 || n_radii < 1) throw PreconditionError("check_nontrapping: too few samples");
  const int n = pot.dimension();
  if (n > 2) throw PreconditionError("check_nontrapping: n <= 2 supported");
  const double R = escape_radius > 0.0 ? escape_radius : default_escape_radius(pot);
  const double T = T_max > 0.0 ? T_max : 10.0 * R / std::sqrt(2.0 * espec.E0);

  std::vector<PhasePointd> samples;
  auto add = [&](const Vec& x, const Vec& dir) {
    const double gap = espec.E0 - pot.value(x);
    if (gap > 0.0) samples.emplace_back(x, std::sqrt(2.0 * gap) * dir);
  };
  for (int i = 0; i < n_radii; ++i) {
    const double r = R * i / n_radii;
    if (n == 1) {
      for (double s : {1.0, -1.0}) {
        if (i == 0 && s < 0.0) continue;
        for (double d : {1.0, -1.0}) add(vec1(s * r), vec1(d));
      }
    } else {
      const int n_pos = i == 0 ? 1 : n_dirs;
      for (int j = 0; j < n_pos; ++j) {
        const double a = kTwoPi * j / n_dirs;
        for (int k = 0; k < n_dirs; ++k) {
          const double b = kTwoPi * (k + 0.5) / n_dirs;
          add(vec2(r * std::cos(a), r * std::sin(a)), vec2(std::cos(b), std::sin(b)));
        }
      }
    }
  }

  const auto fates = parallel_map(samples.size(), [&](std::size_t i) {
    const RayFate fwd = escape_fate(pot, samples[i], R, T, tol);
    const RayFate bwd = escape_fate(pot, samples[i].reversed(), R, T, tol);
    if (fwd == RayFate::stayed || bwd == RayFate::stayed) return RayFate::stayed;
    if (fwd == RayFate::failed || bwd == RayFate::failed) return RayFate::failed;
    return RayFate::escaped;
  });

  HypothesisReport report;
  report.id = Hypothesis::H2;
  report.samples = static_cast<int>(samples.size());
  report.T_max = T;
  report.escape_radius = R;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (fates[i] == RayFate::stayed) report.witnesses.push_back(samples[i]);
    if (fates[i] == RayFate::failed) ++report.failed_integrations;
  }
  if (!report.witnesses.empty()) {
    report.verdict = Verdict::fails;
  } else if (report.failed_integrations > 0) {
    report.verdict = Verdict::inconclusive;
    report.notes.push_back(std::to_string(report.failed_integrations) +
                           " integrations failed; treated as inconclusive");
  } else {
    report.verdict = Verdict::holds;
  }
  if (samples.empty()) {
    report.verdict = Verdict::inconclusive;
    report.notes.push_back("no classically allowed samples inside the escape radius");
  }
  report.measure_estimate =
      samples.empty() ? 0.0 : static_cast<double>(report.witnesses.size()) / samples.size();
  report.counting_measure = static_cast<double>(report.witnesses.size());
  return report;
}

HypothesisReport return_set_measure(const PotentialSpec& pot, const EnergySpec& espec,
                                    const Vec& base, const Vec& target, double T_max, int n_dirs,
                                    double hit_tol, const ReturnSetOptions& options) {
  const int n = pot.dimension();
  if (base.size() != n || target.size() != n) {
    throw PreconditionError("return_set_measure: base/target dimension mismatch");
  }
  if (n > 2) throw PreconditionError("return_set_measure: n <= 2 supported");
  if (n_dirs < 2) throw PreconditionError("return_set_measure: n_dirs must be >= 2");
  const double radius = shell_radius(pot, espec.E0, base);

  double R = options.escape_radius > 0.0 ? options.escape_radius : default_escape_radius(pot);
  R = std::max(R, 1.25 * std::max(base.norm(), target.norm()) + 1e-3);
  const double T = T_max > 0.0 ? T_max : 10.0 * R / std::sqrt(2.0 * espec.E0);
  const double tol_hit = hit_tol > 0.0 ? hit_tol : 1e-4 * R;
  const double arm_radius = 1e-2 * R;

  std::vector<Vec> dirs;
  if (n == 1) {
    dirs = {vec1(radius), vec1(-radius)};
  } else {
    for (int k = 0; k < n_dirs; ++k) {
      const double a = kTwoPi * k / n_dirs;
      dirs.push_back(radius * vec2(std::cos(a), std::sin(a)));
    }
  }

  enum Fate : int { miss = 0, hit = 1, failed = 2 };
  const auto fates = parallel_map(dirs.size(), [&](std::size_t i) -> int {
    Vec y0(2 * n);
    y0 << base, dirs[i];
    OdeOptions opts;
    opts.rtol = options.tol;
    opts.atol = options.tol;
    try {
      DormandPrince dp(hamilton_rhs(pot, false), 0.0, y0, opts);
      bool armed = (base - target).norm() > arm_radius;
      int outgoing = 0;
      while (dp.t() < T) {
        dp.step(T);
        const DenseSegment& seg = dp.segment();
        const Vec x = dp.y().head(n);
        if (armed) {
          const auto closing = [&](double s) {
            const Vec z = seg(s);
            return (z.head(n) - target).dot(z.segment(n, n));
          };
          double best = std::min((dp.y_prev().head(n) - target).norm(), (x - target).norm());
          const double g0 = closing(seg.t0), g1 = closing(seg.t1());
          if (g0 < 0.0 && g1 >= 0.0) {
            const double ts = find_root(closing, seg.t0, seg.t1());
            best = std::min(best, (seg(ts).head(n) - target).norm());
          }
          if (best <= tol_hit) return hit;
        } else if ((x - target).norm() > arm_radius) {
          armed = true;
        }
        outgoing = (x.norm() > R && x.dot(dp.y().segment(n, n)) > 0.0) ? outgoing + 1 : 0;
        if (outgoing >= 2) return miss;
      }
      return miss;
    } catch (const DormandPrince::StepUnderflow&) {
      return failed;
    } catch (const DomainError&) {
      return failed;
    }
  });

  HypothesisReport report;
  report.id = (base - target).norm() == 0.0 ? Hypothesis::H5 : Hypothesis::H8;
  report.samples = static_cast<int>(dirs.size());
  report.T_max = T;
  report.escape_radius = R;
  report.hit_tol = tol_hit;
  report.convention = options.convention;
  std::vector<int> hit_index;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (fates[i] == hit) {
      report.witnesses.emplace_back(base, dirs[i]);
      hit_index.push_back(static_cast<int>(i));
    }
    if (fates[i] == failed) ++report.failed_integrations;
  }
  const auto hits = static_cast<double>(hit_index.size());
  report.counting_measure = hits;
  report.null_singletons_measure = 0.0;

  if (n == 1) {
    if (options.convention == SingletonConvention::counting) {
      report.measure_estimate = hits;
      report.verdict = hits > 0 ? Verdict::fails : Verdict::holds;
    } else {
      report.measure_estimate = 0.0;
      report.verdict = Verdict::holds;
      if (hits > 0) report.notes.push_back("returning directions form a null set of singletons");
    }
  } else {
    report.measure_estimate = hits / dirs.size() * kTwoPi * radius;
    bool adjacent = false;
    const int m = static_cast<int>(dirs.size());
    for (int i : hit_index) {
      if (fates[(i + 1) % m] == hit) adjacent = true;
    }
    if (adjacent) {
      report.verdict = Verdict::fails;
    } else if (hits > 0) {
      report.verdict = Verdict::inconclusive;
      report.notes.push_back("isolated returning directions only; refine n_dirs");
    } else {
      report.verdict = Verdict::holds;
    }
  }
  if (report.failed_integrations > 0 && report.verdict == Verdict::holds) {
    report.verdict = Verdict::inconclusive;
    report.notes.push_back(std::to_string(report.failed_integrations) + " integrations failed");
  }
  return report;
}

}  // namespace semiwave
