#include "semiwave/helmholtz1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/FFT>

#include "semiwave/errors.hpp"
#include "semiwave/parallel.hpp"

namespace semiwave {

namespace {

long next_pow2(long n) {
  long p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Largest classical momentum sqrt(2 (E0 - min V)) over [a, b].
double max_momentum(const PotentialSpec& pot, double E0, double a, double b) {
  double vmin = 0.0;
  constexpr int kSamples = 4001;
  for (int i = 0; i < kSamples; ++i) vmin = std::min(vmin, pot.value(a + (b - a) * i / (kSamples - 1)));
  return std::sqrt(2.0 * std::max(E0 - vmin, 1e-12));
}

/// Index range [first, last] of grid points inside [a, b].
std::pair<long, long> index_range(const Grid1D& grid, double a, double b) {
  const long first = std::max(0L, static_cast<long>(std::ceil((a - grid.x_min) / grid.dx - 1e-9)));
  const long last =
      std::min(grid.N - 1, static_cast<long>(std::floor((b - grid.x_min) / grid.dx + 1e-9)));
  return {first, last};
}

/// Splits [first, last] into contiguous chunks for a deterministic parallel reduction.
std::vector<std::pair<long, long>> chunks(long first, long last, long count) {
  std::vector<std::pair<long, long>> out;
  const long total = last - first + 1;
  if (total <= 0) return out;
  count = std::max(1L, std::min(count, total));
  for (long c = 0; c < count; ++c) {
    const long lo = first + total * c / count;
    const long hi = first + total * (c + 1) / count - 1;
    out.emplace_back(lo, hi);
  }
  return out;
}

}  // namespace

Vec Grid1D::points() const {
  Vec out(N);
  for (long i = 0; i < N; ++i) out(i) = x(i);
  return out;
}

double Grid1D::gamma(double xv) const {
  const double depth = std::max(interior_lo() - xv, xv - interior_hi());
  if (depth <= 0.0) return 0.0;
  return gamma_max * std::pow(std::min(1.0, depth / layer_width), layer_power);
}

Grid1D make_grid(const PotentialSpec& pot, const EnergySpec& espec, const SourceProfile& profile,
                 double h, const GridOptions& options) {
  if (pot.dimension() != 1) throw PreconditionError("make_grid: 1D potentials only");
  if (!(h > 0.0)) throw PreconditionError("make_grid: h must be positive");
  if (options.points_per_wavelength < 10.0) {
    throw ResolutionError("points_per_wavelength must be at least 10");
  }
  Grid1D g;
  g.layer_width = options.layer_width;
  g.gamma_max = options.gamma_max;
  g.x_min = -(options.half_width + options.layer_width);
  g.x_max = options.half_width + options.layer_width;
  const double xi_max = max_momentum(pot, espec.E0, g.x_min, g.x_max);
  double dx = h / (options.points_per_wavelength * xi_max);
  dx = std::min(dx, profile.width() * h / 8.0);
  long cells = static_cast<long>(std::ceil((g.x_max - g.x_min) / dx));
  if (cells % 2 != 0) ++cells;  // keeps x = 0 on the grid
  g.N = cells + 1;
  g.dx = (g.x_max - g.x_min) / static_cast<double>(cells);
  return g;
}

WaveField solve(const PotentialSpec& pot, const EnergySpec& espec, const SourceProfile& profile,
                double h, const Grid1D& grid) {
  using SpMat = Eigen::SparseMatrix<Complex>;
  if (pot.dimension() != 1 || profile.dimension() != 1) {
    throw PreconditionError("solve: the direct solver is one-dimensional");
  }
  if (grid.N < 5) throw ResolutionError("solve: grid too small");
  const double xi_max = max_momentum(pot, espec.E0, grid.x_min, grid.x_max);
  if (grid.dx > h / (10.0 * xi_max)) {
    throw ResolutionError("solve: grid does not resolve the wavelength h / xi_max (dx = " +
                          std::to_string(grid.dx) + ")");
  }
  const Vec xs = grid.points();
  for (long i = 0; i < grid.N; ++i) {
    if (!grid.in_interior(xs(i)) && std::abs(pot.value(xs(i))) >= 1e-6 * espec.E0) {
      throw DomainError("solve: potential is not negligible in the absorbing layer at x = " +
                        std::to_string(xs(i)));
    }
  }
  const CVec f = make_S_h(profile, h, xs);
  const Complex E = espec.energy(h);

  const double c = -0.5 * h * h / (grid.dx * grid.dx);
  const double w0 = -30.0 / 12.0, w1 = 16.0 / 12.0, w2 = -1.0 / 12.0;
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(5 * grid.N));
  for (long i = 0; i < grid.N; ++i) {
    const Complex diag = c * w0 + pot.value(xs(i)) - E - Complex(0.0, grid.gamma(xs(i)));
    triplets.emplace_back(i, i, diag);
    for (long k : {1L, 2L}) {
      const double w = c * (k == 1 ? w1 : w2);
      if (i - k >= 0) triplets.emplace_back(i, i - k, w);
      if (i + k < grid.N) triplets.emplace_back(i, i + k, w);
    }
  }
  SpMat A(grid.N, grid.N);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();

  Eigen::SparseLU<SpMat, Eigen::NaturalOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("solve: sparse LU factorization failed");
  WaveField field;
  field.values = lu.solve(f);
  if (lu.info() != Eigen::Success || !field.values.allFinite()) {
    throw SolverError("solve: back substitution failed");
  }
  field.grid = grid;
  field.h = h;
  field.energy = E;
  field.unknowns = grid.N;
  field.solver = "sparse-lu/fd4";

  const CVec r = A * field.values - f;
  double rn = 0.0, fn = 0.0;
  for (long i = 0; i < grid.N; ++i) {
    if (!grid.in_interior(xs(i))) continue;
    rn += std::norm(r(i));
    fn += std::norm(f(i));
  }
  field.residual_norm = std::sqrt(rn * grid.dx);
  field.source_norm = std::sqrt(fn * grid.dx);
  if (field.relative_residual() > 1e-8) {
    throw SolverError("solve: interior residual " + std::to_string(field.relative_residual()) +
                      " exceeds 1e-8");
  }
  return field;
}

double near_origin_mass(const WaveField& field, double eps) {
  double s = 0.0;
  const auto [first, last] = index_range(field.grid, -eps, eps);
  for (long i = first; i <= last; ++i) {
    // Trapezoid end weights only matter at O(dx).
    const double w = (field.grid.x(i) == -eps || field.grid.x(i) == eps) ? 0.5 : 1.0;
    s += w * std::norm(field.values(i));
  }
  return field.h * s * field.grid.dx;
}

double near_origin_slope(const WaveField& field, const std::vector<double>& eps) {
  if (eps.size() < 2) throw PreconditionError("near_origin_slope: need at least two radii");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double e : eps) {
    const double lx = std::log(e), ly = std::log(near_origin_mass(field, e));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(eps.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double relative_l2_difference(const WaveField& u, const CVec& reference, double a, double b) {
  if (reference.size() != u.values.size()) {
    throw PreconditionError("relative_l2_difference: size mismatch");
  }
  const auto [first, last] = index_range(u.grid, a, b);
  double num = 0.0, den = 0.0;
  for (long i = first; i <= last; ++i) {
    num += std::norm(u.values(i) - reference(i));
    den += std::norm(reference(i));
  }
  return std::sqrt(num / den);
}

WignerPairing wigner_pair(const Observable& q, const WaveField& field,
                          const WignerOptions& options) {
  const auto& box = q.box();
  if (box.x_lo(0) < field.grid.interior_lo() || box.x_hi(0) > field.grid.interior_hi()) {
    throw PreconditionError("wigner_pair: observable '" + q.id() +
                            "' reaches into the absorbing layer");
  }
  return wigner_pair(q, field.grid, field.values, field.h, options);
}

WignerPairing wigner_pair(const Observable& q, const Grid1D& grid, const CVec& u, double h,
                          const WignerOptions& options) {
  if (q.dim() != 1) throw PreconditionError("wigner_pair: 1D observables only");
  const auto& box = q.box();
  const double dx = grid.dx;
  WignerPairing out;
  out.band = kPi * h / (2.0 * dx);
  if (box.xi_lo(0) <= -out.band || box.xi_hi(0) >= out.band) {
    throw AliasingError("wigner_pair: momentum support [" + std::to_string(box.xi_lo(0)) + ", " +
                        std::to_string(box.xi_hi(0)) + "] exceeds the alias-free band |xi| < " +
                        std::to_string(out.band));
  }
  const double y_max = options.lag_factor * h / std::max(q.xi_scale(), 1e-12);
  long M = next_pow2(std::max(64L, static_cast<long>(std::ceil(y_max / dx))));
  M = std::min({M, options.max_lags, next_pow2(2 * grid.N)});
  out.lags = M;
  const long half = M / 2;
  const double dxi = kPi * h / (static_cast<double>(M) * dx);
  // h * dx * dxi * (2 dx) / (2 pi h)
  const double prefactor = dx * dxi * dx / kPi;
  const auto [first, last] = index_range(grid, box.x_lo(0), box.x_hi(0));
  const auto parts = chunks(first, last, 4L * thread_count());
  const auto xi_at = [&](long k) {  // FFT bin k -> momentum, k in [0, M)
    return dxi * static_cast<double>(k < half ? k : k - M);
  };

  Complex total = 0.0;
  if (q.is_separable()) {
    out.separable_path = true;
    Eigen::FFT<double> fft;
    for (const auto& term : q.terms()) {
      std::vector<Complex> chi(static_cast<std::size_t>(M)), X;
      for (long k = 0; k < M; ++k) {
        const double xi = xi_at(k);
        chi[static_cast<std::size_t>(k)] =
            (xi >= term.chi.lo && xi <= term.chi.hi) ? term.chi.f(xi) : 0.0;
      }
      fft.fwd(X, chi);
      const auto partial = parallel_map(parts.size(), [&](std::size_t p) {
        Complex acc = 0.0;
        for (long j = parts[p].first; j <= parts[p].second; ++j) {
          const double phi = term.phi.f(grid.x(j));
          if (phi == 0.0) continue;
          const long m_max = std::min({half - 1, j, grid.N - 1 - j});
          Complex s = u(j) * std::conj(u(j)) * X[0];
          for (long m = 1; m <= m_max; ++m) {
            s += u(j + m) * std::conj(u(j - m)) * X[static_cast<std::size_t>(m)] +
                 u(j - m) * std::conj(u(j + m)) * X[static_cast<std::size_t>(M - m)];
          }
          acc += phi * s;
        }
        return acc;
      });
      Complex term_sum = 0.0;
      for (const auto& v : partial) term_sum += v;
      total += term.coefficient * term_sum;
    }
  } else {
    long k_lo = static_cast<long>(std::ceil(box.xi_lo(0) / dxi));
    long k_hi = static_cast<long>(std::floor(box.xi_hi(0) / dxi));
    k_lo = std::max(k_lo, -half + 1);
    k_hi = std::min(k_hi, half - 1);
    const auto partial = parallel_map(parts.size(), [&](std::size_t p) {
      Eigen::FFT<double> fft;
      std::vector<Complex> c(static_cast<std::size_t>(M)), W;
      Complex acc = 0.0;
      for (long j = parts[p].first; j <= parts[p].second; ++j) {
        std::fill(c.begin(), c.end(), Complex(0.0));
        const long m_max = std::min({half - 1, j, grid.N - 1 - j});
        c[0] = u(j) * std::conj(u(j));
        for (long m = 1; m <= m_max; ++m) {
          c[static_cast<std::size_t>(m)] = u(j + m) * std::conj(u(j - m));
          c[static_cast<std::size_t>(M - m)] = u(j - m) * std::conj(u(j + m));
        }
        fft.fwd(W, c);
        const Vec x = vec1(grid.x(j));
        for (long k = k_lo; k <= k_hi; ++k) {
          const double qv = q(x, vec1(dxi * static_cast<double>(k)));
          if (qv != 0.0) acc += qv * W[static_cast<std::size_t>((k + M) % M)];
        }
      }
      return acc;
    });
    for (const auto& v : partial) total += v;
  }
  out.value = prefactor * total.real();
  out.imag = prefactor * total.imag();
  return out;
}

ConvergenceTable convergence_study(const Observable& q, const PotentialSpec& pot,
                                   const EnergySpec& espec, const SourceProfile& profile,
                                   const std::vector<double>& h_list,
                                   const ConvergenceOptions& options) {
  if (h_list.empty()) throw PreconditionError("convergence_study: empty h list");
  const Vec origin = Vec::Zero(1);
  ConvergenceTable table;
  if (options.check_return_set) {
    ReturnSetOptions rs;
    rs.convention = options.convention;
    const auto report = return_set_measure(pot, espec, origin, origin, 0.0, 2, 0.0, rs);
    if (report.verdict == Verdict::fails) {
      throw PreconditionError(
          "convergence_study: H5 fails for this potential (returning rays); "
          "use the counterexample analysis instead");
    }
    for (const auto& note : report.notes) table.notes.push_back("H5: " + note);
  }
  const MeasurePairing ray = pair(q, pot, espec, profile, origin, options.rays);
  table.ray_prediction = ray.value;
  table.ray_error = ray.error_estimate;

  std::vector<double> hs(h_list);
  std::sort(hs.begin(), hs.end(), std::greater<>());
  table.rows = parallel_map(hs.size(), [&](std::size_t i) {
    ConvergenceRow row;
    row.h = hs[i];
    row.ray_prediction = ray.value;
    try {
      const Grid1D grid = make_grid(pot, espec, profile, row.h, options.grid);
      const WaveField field = solve(pot, espec, profile, row.h, grid);
      const WignerPairing w = wigner_pair(q, field, options.wigner);
      row.value = w.value;
      row.imag = w.imag;
      row.relative_residual = field.relative_residual();
      row.abs_error = std::abs(w.value - ray.value);
    } catch (const Error& e) {
      row.status = e.what();
      row.value = row.abs_error = std::numeric_limits<double>::quiet_NaN();
    }
    return row;
  });

  std::vector<const ConvergenceRow*> ok;
  for (const auto& r : table.rows) {
    if (r.status == "ok") ok.push_back(&r);
  }
  for (std::size_t i = 1; i < ok.size(); ++i) {
    if (ok[i]->abs_error > ok[i - 1]->abs_error) table.monotone = false;
  }
  int sign_changes = 0;
  for (std::size_t i = 2; i < ok.size(); ++i) {
    const double d1 = ok[i - 1]->value - ok[i - 2]->value;
    const double d2 = ok[i]->value - ok[i - 1]->value;
    if (d1 * d2 < 0.0) ++sign_changes;
  }
  table.oscillatory = sign_changes > 0;
  if (table.oscillatory) table.notes.push_back("successive differences change sign");
  if (!table.monotone) table.notes.push_back("error is not monotone in h");

  double order = 1.0;
  if (ok.size() >= 3) {
    const auto* a = ok[ok.size() - 3];
    const auto* b = ok[ok.size() - 2];
    const auto* c = ok[ok.size() - 1];
    const double r1 = std::abs(b->value - a->value), r2 = std::abs(c->value - b->value);
    if (r1 > 0.0 && r2 > 0.0) {
      const double p = std::log(r1 / r2) / std::log(b->h / c->h);
      if (p > 0.5 && p < 4.0) order = p;
    }
  }
  table.observed_order = order;
  if (ok.size() >= 2) {
    const auto* b = ok[ok.size() - 2];
    const auto* c = ok[ok.size() - 1];
    const double ratio = std::pow(b->h / c->h, order);
    table.extrapolated = c->value + (c->value - b->value) / (ratio - 1.0);
  } else if (ok.size() == 1) {
    table.extrapolated = ok.front()->value;
  }
  return table;
}

Mu1Check mu1_check(const Observable& q, const WaveField& field, const EnergySpec& espec,
                   const PotentialSpec& pot, const SourceProfile& profile,
                   const WignerOptions& options) {
  const Observable weighted = Observable::shell_weighted(q, pot, espec.E0);
  Mu1Check out;
  out.value = wigner_pair(weighted, field, options).value / field.h;
  out.prediction = mu1_pair(q, profile);
  out.relative_error = out.prediction != 0.0 ? (out.value - out.prediction) / out.prediction
                                             : out.value;
  return out;
}

}  // namespace semiwave
