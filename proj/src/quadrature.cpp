#include "semiwave/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "semiwave/errors.hpp"

namespace semiwave {

namespace {

// Kronrod nodes on [0, 1) of the symmetric 15-point rule; odd indices are the Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename T, typename F>
Panel<T> gk15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kKronrod[7];
  T gauss = fc * kGauss[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const T sum = f(center - dx) + f(center + dx);
    kronrod += kKronrod[j] * sum;
    if (j % 2 == 1) gauss += kGauss[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs(kronrod - gauss) * half};
}

template <typename T, typename F>
QuadratureResult<T> adaptive(const F& f, double a, double b, double abs_tol, double rel_tol,
                             int max_intervals) {
  QuadratureResult<T> out;
  if (a == b) return out;
  std::priority_queue<Panel<T>> heap;
  // A few initial panels so that narrow features are not missed entirely.
  constexpr int kInitial = 8;
  T total{};
  double error = 0.0;
  for (int i = 0; i < kInitial; ++i) {
    const double lo = a + (b - a) * i / kInitial;
    const double hi = a + (b - a) * (i + 1) / kInitial;
    auto p = gk15<T>(f, lo, hi);
    total += p.value;
    error += p.error;
    heap.push(p);
  }
  out.evaluations = 15 * kInitial;
  while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (static_cast<int>(heap.size()) >= max_intervals) {
      throw QuadratureError("adaptive quadrature did not converge (error " +
                            std::to_string(error) + ")");
    }
    const Panel<T> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = gk15<T>(f, worst.a, mid);
    auto right = gk15<T>(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to drop accumulated cancellation in the running totals.
  T sum{};
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.error = err;
  return out;
}

}  // namespace

QuadratureResult<double> integrate(const std::function<double(double)>& f, double a, double b,
                                   double abs_tol, double rel_tol, int max_intervals) {
  return adaptive<double>(f, a, b, abs_tol, rel_tol, max_intervals);
}

QuadratureResult<Complex> integrate_complex(const std::function<Complex(double)>& f, double a,
                                            double b, double abs_tol, double rel_tol,
                                            int max_intervals) {
  return adaptive<Complex>(f, a, b, abs_tol, rel_tol, max_intervals);
}

QuadratureResult<double> integrate_2d(const std::function<double(double, double)>& f, double a0,
                                      double b0, double a1, double b1, double abs_tol,
                                      double rel_tol) {
  double inner_error = 0.0;
  int evaluations = 0;
  auto outer = integrate(
      [&](double u) {
        auto inner = integrate([&](double v) { return f(u, v); }, a1, b1, 0.1 * abs_tol,
                               0.1 * rel_tol);
        inner_error = std::max(inner_error, inner.error);
        evaluations += inner.evaluations;
        return inner.value;
      },
      a0, b0, abs_tol, rel_tol);
  outer.error += inner_error * (b0 - a0);
  outer.evaluations = evaluations;
  return outer;
}

}  // namespace semiwave
