#pragma once

#include <functional>

#include "semiwave/types.hpp"

namespace semiwave {

template <typename T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (G7/K15) quadrature on [a, b].
QuadratureResult<double> integrate(const std::function<double(double)>& f, double a, double b,
                                   double abs_tol = 1e-12, double rel_tol = 1e-10,
                                   int max_intervals = 4000);

QuadratureResult<Complex> integrate_complex(const std::function<Complex(double)>& f, double a,
                                            double b, double abs_tol = 1e-12,
                                            double rel_tol = 1e-10, int max_intervals = 4000);

/// Iterated adaptive quadrature over the rectangle [a0,b0] x [a1,b1].
QuadratureResult<double> integrate_2d(const std::function<double(double, double)>& f, double a0,
                                      double b0, double a1, double b1, double abs_tol = 1e-11,
                                      double rel_tol = 1e-9);

}  // namespace semiwave
