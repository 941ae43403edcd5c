#pragma once

// Special functions and adaptive quadrature shared by the channel,
// interference and throughput models. Everything here is a pure function.

#include <functional>
#include <limits>

namespace uavq::specfun {

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Adaptive Gauss-Kronrod (10/21) quadrature of f over [lo, hi].
/// `hi` may be +infinity, in which case the range is mapped onto [0, 1)
/// through x = lo + t / (1 - t). Throws AccuracyError carrying the best
/// estimate when the tolerance is not met within max_subdivisions.
QuadratureResult integrate(const std::function<double(double)> &f, double lo, double hi,
                           const QuadratureSpec &spec = {});

/// Modified Bessel functions of the first kind, orders 0 and 1.
double bessel_i0(double x);
double bessel_i1(double x);

/// Exponentially scaled forms e^{-x} I_nu(x); finite for every x >= 0.
double bessel_i0e(double x);
double bessel_i1e(double x);

/// First-order Marcum Q-function Q_1(a, b).
double marcum_q1(double a, double b);

/// Unnormalised lower incomplete gamma gamma(k, x) = int_0^x s^{k-1} e^{-s} ds.
double lower_incomplete_gamma(double k, double x);

/// Regularised incomplete gamma functions P(k, x) and Q(k, x) = 1 - P(k, x).
double gamma_p(double k, double x);
double gamma_q(double k, double x);

double erf(double x);

} // namespace uavq::specfun
