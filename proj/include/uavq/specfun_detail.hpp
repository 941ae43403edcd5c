#pragma once

// Individual evaluation branches, exposed so tests can check them against
// each other around the switch point.

namespace uavq::specfun::detail {

/// marcum_q1 uses the Bessel-term series up to this value of a*b and the
/// quadrature definition above it.
inline constexpr double kMarcumSeriesLimit = 30.0;

/// Q_1(a, b) = e^{-(a^2+b^2)/2} sum_k (a/b)^k I_k(ab) for b > a, and the
/// complementary form 1 - e^{-(a^2+b^2)/2} sum_{k>=1} (b/a)^k I_k(ab) otherwise.
/// Requires a, b > 0.
double marcum_q1_series(double a, double b);

/// Direct integration of the Rician density over the shorter tail.
double marcum_q1_quadrature(double a, double b);

} // namespace uavq::specfun::detail
