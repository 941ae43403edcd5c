#include "uavq/specfun.hpp"

#include "uavq/errors.hpp"
#include "uavq/specfun_detail.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace uavq::specfun {

namespace {

// 21-point Kronrod abscissae and weights with the embedded 10-point Gauss
// rule (QUADPACK qk21). Gauss nodes sit at the odd indices.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208062846291, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
};

bool operator<(const Segment &a, const Segment &b) { return a.error < b.error; }

template <class F> Segment gauss_kronrod21(const F &f, double lo, double hi) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = std::numeric_limits<double>::min();

  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);

  double resg = 0.0;
  double resk = fc * kWgk[10];
  double resabs = std::abs(resk);
  std::array<double, 10> left{};
  std::array<double, 10> right{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    left[j] = f1;
    right[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (std::size_t j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(left[j] - reskh) + std::abs(right[j] - reskh));

  const double abs_half = std::abs(half);
  resabs *= abs_half;
  resasc *= abs_half;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);

  return {lo, hi, resk * half, err};
}

void require_finite(double x, const char *name) {
  if (!std::isfinite(x)) throw DomainError(std::string(name) + ": argument must be finite");
}

void require_non_negative(double x, const char *name) {
  require_finite(x, name);
  if (x < 0.0) throw DomainError(std::string(name) + ": argument must be non-negative");
}

constexpr double kBesselSeriesLimit = 30.0;

// Power series sum_k t^k / (k! (k + nu)!) with t = x^2 / 4, nu in {0, 1}.
double bessel_series(double x, int nu) {
  const double t = 0.25 * x * x;
  double term = nu == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= t / (static_cast<double>(k) * static_cast<double>(k + nu));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// Large-argument expansion of e^{-x} I_nu(x).
double bessel_scaled_asymptotic(double x, int nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (-(mu - odd * odd)) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double bessel_scaled(double x, int nu, const char *name) {
  require_non_negative(x, name);
  if (x <= kBesselSeriesLimit) return bessel_series(x, nu) * std::exp(-x);
  return bessel_scaled_asymptotic(x, nu);
}

} // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw DomainError("QuadratureSpec: tolerances must be positive");
  if (max_subdivisions < 1) throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
}

QuadratureResult integrate(const std::function<double(double)> &f, double lo, double hi,
                           const QuadratureSpec &spec) {
  spec.validate();
  require_finite(lo, "integrate(lo)");
  if (std::isnan(hi) || hi == -kInfinity) throw DomainError("integrate: invalid upper limit");
  if (!(lo < hi)) {
    if (lo == hi) return {};
    throw DomainError("integrate: requires lo < hi");
  }

  QuadratureResult out;
  std::function<double(double)> g;
  double a = lo;
  double b = hi;
  if (std::isinf(hi)) {
    g = [&f, lo, &out](double t) {
      ++out.evaluations;
      const double s = 1.0 - t;
      return f(lo + t / s) / (s * s);
    };
    a = 0.0;
    b = 1.0;
  } else {
    g = [&f, &out](double x) {
      ++out.evaluations;
      return f(x);
    };
  }

  std::vector<Segment> heap;
  heap.reserve(static_cast<std::size_t>(spec.max_subdivisions) + 1);
  heap.push_back(gauss_kronrod21(g, a, b));

  for (;;) {
    double total = 0.0;
    double total_err = 0.0;
    for (const auto &s : heap) {
      total += s.value;
      total_err += s.error;
    }
    if (!std::isfinite(total) || !std::isfinite(total_err))
      throw AccuracyError("integrate: non-finite integrand value", total, total_err);
    out.value = total;
    out.error = total_err;
    if (total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) return out;
    if (static_cast<int>(heap.size()) >= spec.max_subdivisions)
      throw AccuracyError("integrate: tolerance not met within max_subdivisions", total,
                          total_err);

    std::pop_heap(heap.begin(), heap.end());
    const Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(worst.lo < mid && mid < worst.hi))
      throw AccuracyError("integrate: interval cannot be subdivided further", total, total_err);
    heap.push_back(gauss_kronrod21(g, worst.lo, mid));
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(gauss_kronrod21(g, mid, worst.hi));
    std::push_heap(heap.begin(), heap.end());
  }
}

double bessel_i0(double x) {
  require_non_negative(x, "bessel_i0");
  if (x <= kBesselSeriesLimit) return bessel_series(x, 0);
  return bessel_scaled_asymptotic(x, 0) * std::exp(x);
}

double bessel_i1(double x) {
  require_non_negative(x, "bessel_i1");
  if (x <= kBesselSeriesLimit) return bessel_series(x, 1);
  return bessel_scaled_asymptotic(x, 1) * std::exp(x);
}

double bessel_i0e(double x) { return bessel_scaled(x, 0, "bessel_i0e"); }
double bessel_i1e(double x) { return bessel_scaled(x, 1, "bessel_i1e"); }

namespace detail {

double marcum_q1_series(double a, double b) {
  const double z = a * b;
  constexpr int kTerms = 128;
  const int start = 2 * (kTerms + static_cast<int>(std::sqrt(200.0 * kTerms)));

  // Miller backward recurrence for the ratios I_k(z) / I_0(z).
  std::array<double, kTerms + 1> ratio{};
  if (z < 1e-8) {
    // Leading term (z/2)^k / k! is exact to O(z^2).
    ratio[0] = 1.0;
    for (int k = 1; k <= kTerms; ++k)
      ratio[static_cast<std::size_t>(k)] = ratio[static_cast<std::size_t>(k - 1)] * 0.5 * z / k;
  }
  double above = 0.0;
  double current = 1e-300;
  for (int k = z < 1e-8 ? 0 : start; k > 0; --k) {
    const double below = above + (2.0 * k / z) * current;
    above = current;
    current = below;
    if (std::abs(current) > 1e250) {
      current *= 1e-250;
      above *= 1e-250;
      for (auto &r : ratio) r *= 1e-250;
    }
    if (k - 1 <= kTerms) ratio[static_cast<std::size_t>(k - 1)] = current;
  }
  if (z >= 1e-8) {
    const double norm = ratio[0];
    for (auto &r : ratio) r /= norm;
  }

  const double envelope = std::exp(-0.5 * (a - b) * (a - b)) * bessel_i0e(z);
  if (b > a) {
    const double q = a / b;
    double power = 1.0;
    double sum = 0.0;
    for (int k = 0; k <= kTerms; ++k) {
      sum += power * ratio[static_cast<std::size_t>(k)];
      power *= q;
    }
    return std::clamp(envelope * sum, 0.0, 1.0);
  }
  const double q = b / a;
  double power = q;
  double sum = 0.0;
  for (int k = 1; k <= kTerms; ++k) {
    sum += power * ratio[static_cast<std::size_t>(k)];
    power *= q;
  }
  return std::clamp(1.0 - envelope * sum, 0.0, 1.0);
}

double marcum_q1_quadrature(double a, double b) {
  auto density = [a](double x) {
    const double d = x - a;
    return x * std::exp(-0.5 * d * d) * bessel_i0e(a * x);
  };
  const QuadratureSpec spec{1e-300, 1e-13, 2000};
  if (b >= a) {
    const double tail = integrate(density, b, kInfinity, spec).value;
    return std::clamp(tail, 0.0, 1.0);
  }
  const double head = integrate(density, 0.0, b, spec).value;
  return std::clamp(1.0 - head, 0.0, 1.0);
}

} // namespace detail

double marcum_q1(double a, double b) {
  require_non_negative(a, "marcum_q1(a)");
  require_non_negative(b, "marcum_q1(b)");
  if (b == 0.0) return 1.0;
  if (a == 0.0) return std::exp(-0.5 * b * b);
  if (a * b > detail::kMarcumSeriesLimit) return detail::marcum_q1_quadrature(a, b);
  return detail::marcum_q1_series(a, b);
}

namespace {

constexpr int kGammaMaxIterations = 100000;

// Series for P(k, x); valid for x < k + 1.
double gamma_p_series(double k, double x) {
  double ap = k;
  double del = 1.0 / k;
  double sum = del;
  for (int n = 0; n < kGammaMaxIterations; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + k * std::log(x) - std::lgamma(k));
}

// Lentz continued fraction for Q(k, x); valid for x >= k + 1.
double gamma_q_fraction(double k, double x) {
  constexpr double floor = 1e-300;
  double b = x + 1.0 - k;
  double c = 1.0 / floor;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIterations; ++i) {
    const double an = -i * (i - k);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < floor) d = floor;
    c = b + an / c;
    if (std::abs(c) < floor) c = floor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + k * std::log(x) - std::lgamma(k)) * h;
}

void check_gamma_args(double k, double x, const char *name) {
  if (std::isnan(k) || std::isinf(k) || k <= 0.0)
    throw DomainError(std::string(name) + ": shape must be positive and finite");
  if (std::isnan(x) || x < 0.0) throw DomainError(std::string(name) + ": x must be >= 0");
}

} // namespace

double gamma_p(double k, double x) {
  check_gamma_args(k, x, "gamma_p");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < k + 1.0) return std::min(1.0, gamma_p_series(k, x));
  return std::clamp(1.0 - gamma_q_fraction(k, x), 0.0, 1.0);
}

double gamma_q(double k, double x) {
  check_gamma_args(k, x, "gamma_q");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < k + 1.0) return std::clamp(1.0 - gamma_p_series(k, x), 0.0, 1.0);
  return std::min(1.0, gamma_q_fraction(k, x));
}

double lower_incomplete_gamma(double k, double x) {
  const double p = gamma_p(k, x);
  if (p == 0.0) return 0.0;
  return std::exp(std::log(p) + std::lgamma(k));
}

double erf(double x) {
  require_finite(x, "erf");
  return std::erf(x);
}

} // namespace uavq::specfun
