#include "uavq/channel.hpp"

#include "uavq/errors.hpp"
#include "uavq/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace uavq {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

void check_theta(double theta, const char *name) {
  if (!(theta >= 0.0 && theta <= kHalfPi))
    throw DomainError(std::string(name) + ": elevation must lie in [0, pi/2]");
}

void check_threshold(double beta, const char *name) {
  if (std::isnan(beta) || beta < 0.0)
    throw DomainError(std::string(name) + ": threshold must be >= 0");
}

// x e^{-(x^2+b^2)/2} I0(xb), with the exponentials folded together.
double rician_pdf(double b, double x) {
  const double d = x - b;
  return x * std::exp(-0.5 * d * d) * specfun::bessel_i0e(x * b);
}

double rician_truncated_moment(double b, double beta, int power) {
  if (std::isinf(beta)) return 0.0;
  auto integrand = [b, power](double x) {
    const double x2 = x * x;
    return (power == 2 ? x2 : x2 * x2) * rician_pdf(b, x);
  };
  const specfun::QuadratureSpec spec{1e-13, 1e-11, 400};
  return specfun::integrate(integrand, beta, specfun::kInfinity, spec).value;
}

} // namespace

double distance(const Position &a, const Position &b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

void EnvironmentParams::validate() const {
  if (!(a1 > 0.0)) throw ValidationError("environment.a1", "must be > 0");
  if (!(b1 > 0.0)) throw ValidationError("environment.b1", "must be > 0");
  if (!(k0 > 0.0)) throw ValidationError("environment.k0", "must be > 0");
  if (!(k_pi2 >= k0)) throw ValidationError("environment.k_pi2", "must be >= k0");
  if (!(alpha_pi2 >= 2.0)) throw ValidationError("environment.alpha_pi2", "must be >= 2");
  if (!(alpha0 >= alpha_pi2)) throw ValidationError("environment.alpha0", "must be >= alpha_pi2");
  if (!(omega > 0.0)) throw ValidationError("environment.omega", "must be > 0");
  if (!(d0 > 0.0)) throw ValidationError("environment.d0", "must be > 0");
  if (!(carrier_frequency > 0.0))
    throw ValidationError("environment.carrier_frequency", "must be > 0");
}

std::string_view to_string(FadingKind kind) {
  return kind == FadingKind::Rician ? "rician" : "rayleigh";
}

std::optional<FadingKind> parse_fading_kind(std::string_view text) {
  if (text == "rician" || text == "rice") return FadingKind::Rician;
  if (text == "rayleigh") return FadingKind::Rayleigh;
  return std::nullopt;
}

FadingKind kind_of(const FadingModel &model) {
  return std::holds_alternative<Rician>(model) ? FadingKind::Rician : FadingKind::Rayleigh;
}

void validate(const FadingModel &model) {
  if (const auto *ray = std::get_if<Rayleigh>(&model)) {
    if (!(ray->omega > 0.0) || !std::isfinite(ray->omega))
      throw DomainError("Rayleigh fading requires omega > 0");
  } else {
    const double b = std::get<Rician>(model).b;
    if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("Rician fading requires b >= 0");
  }
}

double elevation_angle(const Position &a, const Position &b) {
  const double vertical = std::abs(a.z - b.z);
  const double horizontal = std::hypot(a.x - b.x, a.y - b.y);
  if (vertical == 0.0 && horizontal == 0.0)
    throw DomainError("elevation_angle: identical positions");
  if (horizontal == 0.0) return kHalfPi;
  return std::atan2(vertical, horizontal);
}

double p_los(double theta, const EnvironmentParams &env) {
  check_theta(theta, "p_los");
  return 1.0 / (1.0 + env.a1 * std::exp(-env.b1 * theta));
}

double path_loss_exponent(double theta, const EnvironmentParams &env) {
  // a2 ~= alpha_pi2 - alpha0 and b2 ~= alpha0.
  const double a2 = env.alpha_pi2 - env.alpha0;
  return a2 * p_los(theta, env) + env.alpha0;
}

double path_loss_amplitude(double d, double theta, const EnvironmentParams &env) {
  if (std::isnan(d) || d < env.d0)
    throw DomainError("path_loss_amplitude: distance below the reference distance d0");
  const double alpha = path_loss_exponent(theta, env);
  const double free_space = kSpeedOfLight / (4.0 * std::numbers::pi * env.carrier_frequency * env.d0);
  return free_space * std::pow(env.d0 / d, 0.5 * alpha);
}

double rician_b(double theta, const EnvironmentParams &env) {
  check_theta(theta, "rician_b");
  const double b3 = (2.0 / std::numbers::pi) * std::log(env.k_pi2 / env.k0);
  return std::sqrt(2.0 * env.k0 * std::exp(b3 * theta));
}

double fading_pdf(const FadingModel &model, double x) {
  validate(model);
  if (std::isnan(x) || x < 0.0) throw DomainError("fading_pdf: x must be >= 0");
  if (std::isinf(x)) return 0.0;
  if (const auto *ray = std::get_if<Rayleigh>(&model))
    return 2.0 * x / ray->omega * std::exp(-x * x / ray->omega);
  return rician_pdf(std::get<Rician>(model).b, x);
}

double fading_survival(const FadingModel &model, double beta) {
  validate(model);
  check_threshold(beta, "fading_survival");
  if (std::isinf(beta)) return 0.0;
  if (const auto *ray = std::get_if<Rayleigh>(&model)) return std::exp(-beta * beta / ray->omega);
  return specfun::marcum_q1(std::get<Rician>(model).b, beta);
}

double fading_cdf(const FadingModel &model, double beta) {
  validate(model);
  check_threshold(beta, "fading_cdf");
  if (std::isinf(beta)) return 1.0;
  if (const auto *ray = std::get_if<Rayleigh>(&model))
    return -std::expm1(-beta * beta / ray->omega);
  return 1.0 - specfun::marcum_q1(std::get<Rician>(model).b, beta);
}

double transmit_prob(const FadingModel &model, double beta, int num_channels) {
  if (num_channels < 1) throw DomainError("transmit_prob: num_channels must be >= 1");
  const double survival = fading_survival(model, beta);
  if (survival >= 1.0) return 1.0;
  return -std::expm1(num_channels * std::log1p(-survival));
}

double truncated_power_moment(const FadingModel &model, double beta, int power) {
  validate(model);
  check_threshold(beta, "truncated_power_moment");
  if (power != 2 && power != 4) throw DomainError("truncated_power_moment: power must be 2 or 4");
  if (const auto *ray = std::get_if<Rayleigh>(&model)) {
    if (std::isinf(beta)) return 0.0;
    const double w = ray->omega;
    const double b2 = beta * beta;
    const double tail = std::exp(-b2 / w);
    if (power == 2) return (b2 + w) * tail;
    return (b2 * b2 + 2.0 * w * b2 + 2.0 * w * w) * tail;
  }
  return rician_truncated_moment(std::get<Rician>(model).b, beta, power);
}

FadingModel classify_link(const Position &a, const Position &b, const EnvironmentParams &env,
                          std::optional<FadingKind> forced) {
  const double theta = elevation_angle(a, b);
  const FadingKind kind =
      forced.value_or(p_los(theta, env) >= 0.5 ? FadingKind::Rician : FadingKind::Rayleigh);
  if (kind == FadingKind::Rician) return Rician{rician_b(theta, env)};
  return Rayleigh{env.omega};
}

LinkChannel make_link(const Position &tx, const Position &rx, const EnvironmentParams &env,
                      std::optional<FadingKind> forced) {
  LinkChannel link;
  link.elevation = elevation_angle(tx, rx);
  link.distance = distance(tx, rx);
  link.path_loss_amplitude = path_loss_amplitude(link.distance, link.elevation, env);
  link.fading = classify_link(tx, rx, env, forced);
  return link;
}

} // namespace uavq
