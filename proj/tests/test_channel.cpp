#include "oracles.hpp"

#include <doctest.h>

#include "uavq/channel.hpp"
#include "uavq/errors.hpp"
#include "uavq/specfun.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace uavq;
using doctest::Approx;
constexpr double kPi = std::numbers::pi;

TEST_SUITE("channel") {

TEST_CASE("elevation angle of simple geometries") {
  CHECK(elevation_angle({0, 0, 0}, {10, 0, 10}) == Approx(kPi / 4).epsilon(1e-15));
  CHECK(elevation_angle({0, 0, 0}, {0, 0, 50}) == Approx(kPi / 2).epsilon(1e-15));
  CHECK(elevation_angle({0, 0, 0}, {20, 0, 0}) == 0.0);
  CHECK(elevation_angle({0, 0, 50}, {0, 0, 0}) == Approx(kPi / 2));
  CHECK_THROWS_AS(elevation_angle({1, 2, 3}, {1, 2, 3}), DomainError);
  CHECK(distance({0, 0, 0}, {3, 4, 12}) == 13.0);
}

TEST_CASE("line-of-sight probability") {
  EnvironmentParams env;
  env.a1 = 9;
  CHECK(p_los(0.0, env) == Approx(0.1).epsilon(1e-15));
  env.b1 = 2;
  CHECK(p_los(kPi / 4, env) == Approx(1.0 / (1.0 + 9 * std::exp(-kPi / 2))).epsilon(1e-15));
  env.b1 = 60;
  CHECK(p_los(kPi / 2, env) == Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(p_los(-0.1, env), DomainError);
  CHECK_THROWS_AS(p_los(2.0, env), DomainError);
}

TEST_CASE("path-loss exponent endpoints") {
  EnvironmentParams env; // a1 = 9.61, b1 = 9.167, alpha0 = 3.5, alpha_pi2 = 2
  const double a2 = env.alpha_pi2 - env.alpha0;
  CHECK(path_loss_exponent(0.0, env) == Approx(3.5 + a2 / (1 + env.a1)).epsilon(1e-14));
  const double residual = a2 * (p_los(kPi / 2, env) - 1.0);
  CHECK(path_loss_exponent(kPi / 2, env) == Approx(2.0 + residual).epsilon(1e-14));
  CHECK(std::abs(residual) < 1e-5);
  env.a1 = 1e14;
  CHECK(path_loss_exponent(0.0, env) == Approx(3.5).epsilon(1e-12));
}

TEST_CASE("path-loss amplitude follows the single-slope law") {
  EnvironmentParams env;
  const double at_d0 = path_loss_amplitude(20.0, 0.0, env);
  // c / (4 pi f d0); the rounded value 1.3263e-3 corresponds to c = 3e8.
  CHECK(at_d0 == Approx(kSpeedOfLight / (4 * kPi * 9e8 * 20)).epsilon(1e-14));
  CHECK(at_d0 == Approx(1.3263e-3).epsilon(1e-3));
  CHECK(path_loss_amplitude(20.0, 1.2, env) == Approx(at_d0).epsilon(1e-15));

  env.a1 = 1e14; // alpha(0) = 3.5 exactly
  const double expected = kSpeedOfLight / (4 * kPi * 9e8) * std::sqrt(std::pow(20.0, 1.5) / std::pow(40.0, 3.5));
  CHECK(path_loss_amplitude(40.0, 0.0, env) == Approx(expected).epsilon(1e-12));

  EnvironmentParams free_space;
  free_space.alpha0 = 2.0;
  CHECK(path_loss_amplitude(40.0, 0.3, free_space) ==
        Approx(0.5 * path_loss_amplitude(20.0, 0.3, free_space)).epsilon(1e-14));
  CHECK_THROWS_AS(path_loss_amplitude(19.9, 0.0, env), DomainError);
}

TEST_CASE("Rician factor interpolates geometrically in elevation") {
  EnvironmentParams env;
  CHECK(rician_b(0.0, env) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(rician_b(kPi / 2, env) == Approx(std::sqrt(30.0)).epsilon(1e-14));
  CHECK(rician_b(kPi / 4, env) == Approx(std::sqrt(2 * std::sqrt(15.0))).epsilon(1e-14));
}

TEST_CASE("fading density") {
  CHECK(fading_pdf(Rayleigh{2.0}, 1.0) == Approx(std::exp(-0.5)).epsilon(1e-15));
  for (double x : {0.2, 1.0, 2.7}) CHECK(fading_pdf(Rician{0.0}, x) == Approx(x * std::exp(-x * x / 2)).epsilon(1e-14));
  CHECK(fading_pdf(Rayleigh{2.0}, 0.0) == 0.0);
  CHECK(fading_pdf(Rician{3.0}, 0.0) == 0.0);
  for (double x : {0.5, 4.0, 5.5, 9.0})
    CHECK(fading_pdf(Rician{5.477}, x) == Approx(static_cast<double>(oracle::rician_pdf(5.477, x))).epsilon(1e-12));
  CHECK_THROWS_AS(fading_pdf(Rayleigh{0.0}, 1.0), DomainError);
  CHECK_THROWS_AS(fading_pdf(Rician{-1.0}, 1.0), DomainError);
  CHECK_THROWS_AS(fading_pdf(Rayleigh{2.0}, -1.0), DomainError);
}

TEST_CASE("fading cdf and survival") {
  CHECK(fading_cdf(Rayleigh{2.0}, std::sqrt(2 * std::log(2.0))) == Approx(0.5).epsilon(1e-15));
  CHECK(fading_cdf(Rician{4.0}, 0.0) == 0.0);
  const double mass = static_cast<double>(oracle::simpson([](oracle::ld x) { return oracle::rician_pdf(2, x); }, 0, 2, 4000));
  CHECK(fading_cdf(Rician{2.0}, 2.0) == Approx(mass).epsilon(1e-11));
  CHECK(fading_cdf(Rician{2.0}, 2.0) == Approx(1.0 - specfun::marcum_q1(2.0, 2.0)).epsilon(1e-15));
  for (double beta : {0.0, 0.5, 3.0, 5.1, 8.0}) {
    CHECK(fading_cdf(Rician{5.477}, beta) + fading_survival(Rician{5.477}, beta) == Approx(1.0).epsilon(1e-15));
    CHECK(fading_cdf(Rayleigh{2.0}, beta) + fading_survival(Rayleigh{2.0}, beta) == Approx(1.0).epsilon(1e-15));
  }
  CHECK(fading_survival(Rayleigh{2.0}, 30.0) == Approx(std::exp(-450.0)).epsilon(1e-13)); // no cancellation in the far tail
  CHECK_THROWS_AS(fading_cdf(Rayleigh{2.0}, -0.1), DomainError);
}

TEST_CASE("transmit probability over the best of |F| channels") {
  CHECK(transmit_prob(Rayleigh{2.0}, 0.0, 15) == 1.0);
  CHECK(transmit_prob(Rician{5.0}, 0.0, 15) == 1.0);
  CHECK(transmit_prob(Rayleigh{2.0}, std::sqrt(2.0), 1) == Approx(std::exp(-1.0)).epsilon(1e-15));
  const double cdf = 1 - std::exp(-1.55 * 1.55 / 2);
  CHECK(transmit_prob(Rayleigh{2.0}, 1.55, 15) == Approx(1 - std::pow(cdf, 15)).epsilon(1e-14));
  CHECK(transmit_prob(Rayleigh{2.0}, 1e3, 15) == 0.0);
  CHECK_THROWS_AS(transmit_prob(Rayleigh{2.0}, 1.0, 0), DomainError);
}

TEST_CASE("truncated moments: Rayleigh closed forms") {
  CHECK(truncated_power_moment(Rayleigh{2.0}, 0.0, 2) == Approx(2.0).epsilon(1e-15));
  CHECK(truncated_power_moment(Rayleigh{2.0}, 0.0, 4) == Approx(8.0).epsilon(1e-15));
  for (double beta : {0.4, 1.55, 3.0}) {
    for (int p : {2, 4}) {
      auto f = [p](oracle::ld x) { return std::pow(x, p) * 2 * x / 2 * std::exp(-x * x / 2); };
      const double ref = static_cast<double>(oracle::simpson(f, beta, 40, 200000));
      CHECK(truncated_power_moment(Rayleigh{2.0}, beta, p) == Approx(ref).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(truncated_power_moment(Rayleigh{2.0}, 0.0, 3), DomainError);
}

TEST_CASE("truncated moments: Rician against Monte Carlo sampling") {
  const double b = std::sqrt(30.0), beta = 5.1;
  for (int p : {2, 4}) {
    auto est = oracle::monte_carlo(17 + p, 10'000'000, [&](std::mt19937_64 &rng) {
      static thread_local std::normal_distribution<double> n(0.0, 1.0);
      const double re = b + n(rng), im = n(rng);
      const double h2 = re * re + im * im;
      return h2 >= beta * beta ? (p == 2 ? h2 : h2 * h2) : 0.0;
    });
    CAPTURE(p);
    CAPTURE(est.mean);
    CHECK(std::abs(truncated_power_moment(Rician{b}, beta, p) - est.mean) < 3 * est.stderr_);
  }
  // b = 0 is the Rayleigh law with omega = 2.
  CHECK(truncated_power_moment(Rician{0.0}, 1.2, 4) ==
        Approx(truncated_power_moment(Rayleigh{2.0}, 1.2, 4)).epsilon(1e-9));
}

TEST_CASE("link classification") {
  EnvironmentParams env;
  const Position uav{20, 20, 50};
  auto k = classify_link({0, 20, 0}, uav, env);
  CHECK(kind_of(k) == FadingKind::Rician);
  CHECK(kind_of(classify_link({0, 0, 0}, {30, 0, 0}, env)) == FadingKind::Rayleigh);
  CHECK(kind_of(classify_link({0, 20, 0}, uav, env, FadingKind::Rayleigh)) == FadingKind::Rayleigh);
  CHECK(std::get<Rayleigh>(classify_link({0, 20, 0}, uav, env, FadingKind::Rayleigh)).omega == 2.0);
  const auto link = make_link({0, 20, 0}, uav, env);
  CHECK(link.distance == Approx(std::hypot(20.0, 50.0)));
  CHECK(link.elevation == Approx(std::atan2(50.0, 20.0)));
  CHECK(std::get<Rician>(link.fading).b == Approx(rician_b(link.elevation, env)));
  CHECK(parse_fading_kind("rician") == FadingKind::Rician);
  CHECK(parse_fading_kind("rayleigh") == FadingKind::Rayleigh);
  CHECK_FALSE(parse_fading_kind("nakagami"));
  CHECK(to_string(FadingKind::Rician) == "rician");
}

TEST_CASE("environment validation") {
  EnvironmentParams env;
  CHECK_NOTHROW(env.validate());
  env.d0 = 0;
  CHECK_THROWS_AS(env.validate(), ValidationError);
  env = {};
  env.alpha_pi2 = 4.0;
  CHECK_THROWS_AS(env.validate(), ValidationError);
}

}
