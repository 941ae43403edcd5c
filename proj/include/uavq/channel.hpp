#pragma once

// Geometry, line-of-sight probability, single-slope path loss and the
// Rician/Rayleigh small-scale fading laws of a ground/air link.

#include <optional>
#include <string_view>
#include <variant>

namespace uavq {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0; // altitude, >= 0
};

double distance(const Position &a, const Position &b);

struct EnvironmentParams {
  double a1 = 9.61;      // LoS logistic offset
  double b1 = 9.167;     // LoS logistic slope, per radian
  double k0 = 1.0;       // Rician factor at elevation 0
  double k_pi2 = 15.0;   // Rician factor at elevation pi/2
  double alpha0 = 3.5;   // path-loss exponent at elevation 0
  double alpha_pi2 = 2.0; // path-loss exponent at elevation pi/2
  double omega = 2.0;    // Rayleigh fading factor
  double d0 = 20.0;      // reference distance, m
  double carrier_frequency = 900e6; // Hz

  void validate() const;
};

struct Rayleigh {
  double omega = 2.0;
};

struct Rician {
  double b = 0.0;
};

using FadingModel = std::variant<Rayleigh, Rician>;

enum class FadingKind { Rayleigh, Rician };

std::string_view to_string(FadingKind kind);
std::optional<FadingKind> parse_fading_kind(std::string_view text);
FadingKind kind_of(const FadingModel &model);

/// Throws DomainError when the parameters are outside the model's support.
void validate(const FadingModel &model);

struct LinkChannel {
  FadingModel fading = Rayleigh{};
  double path_loss_amplitude = 1.0; // sqrt of the path-loss gain
  double distance = 0.0;            // m
  double elevation = 0.0;           // rad
};

/// Elevation of the segment a-b above the horizontal plane, in [0, pi/2].
double elevation_angle(const Position &a, const Position &b);

double p_los(double theta, const EnvironmentParams &env);
double path_loss_exponent(double theta, const EnvironmentParams &env);
double path_loss_amplitude(double d, double theta, const EnvironmentParams &env);
double rician_b(double theta, const EnvironmentParams &env);

double fading_pdf(const FadingModel &model, double x);
double fading_cdf(const FadingModel &model, double beta);
/// 1 - fading_cdf, computed without cancellation.
double fading_survival(const FadingModel &model, double beta);

/// Probability that the best of `num_channels` i.i.d. fading draws reaches beta.
double transmit_prob(const FadingModel &model, double beta, int num_channels);

/// E[h^power ; h >= beta] for power 2 or 4.
double truncated_power_moment(const FadingModel &model, double beta, int power);

/// LoS (P_LoS >= 0.5) links are Rician with b from the elevation, others are
/// Rayleigh with the environment's omega, unless `forced` says otherwise.
FadingModel classify_link(const Position &a, const Position &b, const EnvironmentParams &env,
                          std::optional<FadingKind> forced = std::nullopt);

LinkChannel make_link(const Position &tx, const Position &rx, const EnvironmentParams &env,
                      std::optional<FadingKind> forced = std::nullopt);

} // namespace uavq
