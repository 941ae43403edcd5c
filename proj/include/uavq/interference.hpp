#pragma once

// Aggregate interference at the destination: first two moments of the
// interference sum, a moment-matched Gamma law, and the resulting
// SINR-outage (transmission error) probability of the main link.

#include "uavq/channel.hpp"
#include "uavq/specfun.hpp"

#include <span>
#include <variant>

namespace uavq {

struct InterfererLink {
  double transmit_power = 1.0;      // W
  double path_loss_amplitude = 1.0; // towards the observed destination
  FadingModel fading = Rayleigh{};
  double beta = 0.0;
};

struct NoiseModel {
  double boltzmann = 1.38e-23; // J/K
  double temperature = 290.0;  // K
  double bandwidth = 1e6;      // Hz

  double power() const { return boltzmann * temperature * bandwidth; }
  void validate() const;
};

struct InterferenceMoments {
  double mean = 0.0;
  double variance = 0.0;
};

struct GammaFit {
  double shape = 1.0;
  double scale = 1.0;

  double mean() const { return shape * scale; }
  double variance() const { return shape * scale * scale; }
};

/// Interference that is identically zero (no interferer can transmit).
struct ZeroInterference {};

using InterferenceLaw = std::variant<ZeroInterference, GammaFit>;

/// How the error integral over [beta, inf) is normalised.
enum class ErrorMode {
  Conditional, // divided by Pb(h >= beta): error given that the packet is sent
  Raw,         // the integral as written, without normalisation
};

/// Per-interferer term: each transmitting interferer lands on the observed
/// channel with probability 1/|F|.
struct InterfererContribution {
  double mean = 0.0;          // P h^2 E[h~^2; h~ >= beta] phi / |F|
  double second_moment = 0.0; // P^2 h^4 E[h~^4; h~ >= beta] phi^2 / |F|^2
};

InterfererContribution interferer_contribution(const InterfererLink &link, int num_channels);

InterferenceMoments interference_moments(std::span<const InterfererLink> links, int num_channels);

/// Throws DomainError when either moment is not strictly positive.
GammaFit fit_gamma(double mean, double variance);

/// Gamma fit, or ZeroInterference when the moments vanish.
InterferenceLaw interference_law(const InterferenceMoments &moments);
InterferenceLaw interference_law(std::span<const InterfererLink> links, int num_channels);

/// Pb(I > x).
double interference_ccdf(const InterferenceLaw &law, double x);
/// Density of I at x > 0 (zero for ZeroInterference).
double interference_pdf(const InterferenceLaw &law, double x);

/// SINR-outage probability of the main link with the interference law already fitted.
double p_error(const LinkChannel &main, double main_power, double main_beta,
               const InterferenceLaw &law, double noise_power, double gamma_th,
               ErrorMode mode = ErrorMode::Conditional, const specfun::QuadratureSpec &spec = {});

double p_error(const LinkChannel &main, double main_power, double main_beta,
               std::span<const InterfererLink> links, const NoiseModel &noise, double gamma_th,
               int num_channels, ErrorMode mode = ErrorMode::Conditional);

namespace detail {

/// Variance written as sum of second moments plus cross terms minus the
/// squared mean, exactly as the moment expansion is usually printed.
double interference_variance_expanded(std::span<const InterfererLink> links, int num_channels);

} // namespace detail

} // namespace uavq
