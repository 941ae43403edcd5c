#include "uavq/interference.hpp"

#include "uavq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace uavq {

namespace {

void check_link(const InterfererLink &link) {
  if (!(link.transmit_power > 0.0)) throw DomainError("interferer transmit_power must be > 0");
  if (!(link.path_loss_amplitude > 0.0))
    throw DomainError("interferer path_loss_amplitude must be > 0");
  if (std::isnan(link.beta) || link.beta < 0.0) throw DomainError("interferer beta must be >= 0");
  validate(link.fading);
}

} // namespace

void NoiseModel::validate() const {
  if (!(boltzmann > 0.0)) throw ValidationError("noise.boltzmann", "must be > 0");
  if (!(temperature > 0.0)) throw ValidationError("noise.temperature", "must be > 0");
  if (!(bandwidth > 0.0)) throw ValidationError("noise.bandwidth", "must be > 0");
}

InterfererContribution interferer_contribution(const InterfererLink &link, int num_channels) {
  check_link(link);
  if (num_channels < 1) throw DomainError("num_channels must be >= 1");
  const double phi = transmit_prob(link.fading, link.beta, num_channels);
  if (phi == 0.0) return {};
  const double gain = link.transmit_power * link.path_loss_amplitude * link.path_loss_amplitude;
  const double share = phi / num_channels;
  InterfererContribution out;
  out.mean = gain * truncated_power_moment(link.fading, link.beta, 2) * share;
  out.second_moment = gain * gain * truncated_power_moment(link.fading, link.beta, 4) * share * share;
  return out;
}

InterferenceMoments interference_moments(std::span<const InterfererLink> links, int num_channels) {
  if (num_channels < 1) throw DomainError("num_channels must be >= 1");
  InterferenceMoments out;
  double second_total = 0.0;
  for (const auto &link : links) {
    const auto term = interferer_contribution(link, num_channels);
    out.mean += term.mean;
    out.variance += term.second_moment - term.mean * term.mean;
    second_total += term.second_moment;
  }
  if (out.variance < 0.0) {
    if (out.variance < -1e-15 * second_total)
      throw AccuracyError("interference_moments: negative variance", out.variance, second_total);
    out.variance = 0.0;
  }
  return out;
}

GammaFit fit_gamma(double mean, double variance) {
  if (!(mean > 0.0) || !(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance))
    throw DomainError("fit_gamma: degenerate interference, mean and variance must be > 0");
  return {mean * mean / variance, variance / mean};
}

InterferenceLaw interference_law(const InterferenceMoments &moments) {
  if (moments.mean == 0.0 && moments.variance == 0.0) return ZeroInterference{};
  return fit_gamma(moments.mean, moments.variance);
}

InterferenceLaw interference_law(std::span<const InterfererLink> links, int num_channels) {
  return interference_law(interference_moments(links, num_channels));
}

double interference_ccdf(const InterferenceLaw &law, double x) {
  if (std::isnan(x)) throw DomainError("interference_ccdf: x is NaN");
  if (std::holds_alternative<ZeroInterference>(law)) return x < 0.0 ? 1.0 : 0.0;
  if (x <= 0.0) return 1.0;
  const auto &fit = std::get<GammaFit>(law);
  return specfun::gamma_q(fit.shape, x / fit.scale);
}

double interference_pdf(const InterferenceLaw &law, double x) {
  if (std::holds_alternative<ZeroInterference>(law) || !(x > 0.0)) return 0.0;
  const auto &fit = std::get<GammaFit>(law);
  return std::exp((fit.shape - 1.0) * std::log(x) - x / fit.scale - std::lgamma(fit.shape) -
                  fit.shape * std::log(fit.scale));
}

double p_error(const LinkChannel &main, double main_power, double main_beta,
               const InterferenceLaw &law, double noise_power, double gamma_th, ErrorMode mode,
               const specfun::QuadratureSpec &spec) {
  validate(main.fading);
  if (std::isnan(main_beta) || main_beta < 0.0) throw DomainError("p_error: beta must be >= 0");
  if (!(gamma_th > 0.0)) throw DomainError("p_error: gamma_th must be > 0");
  if (!(main_power > 0.0)) throw DomainError("p_error: transmit power must be > 0");
  if (std::isnan(noise_power) || noise_power < 0.0)
    throw DomainError("p_error: noise power must be >= 0");

  const auto &fading = main.fading;
  // Received SINR numerator per unit h~^2, divided by the threshold.
  const double gain = main_power * main.path_loss_amplitude * main.path_loss_amplitude / gamma_th;
  const double survival = fading_survival(fading, main_beta);

  if (mode == ErrorMode::Conditional && survival < 1e-300) {
    // Limit of the conditional law: all mass sits at beta.
    return interference_ccdf(law, gain * main_beta * main_beta - noise_power);
  }
  const double scale = mode == ErrorMode::Conditional ? 1.0 / survival : 1.0;

  // Below x0 the signal cannot clear the noise floor on its own.
  const double x0 = std::sqrt(noise_power / gain);
  double head = 0.0;
  double lo = main_beta;
  if (x0 > main_beta) {
    head = (survival - fading_survival(fading, x0)) * scale;
    lo = x0;
  }

  double tail = 0.0;
  if (std::holds_alternative<GammaFit>(law) && !std::isinf(lo)) {
    const auto &fit = std::get<GammaFit>(law);
    auto integrand = [&](double x) {
      const double density = fading_pdf(fading, x);
      if (density == 0.0) return 0.0;
      const double excess = std::max(0.0, gain * x * x - noise_power);
      return scale * density * specfun::gamma_q(fit.shape, excess / fit.scale);
    };
    tail = specfun::integrate(integrand, lo, specfun::kInfinity, spec).value;
  }
  return std::clamp(head + tail, 0.0, 1.0);
}

double p_error(const LinkChannel &main, double main_power, double main_beta,
               std::span<const InterfererLink> links, const NoiseModel &noise, double gamma_th,
               int num_channels, ErrorMode mode) {
  noise.validate();
  return p_error(main, main_power, main_beta, interference_law(links, num_channels), noise.power(),
                 gamma_th, mode);
}

namespace detail {

double interference_variance_expanded(std::span<const InterfererLink> links, int num_channels) {
  std::vector<InterfererContribution> terms;
  for (const auto &link : links) terms.push_back(interferer_contribution(link, num_channels));
  double mean = 0.0;
  double total = 0.0;
  for (const auto &t : terms) {
    mean += t.mean;
    total += t.second_moment;
  }
  for (std::size_t i = 0; i < terms.size(); ++i)
    for (std::size_t j = 0; j < terms.size(); ++j)
      if (i != j) total += terms[i].mean * terms[j].mean;
  return total - mean * mean;
}

} // namespace detail

} // namespace uavq
