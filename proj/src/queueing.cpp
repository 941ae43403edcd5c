#include "uavq/queueing.hpp"

#include "uavq/errors.hpp"
#include "uavq/specfun.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace uavq {

namespace {

void check_rate(double mu, const char *name) {
  if (!(mu > 0.0 && mu <= 1.0))
    throw DomainError(std::string(name) + ": per-slot service rate must lie in (0, 1]");
}

// Tail mass of Poisson(m) at or above i, i.e. 1 - sum_{j<i} m^j e^{-m} / j!.
double poisson_tail(int i, double m) {
  if (i <= 0) return 1.0;
  if (m == 0.0) return 0.0;
  return specfun::gamma_p(i, m);
}

double overflow_closed_form(double rho, double capacity) {
  const double gap = 1.0 - rho;
  if (gap <= 0.0) return 1.0 / (1.0 + capacity);
  const double decay = std::exp(-capacity * gap);
  // 1 - rho * decay written as (1 - decay) + gap * decay.
  const double denominator = -std::expm1(-capacity * gap) + gap * decay;
  return gap * decay / denominator;
}

} // namespace

void QueueParams::validate() const {
  if (!(arrival_rate > 0.0)) throw ValidationError("queue.arrival_rate", "must be > 0");
  if (!(slot_duration > 0.0)) throw ValidationError("queue.slot_duration", "must be > 0");
  if (!(delay_threshold > 0.0)) throw ValidationError("queue.delay_threshold", "must be > 0");
  if (!(buffer_capacity > 0.0)) throw ValidationError("queue.buffer_capacity", "must be > 0");
  if (!(slot_load() < 1.0))
    throw ValidationError("queue.arrival_rate", "arrival_rate * slot_duration must be < 1");
}

double slots_to_transmit_pmf(double phi, int k) {
  if (phi == 0.0) throw DomainError("slots_to_transmit_pmf: phi = 0, the node never transmits");
  if (!(phi > 0.0 && phi <= 1.0)) throw DomainError("slots_to_transmit_pmf: phi must lie in (0, 1]");
  if (k < 1) throw DomainError("slots_to_transmit_pmf: k must be >= 1");
  if (phi == 1.0) return k == 1 ? 1.0 : 0.0;
  return std::pow(1.0 - phi, k - 1) * phi;
}

double service_rate(double phi) {
  check_rate(phi, "service_rate");
  return phi;
}

double offered_load(double mu, const QueueParams &q) {
  if (!(mu > 0.0)) throw DomainError("offered_load: service rate must be > 0");
  return q.slot_load() / mu;
}

double p_delay(double mu, const QueueParams &q) {
  if (std::isnan(mu) || mu < 0.0) throw DomainError("p_delay: service rate must be >= 0");
  const double service = mu / q.slot_duration;
  double margin = service - q.arrival_rate;
  if (margin < -kStabilityTolerance * q.arrival_rate)
    throw StabilityError("p_delay: service rate below arrival rate, beta exceeds its upper bound",
                         -margin);
  if (margin < 0.0) margin = 0.0;
  return std::exp(-margin * q.delay_threshold);
}

double p_overflow(double mu, const QueueParams &q) {
  if (std::isnan(mu) || mu < 0.0) throw DomainError("p_overflow: service rate must be >= 0");
  if (std::isnan(q.buffer_capacity) || q.buffer_capacity < 0.0)
    throw DomainError("p_overflow: buffer capacity must be >= 0");
  const double rho = mu > 0.0 ? offered_load(mu, q) : std::numeric_limits<double>::infinity();
  if (rho > 1.0 + kStabilityTolerance)
    throw StabilityError("p_overflow: offered load rho >= 1",
                         q.arrival_rate - mu / q.slot_duration);
  return overflow_closed_form(rho, q.buffer_capacity);
}

double admission_probability(int i, double buffer_capacity) {
  if (i < 0) throw DomainError("admission_probability: state must be >= 0");
  const double below = poisson_tail(i, buffer_capacity);
  if (below == 0.0) return 0.0;
  return poisson_tail(i + 1, buffer_capacity) / below;
}

std::vector<double> state_distribution(double mu, const QueueParams &q, int max_states) {
  if (max_states < 1) throw DomainError("state_distribution: max_states must be >= 1");
  const double rho = offered_load(mu, q);
  if (!(rho < 1.0))
    throw StabilityError("state_distribution: offered load rho >= 1",
                         q.arrival_rate - mu / q.slot_duration);

  const double gap = 1.0 - rho;
  const double capacity = q.buffer_capacity;
  const double decay = std::exp(-capacity * gap);
  const double p0 = gap / (-std::expm1(-capacity * gap) + gap * decay);

  std::vector<double> states;
  double power = 1.0; // rho^i
  for (int i = 0; i < max_states; ++i) {
    states.push_back(power * poisson_tail(i, capacity) * p0);
    power *= rho;
    if (p0 * power / gap < 1e-12) break;
  }
  return states;
}

} // namespace uavq
