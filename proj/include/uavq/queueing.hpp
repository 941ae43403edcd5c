#pragma once

// Transmit-queue model: geometric slot counts approximated by an exponential
// service law, M/M/1 waiting-time tail for the delay drop, and the
// finite-buffer Markov chain for overflow.

#include <vector>

namespace uavq {

struct QueueParams {
  double arrival_rate = 80.0;      // packets/s
  double slot_duration = 2e-3;     // s
  double delay_threshold = 40e-3;  // s
  double buffer_capacity = 100.0;  // B * eta, in mean packet lengths

  /// Offered load per slot, lambda * T_slt.
  double slot_load() const { return arrival_rate * slot_duration; }
  void validate() const;
};

/// Relative slack on the stability boundary; loads within it count as rho = 1.
inline constexpr double kStabilityTolerance = 1e-9;

/// Pb(v = k) = (1 - phi)^{k-1} phi.
double slots_to_transmit_pmf(double phi, int k);

/// Rate of the exponential law matched to the geometric slot count.
double service_rate(double phi);

/// lambda * T_slt / mu.
double offered_load(double mu, const QueueParams &q);

/// Pb(T > T_th) = exp(-(mu / T_slt - lambda) T_th).
/// Throws StabilityError when mu / T_slt < lambda.
double p_delay(double mu, const QueueParams &q);

/// Closed-form buffer overflow probability of the finite-buffer chain.
/// Throws StabilityError when rho > 1.
double p_overflow(double mu, const QueueParams &q);

/// P_{i,i+1}: probability that a buffer holding i packets still admits one more.
double admission_probability(int i, double buffer_capacity);

/// Stationary distribution P_0, P_1, ... truncated once the remaining mass is
/// below 1e-12 (or at max_states entries).
std::vector<double> state_distribution(double mu, const QueueParams &q, int max_states = 100000);

} // namespace uavq
