#pragma once

// Slot-level Monte Carlo model of the whole network: every node keeps a real
// queue, draws |F| fading values per slot, and the source's transmissions
// succeed or fail on the exact SINR of that slot.

#include "uavq/scenario.hpp"

#include <cstdint>
#include <vector>

namespace uavq {

struct SimConfig {
  std::int64_t num_slots = 200000;
  std::uint64_t seed = 1;
  std::int64_t warmup_slots = 2000;
  int replication_count = 4;
  /// Every transmitting interferer hits the source's channel, instead of only
  /// those whose best channel coincides with it.
  bool always_collide = false;
  /// Interferers never transmit.
  bool silence_interferers = false;
  /// Interferers transmit whenever their best fading clears beta, even with
  /// an empty queue (the analytic interference model's assumption).
  bool saturated_interferers = false;

  /// Throws ValidationError.
  void validate() const;
};

/// Event tallies of the source node, restricted to packets that arrived
/// after the warm-up period.
struct SimCounts {
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped_delay = 0;
  std::int64_t dropped_overflow = 0;
  std::int64_t dropped_error = 0;
  std::int64_t queued_at_end = 0;
  std::int64_t measured_slots = 0;

  SimCounts &operator+=(const SimCounts &other);
};

struct Estimate {
  double value = 0.0;
  double halfwidth = 0.0; // 95% normal-approximation interval across replications
};

struct SimResult {
  Estimate p_delay;      // delay drops / packets that reached the head of line and left
  Estimate p_overflow;   // overflow drops / arrivals
  Estimate p_error;      // SINR failures / transmissions
  Estimate p_queue_drop; // (overflow + delay drops) / resolved arrivals
  Estimate throughput;   // delivered packets per second
  SimCounts counts;      // summed over replications
  std::vector<SimCounts> replications;
};

/// Independent stream seed for (replication, node), splitmix-style mixing.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t node);

/// Simulate the scenario's source under `policy`; replications are run on
/// worker threads and merged in replication order.
SimResult run(const Scenario &scenario, const PolicyVector &policy, const SimConfig &cfg);

} // namespace uavq
