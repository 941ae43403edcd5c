#pragma once

// Parameter sweeps over a base scenario and the built-in figure presets.

#include "uavq/scenario.hpp"
#include "uavq/throughput.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uavq {

enum class SweepVariable {
  BetaSource,           // "beta_n": threshold of the source node
  BetaInterferers,      // "beta_m": threshold of every interferer
  InterfererCount,      // "interferer_count": keep the first k interferers
  GammaTh,              // "gamma_th"
  SlotDuration,         // "slot_duration", seconds
  InterfererPowerRange, // "interferer_power_range": lower end of [v, v + 0.5] W
};

std::string_view to_string(SweepVariable variable);
std::optional<SweepVariable> parse_sweep_variable(std::string_view text);

struct SweepAxis {
  SweepVariable variable = SweepVariable::BetaSource;
  std::vector<double> values; // non-empty, strictly increasing
};

struct SweepSpec {
  SweepAxis axis;
  std::optional<SweepAxis> series; // outer loop, one curve per value
  ThroughputMode mode = ThroughputMode::Exact;

  /// Throws ValidationError.
  void validate() const;
};

/// Width of the uniform power range selected by InterfererPowerRange.
inline constexpr double kPowerRangeWidth = 0.5;

/// Apply one sweep coordinate to a copy of the base scenario.
/// The interferer power range uses fixed per-node unit draws seeded by the
/// scenario's placement seed, so every range reuses the same quantiles.
void apply_sweep_value(Scenario &scenario, SweepVariable variable, double value);

/// Evaluate every point (series-major, then axis order) and return one row per
/// point. Columns: [series variable], axis variable, p_delay, p_overflow,
/// p_queue_drop, p_error, p_loss, throughput, feasible. A point whose source
/// threshold is above its upper bound is reported with feasible = 0,
/// p_delay = 1 and throughput = 0 rather than aborting the sweep.
ResultTable run_sweep(const Scenario &base, const SweepSpec &spec);

struct Preset {
  std::string name;
  std::string description;
  Scenario scenario;
  SweepSpec sweep;
};

/// "fig2", "fig3", "fig4" or "fig5"; throws ValidationError otherwise.
Preset make_preset(std::string_view name);
std::vector<std::string> preset_names();

} // namespace uavq
