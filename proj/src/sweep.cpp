#include "uavq/sweep.hpp"

#include "uavq/errors.hpp"
#include "uavq/log.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace uavq {

namespace {

struct VariableName {
  SweepVariable variable;
  const char *name;
};

constexpr VariableName kVariableNames[] = {
    {SweepVariable::BetaSource, "beta_n"},
    {SweepVariable::BetaInterferers, "beta_m"},
    {SweepVariable::InterfererCount, "interferer_count"},
    {SweepVariable::GammaTh, "gamma_th"},
    {SweepVariable::SlotDuration, "slot_duration"},
    {SweepVariable::InterfererPowerRange, "interferer_power_range"},
};

// Salt that separates the power-quantile stream from the placement stream.
constexpr std::uint64_t kPowerStreamSalt = 0x70f3a1c6b2d94e85ULL;

void validate_axis(const SweepAxis &axis, const std::string &field) {
  if (axis.values.empty()) throw ValidationError(field + ".values", "must not be empty");
  for (std::size_t i = 0; i < axis.values.size(); ++i) {
    if (!std::isfinite(axis.values[i])) throw ValidationError(field + ".values", "must be finite");
    if (i > 0 && !(axis.values[i] > axis.values[i - 1]))
      throw ValidationError(field + ".values", "must be strictly increasing");
  }
  if (axis.variable == SweepVariable::InterfererCount)
    for (double v : axis.values)
      if (v < 0.0 || v != std::floor(v))
        throw ValidationError(field + ".values", "interferer counts must be non-negative integers");
}

LossBreakdown evaluate_point(const Scenario &scenario, ThroughputMode mode, bool &feasible) {
  const PolicyVector policy = policy_of(scenario);
  const std::size_t src = scenario.source_index();
  const NodeContext ctx = make_context(scenario, policy, src);
  const double beta = policy.betas[src];
  try {
    feasible = true;
    return evaluate(ctx, beta, mode);
  } catch (const StabilityError &) {
    feasible = false;
  }
  // Unstable queue: every admitted packet eventually waits too long.
  LossBreakdown out;
  const double phi = transmit_prob(ctx.link.fading, beta, ctx.num_channels);
  const double rho = phi > 0.0 ? ctx.queue.slot_load() / phi : std::numeric_limits<double>::infinity();
  out.p_delay = 1.0;
  out.p_overflow = std::isinf(rho) ? 1.0 : std::max(0.0, 1.0 - 1.0 / rho);
  out.p_error = p_error(ctx.link, ctx.transmit_power, beta, ctx.interference, ctx.noise_power,
                        ctx.gamma_th, ctx.error_mode);
  out.p_loss = 1.0;
  out.throughput = 0.0;
  return out;
}

} // namespace

std::string_view to_string(SweepVariable variable) {
  for (const auto &entry : kVariableNames)
    if (entry.variable == variable) return entry.name;
  return "unknown";
}

std::optional<SweepVariable> parse_sweep_variable(std::string_view text) {
  for (const auto &entry : kVariableNames)
    if (text == entry.name) return entry.variable;
  return std::nullopt;
}

void SweepSpec::validate() const {
  validate_axis(axis, "sweep.axis");
  if (series) {
    validate_axis(*series, "sweep.series");
    if (series->variable == axis.variable)
      throw ValidationError("sweep.series", "must use a different variable than the axis");
  }
}

void apply_sweep_value(Scenario &scenario, SweepVariable variable, double value) {
  const std::size_t src = scenario.source_index();
  switch (variable) {
  case SweepVariable::BetaSource:
    scenario.nodes[src].beta = value;
    break;
  case SweepVariable::BetaInterferers:
    for (std::size_t j = 0; j < scenario.nodes.size(); ++j)
      if (j != src) scenario.nodes[j].beta = value;
    break;
  case SweepVariable::InterfererCount: {
    const auto keep = static_cast<std::size_t>(value);
    if (keep + 1 > scenario.nodes.size())
      throw ValidationError("interferer_count", "scenario has only " +
                                                    std::to_string(scenario.nodes.size() - 1) +
                                                    " interferers");
    std::vector<Node> nodes;
    std::size_t kept = 0;
    for (std::size_t j = 0; j < scenario.nodes.size(); ++j) {
      if (j == src || kept++ < keep) nodes.push_back(scenario.nodes[j]);
    }
    scenario.nodes = std::move(nodes);
    break;
  }
  case SweepVariable::GammaTh:
    scenario.gamma_th = value;
    break;
  case SweepVariable::SlotDuration:
    scenario.set_slot_duration(value);
    break;
  case SweepVariable::InterfererPowerRange: {
    NodeSampler quantiles(scenario.placement_seed.value_or(kDefaultPlacementSeed) ^ kPowerStreamSalt,
                          scenario.area);
    for (std::size_t j = 0; j < scenario.nodes.size(); ++j) {
      const double u = quantiles.uniform(0.0, 1.0);
      if (j != src) scenario.nodes[j].transmit_power = value + kPowerRangeWidth * u;
    }
    break;
  }
  }
  scenario.validate();
}

ResultTable run_sweep(const Scenario &base, const SweepSpec &spec) {
  spec.validate();
  base.validate();

  struct Point {
    double series = 0.0;
    double axis = 0.0;
  };
  std::vector<Point> points;
  const std::vector<double> series_values =
      spec.series ? spec.series->values : std::vector<double>{0.0};
  for (double s : series_values)
    for (double a : spec.axis.values) points.push_back({s, a});

  // Resolve every scenario first so configuration errors surface before any work.
  std::vector<Scenario> scenarios;
  scenarios.reserve(points.size());
  for (const auto &p : points) {
    Scenario s = base;
    if (spec.series) apply_sweep_value(s, spec.series->variable, p.series);
    apply_sweep_value(s, spec.axis.variable, p.axis);
    scenarios.push_back(std::move(s));
  }

  std::vector<LossBreakdown> results(points.size());
  std::vector<char> feasible(points.size(), 1);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        bool ok = true;
        results[i] = evaluate_point(scenarios[i], spec.mode, ok);
        feasible[i] = ok;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(
      1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(points.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ResultTable table;
  if (spec.series) table.columns.emplace_back(to_string(spec.series->variable));
  table.columns.emplace_back(to_string(spec.axis.variable));
  for (const char *c : {"p_delay", "p_overflow", "p_queue_drop", "p_error", "p_loss", "throughput",
                        "feasible"})
    table.columns.emplace_back(c);

  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto &r = results[i];
    std::vector<Cell> row;
    if (spec.series) row.emplace_back(points[i].series);
    row.emplace_back(points[i].axis);
    row.emplace_back(r.p_delay);
    row.emplace_back(r.p_overflow);
    row.emplace_back(r.p_overflow + (1.0 - r.p_overflow) * r.p_delay);
    row.emplace_back(r.p_error);
    row.emplace_back(r.p_loss);
    row.emplace_back(r.throughput);
    row.emplace_back(feasible[i] ? 1.0 : 0.0);
    table.add_row(std::move(row));
  }
  log_info("sweep: evaluated " + std::to_string(points.size()) + " points");
  return table;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

Preset fig2() {
  Preset p;
  p.name = "fig2";
  p.description = "throughput vs interferer threshold beta_m, one curve per source threshold "
                  "beta_n; 10 Rician nodes";
  p.scenario = load_scenario(R"({
    "schema_version": 1,
    "nodes": [
      {"id": "source", "role": "source", "fading": "rician",
       "position": {"x": 0, "y": 0}, "transmit_power": 0.75, "arrival_rate": 120,
       "delay_threshold": 0.03, "buffer_capacity": 100}
    ],
    "interferers": {"count": 9, "template": {"fading": "rician"}}
  })");
  p.sweep.series = SweepAxis{SweepVariable::BetaSource, linspace(3.0, 5.7, 55)};
  p.sweep.axis = SweepAxis{SweepVariable::BetaInterferers, linspace(0.0, 7.0, 15)};
  return p;
}

Preset fig3() {
  Preset p;
  p.name = "fig3";
  p.description = "throughput vs number of interferers (first two Rician, the rest Rayleigh), one "
                  "curve per interferer power range";
  p.scenario = load_scenario(R"({
    "schema_version": 1,
    "nodes": [
      {"id": "source", "role": "source", "fading": "rician", "transmit_power": 0.5,
       "arrival_rate": 80, "beta": 5.1},
      {"id": "i1", "fading": "rician", "arrival_rate": 80, "beta": 5.1},
      {"id": "i2", "fading": "rician", "arrival_rate": 80, "beta": 5.1},
      {"id": "i3", "fading": "rayleigh", "arrival_rate": 80, "beta": 1.55},
      {"id": "i4", "fading": "rayleigh", "arrival_rate": 80, "beta": 1.55},
      {"id": "i5", "fading": "rayleigh", "arrival_rate": 80, "beta": 1.55},
      {"id": "i6", "fading": "rayleigh", "arrival_rate": 80, "beta": 1.55},
      {"id": "i7", "fading": "rayleigh", "arrival_rate": 80, "beta": 1.55},
      {"id": "i8", "fading": "rayleigh", "arrival_rate": 80, "beta": 1.55}
    ]
  })");
  p.sweep.series = SweepAxis{SweepVariable::InterfererPowerRange, {0.5, 1.0, 1.5}};
  p.sweep.axis = SweepAxis{SweepVariable::InterfererCount, linspace(0.0, 8.0, 9)};
  return p;
}

Preset fig4() {
  Preset p;
  p.name = "fig4";
  p.description = "transmission error probability vs number of interferers, one curve per SINR "
                  "threshold; all nodes Rician";
  p.scenario = load_scenario(R"({
    "schema_version": 1,
    "nodes": [
      {"id": "source", "role": "source", "fading": "rician", "beta": 5.1}
    ],
    "interferers": {"count": 9, "template": {"fading": "rician", "beta": 5.1}}
  })");
  p.sweep.series = SweepAxis{SweepVariable::GammaTh, {2.0, 4.0, 8.0}};
  p.sweep.axis = SweepAxis{SweepVariable::InterfererCount, linspace(1.0, 9.0, 9)};
  return p;
}

Preset fig5() {
  Preset p;
  p.name = "fig5";
  p.description = "queue drop probability vs slot duration, one curve per source threshold; "
                  "Rician main link";
  p.scenario = load_scenario(R"({
    "schema_version": 1,
    "nodes": [
      {"id": "source", "role": "source", "fading": "rician",
       "position": {"x": 0, "y": 0}, "transmit_power": 0.75, "arrival_rate": 120,
       "delay_threshold": 0.03, "buffer_capacity": 100}
    ],
    "interferers": {"count": 9, "template": {"fading": "rician", "beta": 5.1}}
  })");
  p.sweep.series = SweepAxis{SweepVariable::BetaSource, {2.0, 4.0, 5.0, 5.2, 5.35}};
  p.sweep.axis = SweepAxis{SweepVariable::SlotDuration, linspace(0.5e-3, 4e-3, 15)};
  return p;
}

} // namespace

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4", "fig5"}; }

Preset make_preset(std::string_view name) {
  if (name == "fig2") return fig2();
  if (name == "fig3") return fig3();
  if (name == "fig4") return fig4();
  if (name == "fig5") return fig5();
  throw ValidationError("preset", "unknown preset '" + std::string(name) +
                                      "', expected fig2, fig3, fig4 or fig5");
}

} // namespace uavq
