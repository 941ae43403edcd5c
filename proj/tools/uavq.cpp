// Command-line driver: evaluate, sweep, simulate, optimize.
//
// Exit codes: 0 success, 1 I/O or usage error, 2 infeasible policy (a queue
// outside its stability region).

#include "uavq/errors.hpp"
#include "uavq/log.hpp"
#include "uavq/scenario.hpp"
#include "uavq/simulator.hpp"
#include "uavq/sweep.hpp"
#include "uavq/throughput.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace uavq;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string scenario_path;
  std::string preset;
  std::string out_path;
  std::vector<std::string> betas;
  bool exact = false;
  bool approx = false;

  ThroughputMode mode() const { return approx ? ThroughputMode::Approximate : ThroughputMode::Exact; }
};

void add_common(CLI::App &cmd, CommonOptions &o, bool with_beta = true) {
  cmd.add_option("--scenario", o.scenario_path, "Scenario document (JSON) to load")
      ->check(CLI::ExistingFile);
  cmd.add_option("--preset", o.preset,
                 "Built-in figure setup: fig2, fig3, fig4 or fig5 (scenario and sweep axes)")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5"}));
  cmd.add_option("--out", o.out_path, "Write the results table (CSV) to this path");
  if (with_beta)
    cmd.add_option("--beta", o.betas,
                   "Threshold override NODE=VALUE; NODE is a node id or 'interferers' for every "
                   "non-source node (repeatable)")
        ->take_all();
  auto *exact = cmd.add_flag("--exact", o.exact,
                             "Throughput as lambda (1 - P_loss), the exact composition (default)");
  auto *approx = cmd.add_flag("--approx", o.approx,
                              "Throughput as lambda (1 - P_dly - P_ov - P_err), cross terms dropped");
  exact->excludes(approx);
}

Scenario resolve_scenario(const CommonOptions &o) {
  if (!o.scenario_path.empty()) return load_scenario_file(o.scenario_path);
  if (!o.preset.empty()) return make_preset(o.preset).scenario;
  throw UsageError("one of --scenario or --preset is required");
}

double parse_double(const std::string &text, const std::string &what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception &) {
    throw UsageError(what + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw UsageError(what + ": '" + text + "' is not a number");
  return value;
}

PolicyVector resolve_policy(const Scenario &scenario, const std::vector<std::string> &overrides) {
  PolicyVector policy = policy_of(scenario);
  for (const auto &item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("--beta expects NODE=VALUE, got '" + item + "'");
    const std::string node = item.substr(0, eq);
    const double value = parse_double(item.substr(eq + 1), "--beta " + node);
    if (!(value >= 0.0)) throw UsageError("--beta " + node + ": threshold must be >= 0");
    if (node == "interferers") {
      const auto src = scenario.source_index();
      for (std::size_t j = 0; j < policy.betas.size(); ++j)
        if (j != src) policy.betas[j] = value;
      continue;
    }
    std::size_t index = 0;
    try {
      index = scenario.index_of(node);
    } catch (const ValidationError &) {
      throw UsageError("--beta: no node with id '" + node + "'");
    }
    policy.betas[index] = value;
  }
  return policy;
}

// "a,b,c" or "lo:hi:count".
std::vector<double> parse_values(const std::string &text, const std::string &what) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw UsageError(what + ": range must be lo:hi:count");
    const double lo = parse_double(parts[0], what);
    const double hi = parse_double(parts[1], what);
    const double count = parse_double(parts[2], what);
    if (count < 1 || count != static_cast<int>(count))
      throw UsageError(what + ": count must be a positive integer");
    const int n = static_cast<int>(count);
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return out;
  }
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(parse_double(part, what));
  return out;
}

void emit_table(const ResultTable &table, const std::string &out_path, bool echo) {
  if (!out_path.empty()) write_results(table, std::filesystem::path(out_path));
  if (echo) write_results(table, std::cout);
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateOptions {
  CommonOptions common;
  std::string node;
};

int cmd_evaluate(const EvaluateOptions &o) {
  const Scenario scenario = resolve_scenario(o.common);
  const PolicyVector policy = resolve_policy(scenario, o.common.betas);
  const std::size_t index = o.node.empty() ? scenario.source_index() : scenario.index_of(o.node);
  const auto r = evaluate_node(scenario, policy, index, o.common.mode());

  const auto &id = scenario.nodes[index].id;
  std::cout << "node       " << id << "\n"
            << "beta       " << format_number(policy.betas[index]) << "\n"
            << "p_delay    " << format_number(r.p_delay) << "\n"
            << "p_overflow " << format_number(r.p_overflow) << "\n"
            << "p_error    " << format_number(r.p_error) << "\n"
            << "p_loss     " << format_number(r.p_loss) << "\n"
            << "throughput " << format_number(r.throughput) << "\n";

  ResultTable table;
  table.columns = {"node", "beta", "p_delay", "p_overflow", "p_error", "p_loss", "throughput"};
  table.add_row({id, policy.betas[index], r.p_delay, r.p_overflow, r.p_error, r.p_loss,
                 r.throughput});
  emit_table(table, o.common.out_path, false);
  if (r.p_delay >= 1.0) {
    // rho = 1: the queue is only marginally stable and every packet is late.
    std::cerr << "infeasible: node '" << id << "' is at its upper threshold bound "
              << format_number(beta_upper(make_context(scenario, policy, index)))
              << " (p_delay = 1)\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

// --- sweep ------------------------------------------------------------------

struct SweepOptions {
  CommonOptions common;
  std::string axis;
  std::string values;
  std::string series;
  std::string series_values;
};

SweepAxis make_axis(const std::string &name, const std::string &values, const std::string &flag) {
  const auto variable = parse_sweep_variable(name);
  if (!variable)
    throw UsageError(flag + ": unknown sweep variable '" + name +
                     "' (beta_n, beta_m, interferer_count, gamma_th, slot_duration, "
                     "interferer_power_range)");
  if (values.empty()) throw UsageError(flag + " needs values");
  return {*variable, parse_values(values, flag)};
}

int cmd_sweep(const SweepOptions &o) {
  Scenario scenario;
  SweepSpec spec;
  if (!o.common.preset.empty()) {
    auto preset = make_preset(o.common.preset);
    scenario = std::move(preset.scenario);
    spec = preset.sweep;
  }
  if (!o.common.scenario_path.empty()) scenario = load_scenario_file(o.common.scenario_path);
  if (o.common.preset.empty() && o.common.scenario_path.empty())
    throw UsageError("one of --scenario or --preset is required");

  if (!o.axis.empty() || !o.values.empty()) {
    if (o.axis.empty() && o.common.preset.empty()) throw UsageError("--values needs --axis");
    const std::string name = o.axis.empty() ? std::string(to_string(spec.axis.variable)) : o.axis;
    const std::string values = o.values;
    if (values.empty()) throw UsageError("--axis needs --values");
    spec.axis = make_axis(name, values, "--axis");
    if (o.common.preset.empty() || !o.axis.empty()) spec.series.reset();
  } else if (o.common.preset.empty()) {
    throw UsageError("--axis and --values are required without --preset");
  }
  if (!o.series.empty()) spec.series = make_axis(o.series, o.series_values, "--series");
  else if (!o.series_values.empty()) throw UsageError("--series-values needs --series");
  spec.mode = o.common.mode();

  // Policy overrides become part of the base scenario.
  const PolicyVector policy = resolve_policy(scenario, o.common.betas);
  for (std::size_t j = 0; j < scenario.nodes.size(); ++j) scenario.nodes[j].beta = policy.betas[j];

  const ResultTable table = run_sweep(scenario, spec);
  emit_table(table, o.common.out_path, o.common.out_path.empty());
  if (!o.common.out_path.empty())
    std::cout << "wrote " << table.rows.size() << " rows to " << o.common.out_path << "\n";
  return kExitOk;
}

// --- simulate ---------------------------------------------------------------

struct SimulateOptions {
  CommonOptions common;
  SimConfig cfg;
};

int cmd_simulate(const SimulateOptions &o) {
  const Scenario scenario = resolve_scenario(o.common);
  const PolicyVector policy = resolve_policy(scenario, o.common.betas);
  const auto analytic = evaluate(scenario, policy, o.common.mode());
  const SimResult sim = run(scenario, policy, o.cfg);

  const double analytic_queue_drop =
      analytic.p_overflow + (1.0 - analytic.p_overflow) * analytic.p_delay;
  struct Line {
    const char *metric;
    double analytic;
    Estimate empirical;
  };
  const Line lines[] = {
      {"p_delay", analytic.p_delay, sim.p_delay},
      {"p_overflow", analytic.p_overflow, sim.p_overflow},
      {"p_queue_drop", analytic_queue_drop, sim.p_queue_drop},
      {"p_error", analytic.p_error, sim.p_error},
      {"throughput", analytic.throughput, sim.throughput},
  };

  ResultTable table;
  table.columns = {"metric", "analytic", "empirical", "halfwidth", "gap"};
  std::printf("%-13s %14s %14s %12s %12s\n", "metric", "analytic", "empirical", "halfwidth",
              "gap");
  for (const auto &l : lines) {
    const double gap = std::abs(l.analytic - l.empirical.value);
    std::printf("%-13s %14s %14s %12s %12s\n", l.metric, format_number(l.analytic).c_str(),
                format_number(l.empirical.value).c_str(),
                format_number(l.empirical.halfwidth).c_str(), format_number(gap).c_str());
    table.add_row({std::string(l.metric), l.analytic, l.empirical.value, l.empirical.halfwidth, gap});
  }
  const auto &c = sim.counts;
  std::printf("arrivals %lld delivered %lld delay_drops %lld overflow_drops %lld error_drops %lld "
              "queued %lld\n",
              static_cast<long long>(c.arrivals), static_cast<long long>(c.delivered),
              static_cast<long long>(c.dropped_delay), static_cast<long long>(c.dropped_overflow),
              static_cast<long long>(c.dropped_error), static_cast<long long>(c.queued_at_end));
  emit_table(table, o.common.out_path, false);
  return kExitOk;
}

// --- optimize ---------------------------------------------------------------

struct OptimizeOptions {
  CommonOptions common;
  JacobiOptions jacobi;
  std::string objective = "own";
};

int cmd_optimize(OptimizeOptions o) {
  const Scenario scenario = resolve_scenario(o.common);
  const PolicyVector initial = resolve_policy(scenario, o.common.betas);
  o.jacobi.mode = o.common.mode();
  o.jacobi.objective = o.objective == "sum" ? Objective::SumThroughput : Objective::OwnThroughput;
  const auto result = jacobi_best_response(scenario, initial, o.jacobi);

  std::cout << "status     " << (result.converged ? "converged" : "not converged") << "\n"
            << "iterations " << result.iterations << "\n";
  std::printf("%-12s %14s %14s\n", "node", "beta", "throughput");
  for (std::size_t j = 0; j < scenario.nodes.size(); ++j)
    std::printf("%-12s %14s %14s\n", scenario.nodes[j].id.c_str(),
                format_number(result.policy.betas[j]).c_str(),
                format_number(result.throughputs[j]).c_str());

  ResultTable trace;
  trace.columns = {"iteration", "node", "beta", "throughput"};
  for (const auto &row : result.trace)
    trace.add_row({static_cast<double>(row.iteration), scenario.nodes[row.node].id, row.beta,
                   row.throughput});
  emit_table(trace, o.common.out_path, false);
  return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Throughput model of a UAV link in unlicensed spectrum: analytic loss "
               "probabilities, figure sweeps, Monte Carlo validation and threshold optimisation.\n"
               "Set UAVQ_LOG=error|warn|info|debug to control log verbosity on stderr."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "uavq 1.0.0");

  EvaluateOptions eval_opts;
  auto *eval_cmd = app.add_subcommand("evaluate", "Print the loss breakdown of one node");
  add_common(*eval_cmd, eval_opts.common);
  eval_cmd->add_option("--node", eval_opts.node, "Node id to evaluate (default: the source)");

  SweepOptions sweep_opts;
  auto *sweep_cmd = app.add_subcommand("sweep", "Evaluate the source over a parameter grid");
  add_common(*sweep_cmd, sweep_opts.common);
  sweep_cmd->add_option("--axis", sweep_opts.axis,
                        "Swept variable: beta_n, beta_m, interferer_count, gamma_th, "
                        "slot_duration or interferer_power_range");
  sweep_cmd->add_option("--values", sweep_opts.values,
                        "Axis values as a,b,c or lo:hi:count (strictly increasing)");
  sweep_cmd->add_option("--series", sweep_opts.series,
                        "Optional outer variable, one curve per value");
  sweep_cmd->add_option("--series-values", sweep_opts.series_values,
                        "Series values as a,b,c or lo:hi:count");

  SimulateOptions sim_opts;
  auto *sim_cmd =
      app.add_subcommand("simulate", "Run the slot-level Monte Carlo model next to the analytics");
  add_common(*sim_cmd, sim_opts.common);
  sim_cmd->add_option("--seed", sim_opts.cfg.seed, "Master random seed")->capture_default_str();
  sim_cmd->add_option("--slots", sim_opts.cfg.num_slots, "Slots per replication, warm-up included")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--warmup", sim_opts.cfg.warmup_slots, "Warm-up slots excluded from statistics")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--replications", sim_opts.cfg.replication_count,
                      "Independent replications (confidence intervals across them)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--always-collide", sim_opts.cfg.always_collide,
                    "Every transmitting interferer hits the source's channel");
  sim_cmd->add_flag("--saturated-interferers", sim_opts.cfg.saturated_interferers,
                    "Interferers transmit whenever their fading clears beta, queue or not");
  sim_cmd->add_flag("--silence-interferers", sim_opts.cfg.silence_interferers,
                    "Interferers never transmit");

  OptimizeOptions opt_opts;
  auto *opt_cmd =
      app.add_subcommand("optimize", "Jacobi best-response iteration over all node thresholds");
  add_common(*opt_cmd, opt_opts.common);
  opt_cmd->add_option("--grid", opt_opts.jacobi.grid_size, "Candidate thresholds per node")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  opt_cmd->add_option("--tol", opt_opts.jacobi.tol,
                      "Stop when no threshold moves by more than this")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  opt_cmd->add_option("--max-iters", opt_opts.jacobi.max_iters, "Iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  opt_cmd->add_option("--objective", opt_opts.objective,
                      "own: each node maximises its throughput; sum: the total")
      ->capture_default_str()
      ->check(CLI::IsMember({"own", "sum"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*eval_cmd) return cmd_evaluate(eval_opts);
    if (*sweep_cmd) return cmd_sweep(sweep_opts);
    if (*sim_cmd) return cmd_simulate(sim_opts);
    if (*opt_cmd) return cmd_optimize(opt_opts);
  } catch (const StabilityError &e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
