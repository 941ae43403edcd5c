#pragma once

// Overall packet loss and expected throughput of a node, the feasible range
// of its fading threshold, analytic derivatives of the loss in that threshold,
// and Jacobi (simultaneous) best-response iteration over all nodes.

#include "uavq/interference.hpp"
#include "uavq/queueing.hpp"
#include "uavq/scenario.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavq {

struct LossComponents {
  double p_delay = 0.0;
  double p_overflow = 0.0;
  double p_error = 0.0;
};

struct LossBreakdown {
  double p_delay = 0.0;
  double p_overflow = 0.0;
  double p_error = 0.0;
  double p_loss = 0.0;
  double throughput = 0.0; // packets/s
};

struct BetaBounds {
  double lower = 0.0;
  double upper = 0.0;
};

enum class ThroughputMode {
  Exact,       // lambda (1 - P_loss)
  Approximate, // lambda (1 - P_dly - P_ov - P_err), cross terms dropped
};

/// P_ov + (1 - P_ov) P_dly + (1 - P_ov)(1 - P_dly) P_err.
double compose_loss(double p_ov, double p_dly, double p_err);

double expected_throughput(double lambda, const LossComponents &loss,
                           ThroughputMode mode = ThroughputMode::Exact);

/// Largest beta keeping the queue stable (phi(beta) = lambda * T_slt).
/// Closed form for Rayleigh, bracketed root of Q_1 for Rician.
/// Throws StabilityError when lambda * T_slt >= 1.
double beta_upper(const FadingModel &model, const QueueParams &q, int num_channels);

/// Erf surrogate of the Rician bound, valid for large b.
double beta_upper_erf(double b, const QueueParams &q, int num_channels);

/// Everything the loss of one node depends on, with the interference law of
/// the other nodes already fitted.
struct NodeContext {
  std::string node_id;
  LinkChannel link;
  double transmit_power = 1.0;
  QueueParams queue;
  int num_channels = 1;
  double gamma_th = 1.0;
  double noise_power = 0.0;
  ErrorMode error_mode = ErrorMode::Conditional;
  InterferenceLaw interference = ZeroInterference{};
};

/// Context for node `index`, with every other node acting as an interferer
/// at the policy's thresholds.
NodeContext make_context(const Scenario &scenario, const PolicyVector &policy, std::size_t index);

/// Loss breakdown of the context's node at threshold beta.
/// Throws StabilityError (naming the node) when beta is above its upper bound.
LossBreakdown evaluate(const NodeContext &ctx, double beta,
                       ThroughputMode mode = ThroughputMode::Exact);

LossBreakdown evaluate(const Scenario &scenario, const PolicyVector &policy,
                       ThroughputMode mode = ThroughputMode::Exact);
LossBreakdown evaluate_node(const Scenario &scenario, const PolicyVector &policy,
                            std::size_t index, ThroughputMode mode = ThroughputMode::Exact);

double beta_upper(const NodeContext &ctx);

struct LossDerivative {
  double first = 0.0;
  double second = 0.0;
  double delay_first = 0.0;
  double delay_second = 0.0;
  double error_first = 0.0;
  double error_second = 0.0;
};

/// Analytic first and second derivatives in beta of P_dly + P_err, the loss
/// with the overflow term left out. Requires 0 < beta < beta_upper.
LossDerivative loss_derivative(const NodeContext &ctx, double beta);

/// P_dly + P_err evaluated directly; the function loss_derivative differentiates.
double lower_bound_objective(const NodeContext &ctx, double beta,
                             const specfun::QuadratureSpec &spec = {});

/// Raised when the second derivative never turns positive below the upper bound.
class LowerBoundAbsent : public std::runtime_error {
public:
  LowerBoundAbsent(const std::string &what, double min_second, double max_second)
      : std::runtime_error(what), min_second_(min_second), max_second_(max_second) {}
  double min_second() const noexcept { return min_second_; }
  double max_second() const noexcept { return max_second_; }

private:
  double min_second_;
  double max_second_;
};

/// Smallest beta at which the loss becomes convex, found by scanning
/// (0, beta_upper] on `grid` points and bisecting the first sign change of the
/// second derivative to 1e-6. Returns 0 when it is convex from the start.
double beta_lower(const NodeContext &ctx, int grid = 512);

BetaBounds beta_bounds(const NodeContext &ctx, int grid = 512);

enum class Objective {
  OwnThroughput, // each node maximises its own throughput
  SumThroughput, // each node maximises the total throughput of all nodes
};

struct JacobiOptions {
  int grid_size = 64;
  double tol = 1e-9;
  int max_iters = 50;
  Objective objective = Objective::OwnThroughput;
  ThroughputMode mode = ThroughputMode::Exact;
};

struct JacobiTraceRow {
  int iteration = 0;
  std::size_t node = 0;
  double beta = 0.0;
  double throughput = 0.0; // of this node at the iterate's policy
};

struct JacobiResult {
  PolicyVector policy;
  std::vector<JacobiTraceRow> trace;
  std::vector<double> throughputs;
  int iterations = 0;
  bool converged = false;
};

/// Candidate thresholds of node i: grid_size points evenly spaced on
/// [0, beta_upper).
std::vector<double> beta_grid(const Scenario &scenario, std::size_t index, int grid_size);

/// Best response of node `index` against `policy`: argmax over its grid (and
/// its current threshold), ties broken toward the smaller beta.
double best_response(const Scenario &scenario, const PolicyVector &policy, std::size_t index,
                     const JacobiOptions &options);

JacobiResult jacobi_best_response(const Scenario &scenario, const PolicyVector &initial,
                                  const JacobiOptions &options = {});

} // namespace uavq
