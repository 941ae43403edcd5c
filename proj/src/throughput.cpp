#include "uavq/throughput.hpp"

#include "uavq/errors.hpp"
#include "uavq/specfun.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace uavq {

namespace {

void check_probability(double p, const char *name) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

// Target per-channel survival 1 - (1 - lambda T)^{1/|F|} at the stability boundary.
double boundary_survival(const QueueParams &q, int num_channels) {
  if (num_channels < 1) throw DomainError("num_channels must be >= 1");
  const double load = q.slot_load();
  if (!(load > 0.0)) throw DomainError("beta_upper: arrival load must be > 0");
  if (load >= 1.0)
    throw StabilityError("beta_upper: lambda * T_slt >= 1, no threshold gives a stable queue",
                         q.arrival_rate - 1.0 / q.slot_duration);
  return -std::expm1(std::log1p(-load) / num_channels);
}

struct FadingLocal {
  double pdf = 0.0;
  double dpdf = 0.0;
  double cdf = 0.0;
  double survival = 1.0;
};

FadingLocal fading_local(const FadingModel &model, double beta) {
  FadingLocal out;
  if (const auto *ray = std::get_if<Rayleigh>(&model)) {
    const double w = ray->omega;
    const double tail = std::exp(-beta * beta / w);
    out.pdf = 2.0 * beta / w * tail;
    out.dpdf = 2.0 / w * tail * (1.0 - 2.0 * beta * beta / w);
    out.survival = tail;
    out.cdf = -std::expm1(-beta * beta / w);
    return out;
  }
  const double b = std::get<Rician>(model).b;
  const double envelope = std::exp(-0.5 * (beta - b) * (beta - b));
  const double i0 = specfun::bessel_i0e(beta * b);
  const double i1 = specfun::bessel_i1e(beta * b);
  out.pdf = beta * envelope * i0;
  out.dpdf = envelope * ((1.0 - beta * beta) * i0 + beta * b * i1);
  out.survival = specfun::marcum_q1(b, beta);
  out.cdf = 1.0 - out.survival;
  return out;
}

LossDerivative derivative_unchecked(const NodeContext &ctx, double beta) {
  const auto local = fading_local(ctx.link.fading, beta);
  const double n = ctx.num_channels;
  const auto &q = ctx.queue;

  // Delay term: P_dly = exp(-(phi / T - lambda) T_th), with dphi/dbeta = -g.
  const double cdf_n1 = std::pow(local.cdf, n - 1.0);
  const double cdf_n2 = ctx.num_channels >= 2 ? std::pow(local.cdf, n - 2.0) : 0.0;
  const double phi = -std::expm1(n * std::log1p(-local.survival));
  const double g = n * cdf_n1 * local.pdf;
  const double dg = n * (n - 1.0) * cdf_n2 * local.pdf * local.pdf + n * cdf_n1 * local.dpdf;
  const double margin = std::max(0.0, phi / q.slot_duration - q.arrival_rate);
  const double delay = std::exp(-margin * q.delay_threshold);
  const double a = q.delay_threshold / q.slot_duration;

  LossDerivative out;
  out.delay_first = delay * a * g;
  out.delay_second = delay * (a * a * g * g + a * dg);

  // Error term: the integrand at the lower limit is f(beta) v(c beta^2 - P_N).
  const double c = ctx.transmit_power * ctx.link.path_loss_amplitude *
                   ctx.link.path_loss_amplitude / ctx.gamma_th;
  const double y = c * beta * beta - ctx.noise_power;
  const double v = interference_ccdf(ctx.interference, y);
  double dv = 0.0;
  if (std::holds_alternative<GammaFit>(ctx.interference) && y > 0.0) {
    dv = -interference_pdf(ctx.interference, y) * 2.0 * c * beta;
  }
  const double raw_first = -local.pdf * v;
  const double raw_second = -local.dpdf * v - local.pdf * dv;

  if (ctx.error_mode == ErrorMode::Raw) {
    out.error_first = raw_first;
    out.error_second = raw_second;
  } else {
    // E = R / S with S' = -f.
    const double e = p_error(ctx.link, ctx.transmit_power, beta, ctx.interference, ctx.noise_power,
                             ctx.gamma_th, ErrorMode::Conditional);
    const double s = local.survival;
    out.error_first = (raw_first + e * local.pdf) / s;
    out.error_second = (raw_second + 2.0 * out.error_first * local.pdf + e * local.dpdf) / s;
  }

  out.first = out.delay_first + out.error_first;
  out.second = out.delay_second + out.error_second;
  return out;
}

} // namespace

double compose_loss(double p_ov, double p_dly, double p_err) {
  check_probability(p_ov, "compose_loss: p_ov");
  check_probability(p_dly, "compose_loss: p_dly");
  check_probability(p_err, "compose_loss: p_err");
  const double loss = p_ov + (1.0 - p_ov) * p_dly + (1.0 - p_ov) * (1.0 - p_dly) * p_err;
  return std::clamp(loss, 0.0, 1.0);
}

double expected_throughput(double lambda, const LossComponents &loss, ThroughputMode mode) {
  if (!(lambda > 0.0)) throw DomainError("expected_throughput: lambda must be > 0");
  if (mode == ThroughputMode::Exact)
    return lambda * (1.0 - compose_loss(loss.p_overflow, loss.p_delay, loss.p_error));
  check_probability(loss.p_overflow, "expected_throughput: p_ov");
  check_probability(loss.p_delay, "expected_throughput: p_dly");
  check_probability(loss.p_error, "expected_throughput: p_err");
  return lambda * std::max(0.0, 1.0 - loss.p_delay - loss.p_overflow - loss.p_error);
}

double beta_upper(const FadingModel &model, const QueueParams &q, int num_channels) {
  validate(model);
  const double target = boundary_survival(q, num_channels);
  if (const auto *ray = std::get_if<Rayleigh>(&model))
    return std::sqrt(-ray->omega * std::log(target));

  const double b = std::get<Rician>(model).b;
  auto residual = [b, target](double beta) { return specfun::marcum_q1(b, beta) - target; };
  double hi = b + 1.0;
  while (residual(hi) > 0.0) hi = b + 2.0 * (hi - b);
  std::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      residual, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
  return 0.5 * (bracket.first + bracket.second);
}

double beta_upper_erf(double b, const QueueParams &q, int num_channels) {
  if (!(b >= 0.0)) throw DomainError("beta_upper_erf: b must be >= 0");
  const double target = boundary_survival(q, num_channels);
  // erf((b - beta) / sqrt 2) = 1 - 2 (1 - lambda T)^{1/|F|} = 2 target - 1.
  return b - std::numbers::sqrt2 * boost::math::erf_inv(2.0 * target - 1.0);
}

NodeContext make_context(const Scenario &scenario, const PolicyVector &policy, std::size_t index) {
  if (policy.betas.size() != scenario.nodes.size())
    throw DomainError("policy size does not match the number of nodes");
  if (index >= scenario.nodes.size()) throw DomainError("node index out of range");

  const Node &node = scenario.nodes[index];
  NodeContext ctx;
  ctx.node_id = node.id;
  ctx.link = scenario.link(index);
  ctx.transmit_power = node.transmit_power;
  ctx.queue = node.queue;
  ctx.num_channels = scenario.num_channels;
  ctx.gamma_th = scenario.gamma_th;
  ctx.noise_power = scenario.noise.power();
  ctx.error_mode = scenario.error_mode;

  std::vector<InterfererLink> links;
  links.reserve(scenario.nodes.size());
  for (std::size_t j = 0; j < scenario.nodes.size(); ++j) {
    if (j == index) continue;
    const auto link = scenario.link(j);
    links.push_back({scenario.nodes[j].transmit_power, link.path_loss_amplitude, link.fading,
                     policy.betas[j]});
  }
  ctx.interference = interference_law(links, scenario.num_channels);
  return ctx;
}

LossBreakdown evaluate(const NodeContext &ctx, double beta, ThroughputMode mode) {
  if (std::isnan(beta) || beta < 0.0) throw DomainError("evaluate: beta must be >= 0");
  const double phi = transmit_prob(ctx.link.fading, beta, ctx.num_channels);

  LossBreakdown out;
  try {
    if (phi == 0.0)
      throw StabilityError("node never transmits", ctx.queue.arrival_rate);
    const double mu = service_rate(phi);
    out.p_delay = p_delay(mu, ctx.queue);
    out.p_overflow = p_overflow(mu, ctx.queue);
  } catch (const StabilityError &e) {
    throw StabilityError("node '" + ctx.node_id + "': beta = " + format_number(beta) +
                             " exceeds its upper bound " +
                             format_number(uavq::beta_upper(ctx)) + " (" + e.what() + ")",
                         e.deficit(), ctx.node_id);
  }
  out.p_error = p_error(ctx.link, ctx.transmit_power, beta, ctx.interference, ctx.noise_power,
                        ctx.gamma_th, ctx.error_mode);
  out.p_loss = compose_loss(out.p_overflow, out.p_delay, out.p_error);
  out.throughput = expected_throughput(ctx.queue.arrival_rate,
                                       {out.p_delay, out.p_overflow, out.p_error}, mode);
  return out;
}

LossBreakdown evaluate_node(const Scenario &scenario, const PolicyVector &policy,
                            std::size_t index, ThroughputMode mode) {
  return evaluate(make_context(scenario, policy, index), policy.betas.at(index), mode);
}

LossBreakdown evaluate(const Scenario &scenario, const PolicyVector &policy, ThroughputMode mode) {
  return evaluate_node(scenario, policy, scenario.source_index(), mode);
}

double beta_upper(const NodeContext &ctx) {
  return beta_upper(ctx.link.fading, ctx.queue, ctx.num_channels);
}

LossDerivative loss_derivative(const NodeContext &ctx, double beta) {
  const double upper = beta_upper(ctx);
  if (!(beta > 0.0)) throw DomainError("loss_derivative: beta must be > 0");
  if (!(beta < upper))
    throw StabilityError("loss_derivative: beta = " + format_number(beta) +
                             " is at or beyond the upper bound " + format_number(upper),
                         0.0, ctx.node_id);
  return derivative_unchecked(ctx, beta);
}

double lower_bound_objective(const NodeContext &ctx, double beta,
                             const specfun::QuadratureSpec &spec) {
  const double phi = transmit_prob(ctx.link.fading, beta, ctx.num_channels);
  return p_delay(service_rate(phi), ctx.queue) +
         p_error(ctx.link, ctx.transmit_power, beta, ctx.interference, ctx.noise_power,
                 ctx.gamma_th, ctx.error_mode, spec);
}

double beta_lower(const NodeContext &ctx, int grid) {
  if (grid < 2) throw DomainError("beta_lower: grid must have at least 2 points");
  const double upper = beta_upper(ctx);
  auto second = [&](double beta) { return derivative_unchecked(ctx, beta).second; };

  double previous_beta = upper / grid;
  double previous = second(previous_beta);
  if (previous > 0.0) return 0.0;
  double lowest = previous;
  double highest = previous;

  for (int i = 2; i <= grid; ++i) {
    const double beta = upper * i / grid;
    const double value = second(beta);
    lowest = std::min(lowest, value);
    highest = std::max(highest, value);
    if (value > 0.0) {
      double lo = previous_beta;
      double hi = beta;
      while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (second(mid) > 0.0)
          hi = mid;
        else
          lo = mid;
      }
      return 0.5 * (lo + hi);
    }
    previous_beta = beta;
  }
  throw LowerBoundAbsent("beta_lower: second derivative of the loss is never positive on (0, " +
                             format_number(upper) + "]; min " + format_number(lowest) + ", max " +
                             format_number(highest),
                         lowest, highest);
}

BetaBounds beta_bounds(const NodeContext &ctx, int grid) {
  return {beta_lower(ctx, grid), beta_upper(ctx)};
}

std::vector<double> beta_grid(const Scenario &scenario, std::size_t index, int grid_size) {
  if (grid_size < 1) throw DomainError("beta_grid: grid_size must be >= 1");
  const auto &node = scenario.nodes.at(index);
  const double upper = beta_upper(scenario.link(index).fading, node.queue, scenario.num_channels);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(grid_size));
  for (int j = 0; j < grid_size; ++j) grid.push_back(upper * j / grid_size);
  return grid;
}

namespace {

double throughput_or_zero(const NodeContext &ctx, double beta, ThroughputMode mode) {
  try {
    return evaluate(ctx, beta, mode).throughput;
  } catch (const StabilityError &) {
    return 0.0;
  }
}

double total_throughput(const Scenario &scenario, const PolicyVector &policy, ThroughputMode mode) {
  double total = 0.0;
  for (std::size_t j = 0; j < scenario.nodes.size(); ++j)
    total += throughput_or_zero(make_context(scenario, policy, j), policy.betas[j], mode);
  return total;
}

} // namespace

double best_response(const Scenario &scenario, const PolicyVector &policy, std::size_t index,
                     const JacobiOptions &options) {
  auto candidates = beta_grid(scenario, index, options.grid_size);
  candidates.push_back(policy.betas.at(index));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const NodeContext ctx = make_context(scenario, policy, index);
  double best_beta = candidates.front();
  double best_value = -std::numeric_limits<double>::infinity();
  PolicyVector trial = policy;
  for (const double beta : candidates) {
    double value = 0.0;
    if (options.objective == Objective::OwnThroughput) {
      value = throughput_or_zero(ctx, beta, options.mode);
    } else {
      trial.betas[index] = beta;
      value = total_throughput(scenario, trial, options.mode);
    }
    if (value > best_value) {
      best_value = value;
      best_beta = beta;
    }
  }
  return best_beta;
}

JacobiResult jacobi_best_response(const Scenario &scenario, const PolicyVector &initial,
                                  const JacobiOptions &options) {
  if (initial.betas.size() != scenario.nodes.size())
    throw DomainError("jacobi_best_response: policy size does not match the number of nodes");
  if (options.grid_size < 1) throw DomainError("jacobi_best_response: grid_size must be >= 1");
  if (!(options.tol >= 0.0)) throw DomainError("jacobi_best_response: tol must be >= 0");
  if (options.max_iters < 1) throw DomainError("jacobi_best_response: max_iters must be >= 1");

  const std::size_t n = scenario.nodes.size();
  auto throughputs_at = [&](const PolicyVector &policy) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j)
      out[j] = throughput_or_zero(make_context(scenario, policy, j), policy.betas[j], options.mode);
    return out;
  };

  JacobiResult result;
  PolicyVector current = initial;
  PolicyVector best_policy = initial;
  std::vector<double> best_throughputs = throughputs_at(initial);
  double best_total = 0.0;
  for (double t : best_throughputs) best_total += t;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    PolicyVector next = current;
    for (std::size_t i = 0; i < n; ++i) next.betas[i] = best_response(scenario, current, i, options);

    const auto rates = throughputs_at(next);
    double change = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max(change, std::abs(next.betas[i] - current.betas[i]));
      total += rates[i];
      result.trace.push_back({iter, i, next.betas[i], rates[i]});
    }
    result.iterations = iter;
    current = next;
    if (total > best_total) {
      best_total = total;
      best_policy = current;
      best_throughputs = rates;
    }
    if (change <= options.tol) {
      result.converged = true;
      result.policy = current;
      result.throughputs = rates;
      return result;
    }
  }
  result.policy = best_policy;
  result.throughputs = best_throughputs;
  return result;
}

} // namespace uavq
