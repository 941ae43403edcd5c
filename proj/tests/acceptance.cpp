// Acceptance checks. Each criterion prints exactly one PASS/FAIL line with
// the measured quantities; the process exits non-zero if any criterion fails.
// Pass a criterion name (AC1 ... AC10) to run a subset.

#include "helpers.hpp"
#include "oracles.hpp"

#include "uavq/errors.hpp"
#include "uavq/simulator.hpp"
#include "uavq/sweep.hpp"
#include "uavq/throughput.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace uavq;
using namespace testing_support;

namespace {

// Tolerances pinned by the acceptance criteria.
constexpr double kMonotoneSlack = 1e-9;     // numeric slack on "non-decreasing"
constexpr double kUnimodalSlack = 1e-6;     // numeric slack on "unimodal"
constexpr double kPeakTarget = 5.1;
constexpr double kPeakBand = 0.5;
constexpr double kSaturationLevel = 0.95;   // fig5: queue drop near the bound
constexpr double kErrorAgreement = 0.03;    // AC5, absolute
constexpr double kQueueAgreement = 0.05;    // AC6, absolute
constexpr double kIdentityTol = 1e-12;
constexpr double kMomentRelTol = 1e-8;
constexpr double kComplementTol = 1e-9;
constexpr double kBoundaryTol = 1e-9;
constexpr double kFirstDerivRelTol = 1e-4;
constexpr double kSecondDerivRelTol = 1e-3;
constexpr int kDerivativePoints = 32;
constexpr double kUpperBoundTol = 1e-9;
constexpr double kErfSurrogateTol = 0.1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... A>
std::string fmtn(const char *f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// Group a sweep table into curves: series value -> (axis values, metric values).
struct Curve {
  std::vector<double> x, y, feasible;
};
std::map<double, Curve> curves(const ResultTable &t, const std::string &series, const std::string &axis,
                               const std::string &metric) {
  std::map<double, Curve> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto &c = out[t.number(r, series)];
    c.x.push_back(t.number(r, axis));
    c.y.push_back(t.number(r, metric));
    c.feasible.push_back(t.number(r, "feasible"));
  }
  return out;
}

Outcome ac1() {
  const auto preset = make_preset("fig2");
  const auto table = run_sweep(preset.scenario, preset.sweep);
  // Along beta_m for each beta_n.
  bool monotone = true;
  for (const auto &[bn, c] : curves(table, "beta_n", "beta_m", "throughput"))
    for (std::size_t i = 1; i < c.y.size(); ++i)
      if (c.y[i] < c.y[i - 1] - kMonotoneSlack) monotone = false;
  // Along beta_n for each beta_m: one rise then one fall.
  bool unimodal = true;
  double worst_peak = 0.0, lo_peak = 1e9, hi_peak = -1e9;
  for (const auto &[bm, c] : curves(table, "beta_m", "beta_n", "throughput")) {
    const auto top = std::max_element(c.y.begin(), c.y.end()) - c.y.begin();
    for (std::size_t i = 1; i < c.y.size(); ++i) {
      const bool rising = static_cast<long>(i) <= top;
      if (rising && c.y[i] < c.y[i - 1] - kUnimodalSlack) unimodal = false;
      if (!rising && c.y[i] > c.y[i - 1] + kUnimodalSlack) unimodal = false;
    }
    const double peak = c.x[static_cast<std::size_t>(top)];
    lo_peak = std::min(lo_peak, peak);
    hi_peak = std::max(hi_peak, peak);
    worst_peak = std::max(worst_peak, std::abs(peak - kPeakTarget));
  }
  Outcome o;
  o.pass = monotone && unimodal && worst_peak <= kPeakBand;
  o.detail = fmtn("monotone in beta_m: %s; unimodal in beta_n: %s; argmax beta_n in [%.3f, %.3f] "
                  "(target %.1f +/- %.1f)",
                  monotone ? "yes" : "no", unimodal ? "yes" : "no", lo_peak, hi_peak, kPeakTarget, kPeakBand);
  return o;
}

Outcome ac2() {
  const auto preset = make_preset("fig3");
  const auto table = run_sweep(preset.scenario, preset.sweep);
  bool strict = true, early_larger = true;
  double min_gap = 1e300;
  for (const auto &[range, c] : curves(table, "interferer_power_range", "interferer_count", "throughput")) {
    std::vector<double> drops;
    for (std::size_t i = 1; i < c.y.size(); ++i) {
      drops.push_back(c.y[i - 1] - c.y[i]);
      if (!(c.y[i] < c.y[i - 1])) strict = false;
    }
    const double first_two = std::min(drops[0], drops[1]);
    const double later = *std::max_element(drops.begin() + 2, drops.end());
    if (!(first_two > later)) early_larger = false;
    min_gap = std::min(min_gap, first_two - later);
  }
  Outcome o;
  o.pass = strict && early_larger;
  o.detail = fmtn("strictly decreasing 0->8: %s; first two drops exceed every later drop: %s "
                  "(smallest margin %.4g pkt/s)",
                  strict ? "yes" : "no", early_larger ? "yes" : "no", min_gap);
  return o;
}

Outcome ac3() {
  const auto preset = make_preset("fig4");
  const auto table = run_sweep(preset.scenario, preset.sweep);
  const auto by_gamma = curves(table, "gamma_th", "interferer_count", "p_error");
  bool increasing = true, ordered = true;
  const Curve *prev = nullptr;
  for (const auto &[g, c] : by_gamma) {
    for (std::size_t i = 1; i < c.y.size(); ++i)
      if (!(c.y[i] > c.y[i - 1])) increasing = false;
    if (prev)
      for (std::size_t i = 0; i < c.y.size(); ++i)
        if (!(c.y[i] > prev->y[i])) ordered = false;
    prev = &c;
  }
  const auto &top = by_gamma.rbegin()->second;
  Outcome o;
  o.pass = increasing && ordered && by_gamma.size() == 3;
  o.detail = fmtn("P_err increasing in interferer count: %s; lower gamma_th lower pointwise: %s "
                  "(gamma_th=8: %.4f -> %.4f)",
                  increasing ? "yes" : "no", ordered ? "yes" : "no", top.y.front(), top.y.back());
  return o;
}

Outcome ac4() {
  const auto preset = make_preset("fig5");
  const auto table = run_sweep(preset.scenario, preset.sweep);
  const auto by_beta = curves(table, "beta_n", "slot_duration", "p_queue_drop");
  bool monotone = true;
  for (const auto &[bn, c] : by_beta)
    for (std::size_t i = 1; i < c.y.size(); ++i) {
      if (c.y[i] < c.y[i - 1]) monotone = false;
      if (c.feasible[i] == 1.0 && !(c.y[i] > c.y[i - 1])) monotone = false;
    }
  const auto &steepest = by_beta.rbegin()->second;
  const double end = steepest.y.back();
  Outcome o;
  o.pass = monotone && end >= kSaturationLevel;
  o.detail = fmtn("queue drop increasing in T_slt for every beta_n: %s; beta_n=%.2f at %.1f ms: %.4f (>= %.2f)",
                  monotone ? "yes" : "no", by_beta.rbegin()->first, steepest.x.back() * 1e3, end,
                  kSaturationLevel);
  return o;
}

Outcome ac5() {
  // Single channel with always-on interferers: the simulated interference is
  // exactly the sum the Gamma law is fitted to, so the gap measured here is
  // the moment-matching error.
  auto s = three_rayleigh(1);
  s.gamma_th = 1.0;
  const PolicyVector policy{{1.0, 0.0, 0.0, 0.0}};
  const double analytic = evaluate(s, policy).p_error;
  SimConfig cfg;
  cfg.num_slots = 1'000'000;
  cfg.warmup_slots = 1000;
  cfg.replication_count = 8;
  cfg.seed = 5;
  cfg.saturated_interferers = true;
  const auto sim = run(s, policy, cfg);
  const double gap = std::abs(analytic - sim.p_error.value);

  // Context only: with 15 channels the true system selects the best channel
  // and idle interferers stay silent, which the analytic model does not see.
  auto wide = three_rayleigh(15);
  SimConfig quick = cfg;
  quick.num_slots = 200'000;
  quick.replication_count = 2;
  quick.saturated_interferers = false;
  const double wide_analytic = evaluate(wide, policy).p_error;
  const double wide_sim = run(wide, policy, quick).p_error.value;

  Outcome o;
  o.pass = gap <= kErrorAgreement;
  o.detail = fmtn("|F|=1, 3 Rayleigh interferers: analytic %.4f vs simulated %.4f +/- %.4f, gap %.4f "
                  "(<= %.2f); info: |F|=15 queue-driven gap %.4f vs %.4f",
                  analytic, sim.p_error.value, sim.p_error.halfwidth, gap, kErrorAgreement, wide_analytic,
                  wide_sim);
  return o;
}

Outcome ac6() {
  double worst_delay = 0.0, worst_overflow = 0.0;
  std::string worst_point;
  for (double load : {0.2, 0.3, 0.4}) {
    for (double beta : {2.0, 2.2, 2.4}) {
      auto s = lone_source(FadingKind::Rayleigh);
      s.nodes[0].queue.arrival_rate = load / s.slot_duration;
      s.nodes[0].queue.delay_threshold = 0.04;
      s.nodes[0].queue.buffer_capacity = 10.0;
      const PolicyVector policy{{beta}};
      const auto a = evaluate(s, policy);
      SimConfig cfg;
      cfg.num_slots = 400'000;
      cfg.warmup_slots = 2000;
      cfg.replication_count = 4;
      cfg.seed = static_cast<std::uint64_t>(load * 100 + beta * 10);
      const auto e = run(s, policy, cfg);
      const double gd = std::abs(a.p_delay - e.p_delay.value);
      const double go = std::abs(a.p_overflow - e.p_overflow.value);
      if (std::max(gd, go) > std::max(worst_delay, worst_overflow))
        worst_point = fmtn("lambda*T=%.1f beta=%.1f rho=%.2f", load, beta,
                           load / transmit_prob(s.link(0).fading, beta, s.num_channels));
      worst_delay = std::max(worst_delay, gd);
      worst_overflow = std::max(worst_overflow, go);
    }
  }
  // Context only: near saturation, abandonment sheds load that the analytic tail ignores.
  auto heavy = lone_source(FadingKind::Rayleigh);
  heavy.nodes[0].queue.arrival_rate = 100;
  const double beta_heavy = beta_upper(make_context(heavy, policy_of(heavy), 0)) * 0.98;
  const double heavy_analytic = evaluate(heavy, PolicyVector{{beta_heavy}}).p_delay;
  SimConfig quick;
  quick.num_slots = 200'000;
  quick.replication_count = 2;
  const double heavy_sim = run(heavy, PolicyVector{{beta_heavy}}, quick).p_delay.value;

  Outcome o;
  o.pass = worst_delay <= kQueueAgreement && worst_overflow <= kQueueAgreement;
  o.detail = fmtn("3x3 grid lambda*T in {0.2,0.3,0.4} x beta in {2.0,2.2,2.4}: max |dP_dly| %.4f, "
                  "max |dP_ov| %.4f (<= %.2f), worst at %s; info: near the bound P_dly %.3f analytic vs %.3f simulated",
                  worst_delay, worst_overflow, kQueueAgreement, worst_point.c_str(), heavy_analytic, heavy_sim);
  return o;
}

Outcome ac7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double compose_err = 0.0, fit_err = 0.0, moment_err = 0.0, complement_err = 0.0, boundary_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    compose_err = std::max(compose_err, std::abs(compose_loss(a, b, c) - (1 - (1 - a) * (1 - b) * (1 - c))));
    const double mean = std::exp(20 * u(rng) - 10), var = std::exp(20 * u(rng) - 10);
    const auto fit = fit_gamma(mean, var);
    fit_err = std::max({fit_err, std::abs(fit.mean() - mean) / mean, std::abs(fit.variance() - var) / var});
  }
  for (double omega : {0.5, 2.0, 5.0})
    for (double beta : {0.0, 0.7, 1.55, 3.0})
      for (int p : {2, 4}) {
        const FadingModel m = Rayleigh{omega};
        const double quad =
            specfun::integrate([&](double x) { return std::pow(x, p) * fading_pdf(m, x); }, beta, specfun::kInfinity,
                               {1e-15, 1e-13, 500})
                .value;
        moment_err = std::max(moment_err, std::abs(truncated_power_moment(m, beta, p) - quad) / quad);
      }
  for (double b : {0.5, 2.0, 5.477, 9.0})
    for (double beta : {0.3, 1.0, 4.0, 5.1, 8.0}) {
      const double inside =
          specfun::integrate([&](double x) { return fading_pdf(Rician{b}, x); }, 0.0, beta, {1e-15, 1e-13, 500}).value;
      complement_err = std::max(complement_err, std::abs(inside + specfun::marcum_q1(b, beta) - 1.0));
      complement_err = std::max(complement_err,
                                std::abs(fading_cdf(Rician{b}, beta) + fading_survival(Rician{b}, beta) - 1.0));
    }
  for (const auto kind : {FadingKind::Rayleigh, FadingKind::Rician})
    for (double lambda : {40.0, 80.0, 120.0, 300.0}) {
      auto s = lone_source(kind);
      s.nodes[0].queue.arrival_rate = lambda;
      const auto ctx = make_context(s, policy_of(s), 0);
      boundary_err = std::max(boundary_err, std::abs(evaluate(ctx, beta_upper(ctx)).p_delay - 1.0));
    }
  Outcome o;
  o.pass = compose_err <= kIdentityTol && fit_err <= kIdentityTol && moment_err <= kMomentRelTol &&
           complement_err <= kComplementTol && boundary_err <= kBoundaryTol;
  o.detail = fmtn("composition %.1e (<=1e-12), Gamma moments %.1e (<=1e-12), Rayleigh moments %.1e rel (<=1e-8), "
                  "Q1 complement %.1e (<=1e-9), P_dly(upper)-1 %.1e (<=1e-9)",
                  compose_err, fit_err, moment_err, complement_err, boundary_err);
  return o;
}

Outcome ac8() {
  double worst1 = 0.0, worst2 = 0.0;
  int points = 0;
  for (const auto kind : {FadingKind::Rayleigh, FadingKind::Rician}) {
    auto s = three_rayleigh(15);
    s.nodes[0].fading_override = kind;
    s.gamma_th = kind == FadingKind::Rician ? 8.0 : 1.0;
    const auto ctx = make_context(s, policy_of(s), 0);
    const double up = beta_upper(ctx);
    const specfun::QuadratureSpec tight{1e-14, 1e-13, 2000};
    for (int i = 1; i <= kDerivativePoints; ++i) {
      const double beta = up * i / (kDerivativePoints + 1);
      const auto d = loss_derivative(ctx, beta);
      const auto fd = oracle::richardson([&](double b) { return lower_bound_objective(ctx, b, tight); }, beta, 1e-3);
      const double s1 = std::abs(d.delay_first) + std::abs(d.error_first);
      const double s2 = std::abs(d.delay_second) + std::abs(d.error_second);
      worst1 = std::max(worst1, std::abs(d.first - fd.first) / s1);
      worst2 = std::max(worst2, std::abs(d.second - fd.second) / s2);
      ++points;
    }
  }
  Outcome o;
  o.pass = worst1 <= kFirstDerivRelTol && worst2 <= kSecondDerivRelTol;
  o.detail = fmtn("%d points (%d per family): max relative error first %.2e (<= %.0e), second %.2e (<= %.0e)",
                  points, kDerivativePoints, worst1, kFirstDerivRelTol, worst2, kSecondDerivRelTol);
  return o;
}

Outcome ac9() {
  constexpr std::array<double, 4> kLargeB{3.1, 4.0, 5.477, 8.0};
  double phi_err = 0.0;
  std::array<double, kLargeB.size()> gap_by_b{};
  int cases = 0;
  for (double load : {0.05, 0.16, 0.3, 0.6, 0.9})
    for (int f : {1, 4, 15}) {
      QueueParams q;
      q.arrival_rate = load / q.slot_duration;
      for (const FadingModel m : {FadingModel{Rayleigh{2.0}}, FadingModel{Rayleigh{0.7}}}) {
        const double beta = beta_upper(m, q, f);
        phi_err = std::max(phi_err, std::abs(transmit_prob(m, beta, f) - load));
        ++cases;
      }
      const double small = beta_upper(Rician{1.0}, q, f);
      phi_err = std::max(phi_err, std::abs(transmit_prob(Rician{1.0}, small, f) - load));
      ++cases;
      for (std::size_t k = 0; k < kLargeB.size(); ++k) {
        const double b = kLargeB[k];
        const double beta = beta_upper(Rician{b}, q, f);
        phi_err = std::max(phi_err, std::abs(transmit_prob(Rician{b}, beta, f) - load));
        ++cases;
        gap_by_b[k] = std::max(gap_by_b[k], std::abs(beta_upper_erf(b, q, f) - beta));
      }
    }
  const double erf_gap = *std::max_element(gap_by_b.begin(), gap_by_b.end());
  Outcome o;
  o.pass = phi_err <= kUpperBoundTol && erf_gap <= kErfSurrogateTol;
  o.detail = fmtn("%d bounds: max |phi(upper) - lambda*T| %.1e (<= 1e-9); erf surrogate max gap for b > 3 "
                  "is %.4f (<= %.1f); per b: 3.1 -> %.4f, 4 -> %.4f, 5.477 -> %.4f, 8 -> %.4f",
                  cases, phi_err, erf_gap, kErfSurrogateTol, gap_by_b[0], gap_by_b[1], gap_by_b[2],
                  gap_by_b[3]);
  return o;
}

Outcome ac10() {
  auto s = symmetric_pair();
  JacobiOptions opt;
  opt.grid_size = 32;
  const auto result = jacobi_best_response(s, policy_of(s), opt);

  // Exhaustive search over the same candidate grid for mutual best responses.
  const auto grid = beta_grid(s, 0, opt.grid_size);
  const double step = grid[1] - grid[0];
  auto rate = [&](std::size_t node, double own, double other) {
    PolicyVector p{{0.0, 0.0}};
    p.betas[node] = own;
    p.betas[1 - node] = other;
    try {
      return evaluate_node(s, p, node).throughput;
    } catch (const StabilityError &) {
      return 0.0;
    }
  };
  auto best_set = [&](std::size_t node, double other) {
    double best = -1.0;
    std::vector<double> values;
    for (double b : grid) values.push_back(rate(node, b, other));
    for (double v : values) best = std::max(best, v);
    std::set<double> arg;
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (values[k] >= best - 1e-12) arg.insert(grid[k]);
    return arg;
  };
  std::vector<std::pair<double, double>> equilibria;
  std::map<double, std::set<double>> br0, br1;
  for (double b : grid) {
    br0[b] = best_set(0, b);
    br1[b] = best_set(1, b);
  }
  for (double b0 : grid)
    for (double b1 : grid)
      if (br0[b1].count(b0) && br1[b0].count(b1)) equilibria.emplace_back(b0, b1);

  const double b0 = result.policy.betas[0], b1 = result.policy.betas[1];
  double nearest = 1e300;
  for (const auto &[e0, e1] : equilibria) nearest = std::min(nearest, std::max(std::abs(e0 - b0), std::abs(e1 - b1)));
  const bool symmetric = std::abs(b0 - b1) <= opt.tol;
  Outcome o;
  o.pass = result.converged && symmetric && !equilibria.empty() && nearest <= step + 1e-12;
  o.detail = fmtn("Jacobi %s in %d iterations at (%.4f, %.4f); %zu grid equilibria, nearest at distance %.4f "
                  "(grid step %.4f)",
                  result.converged ? "converged" : "did not converge", result.iterations, b0, b1,
                  equilibria.size(), nearest, step);
  return o;
}

struct Criterion {
  const char *name;
  const char *title;
  double budget_seconds;
  std::function<Outcome()> check;
};

} // namespace

int main(int argc, char **argv) {
  const std::vector<Criterion> all{
      {"AC1", "fig2 throughput vs beta_m / beta_n", 60, ac1},
      {"AC2", "fig3 throughput vs interferer count", 60, ac2},
      {"AC3", "fig4 error probability vs count and gamma_th", 30, ac3},
      {"AC4", "fig5 queue drop vs slot duration", 10, ac4},
      {"AC5", "error probability, analytic vs Monte Carlo", 300, ac5},
      {"AC6", "queueing, analytic vs Monte Carlo", 300, ac6},
      {"AC7", "formula self-consistency", 10, ac7},
      {"AC8", "loss derivatives vs finite differences", 30, ac8},
      {"AC9", "upper-bound formulas", 5, ac9},
      {"AC10", "Jacobi best response vs grid search", 60, ac10},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto &c : all) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool on_time = seconds <= c.budget_seconds;
    const bool pass = o.pass && on_time;
    if (!pass) ++failures;
    std::printf("%-4s %s  %s: %s [%.2f s, budget %.0f s%s]\n", c.name, pass ? "PASS" : "FAIL", c.title,
                o.detail.c_str(), seconds, c.budget_seconds, on_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
