#include "uavq/simulator.hpp"

#include "uavq/errors.hpp"
#include "uavq/log.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <random>
#include <thread>

namespace uavq {

void SimConfig::validate() const {
  if (warmup_slots < 0) throw ValidationError("warmup_slots", "must be >= 0");
  if (!(num_slots > warmup_slots)) throw ValidationError("num_slots", "must exceed warmup_slots");
  if (replication_count < 1) throw ValidationError("replication_count", "must be >= 1");
}

SimCounts &SimCounts::operator+=(const SimCounts &o) {
  arrivals += o.arrivals;
  delivered += o.delivered;
  dropped_delay += o.dropped_delay;
  dropped_overflow += o.dropped_overflow;
  dropped_error += o.dropped_error;
  queued_at_end += o.queued_at_end;
  measured_slots += o.measured_slots;
  return *this;
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Packet {
  double arrival = 0.0; // s
  double length = 0.0;  // mean-normalised
  bool measured = false;
};

// Per-node state for one replication.
struct NodeSim {
  FadingModel fading;
  double rx_gain = 0.0; // P h^2 towards the destination
  double beta = 0.0;
  QueueParams queue;
  std::mt19937_64 rng;
  std::deque<Packet> buffer;
  double stored = 0.0;

  // Outcome of this slot's fading draws.
  double best = 0.0;
  int best_channel = 0;
};

class FadingDraw {
public:
  explicit FadingDraw(const FadingModel &model) {
    if (const auto *r = std::get_if<Rayleigh>(&model)) {
      rayleigh_ = true;
      omega_ = r->omega;
    } else {
      b_ = std::get<Rician>(model).b;
    }
  }
  // Squared amplitude of one draw.
  double power(std::mt19937_64 &rng) {
    if (rayleigh_) return omega_ * exp_(rng);
    const double re = b_ + normal_(rng);
    const double im = normal_(rng);
    return re * re + im * im;
  }

private:
  bool rayleigh_ = false;
  double omega_ = 1.0;
  double b_ = 0.0;
  std::exponential_distribution<double> exp_{1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

SimCounts run_replication(const Scenario &scenario, const PolicyVector &policy,
                          const SimConfig &cfg, int replication) {
  const std::size_t n = scenario.nodes.size();
  const std::size_t src = scenario.source_index();
  const double slot = scenario.slot_duration;
  const int channels = scenario.num_channels;
  const double noise = scenario.noise.power();

  std::vector<NodeSim> nodes(n);
  std::vector<FadingDraw> draws;
  draws.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto link = scenario.link(j);
    auto &s = nodes[j];
    s.fading = link.fading;
    s.rx_gain = scenario.nodes[j].transmit_power * link.path_loss_amplitude *
                link.path_loss_amplitude;
    s.beta = policy.betas[j];
    s.queue = scenario.nodes[j].queue;
    s.rng.seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(replication), j));
    draws.emplace_back(link.fading);
  }

  SimCounts counts;
  std::exponential_distribution<double> length_dist(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<char> transmits(n, 0);

  for (std::int64_t t = 0; t < cfg.num_slots; ++t) {
    const double now = static_cast<double>(t) * slot;
    const bool measuring = t >= cfg.warmup_slots;
    if (measuring) ++counts.measured_slots;

    for (std::size_t j = 0; j < n; ++j) {
      auto &s = nodes[j];
      // Delay drops at the slot boundary.
      while (!s.buffer.empty() && now - s.buffer.front().arrival > s.queue.delay_threshold) {
        if (j == src && s.buffer.front().measured) ++counts.dropped_delay;
        s.stored -= s.buffer.front().length;
        s.buffer.pop_front();
      }
      if (s.buffer.empty()) s.stored = 0.0;

      s.best = -1.0;
      for (int c = 0; c < channels; ++c) {
        const double h2 = draws[j].power(s.rng);
        if (h2 > s.best) {
          s.best = h2;
          s.best_channel = c;
        }
      }
      const bool clears = s.best >= s.beta * s.beta;
      if (j == src)
        transmits[j] = clears && !s.buffer.empty();
      else if (cfg.silence_interferers)
        transmits[j] = 0;
      else
        transmits[j] = clears && (cfg.saturated_interferers || !s.buffer.empty());
    }

    if (transmits[src]) {
      auto &s = nodes[src];
      double interference = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == src || !transmits[j]) continue;
        if (cfg.always_collide || nodes[j].best_channel == s.best_channel)
          interference += nodes[j].rx_gain * nodes[j].best;
      }
      const double sinr = s.rx_gain * s.best / (noise + interference);
      if (s.buffer.front().measured) {
        if (sinr >= scenario.gamma_th)
          ++counts.delivered;
        else
          ++counts.dropped_error;
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      auto &s = nodes[j];
      if (transmits[j] && !s.buffer.empty()) {
        s.stored -= s.buffer.front().length;
        s.buffer.pop_front();
        if (s.buffer.empty()) s.stored = 0.0;
      }
    }

    // Arrivals during [now, now + slot).
    for (std::size_t j = 0; j < n; ++j) {
      auto &s = nodes[j];
      std::poisson_distribution<int> arrivals(s.queue.arrival_rate * slot);
      const int k = arrivals(s.rng);
      if (k == 0) continue;
      std::vector<double> times(static_cast<std::size_t>(k));
      for (auto &x : times) x = now + slot * unit(s.rng);
      std::sort(times.begin(), times.end());
      for (const double at : times) {
        const double len = length_dist(s.rng);
        const bool counted = j == src && measuring;
        if (counted) ++counts.arrivals;
        if (s.stored + len <= s.queue.buffer_capacity) {
          s.buffer.push_back({at, len, counted});
          s.stored += len;
        } else if (counted) {
          ++counts.dropped_overflow;
        }
      }
    }
  }
  for (const auto &p : nodes[src].buffer)
    if (p.measured) ++counts.queued_at_end;
  return counts;
}

double ratio(std::int64_t num, std::int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

Estimate summarise(const std::vector<double> &samples) {
  const double r = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= r;
  if (samples.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return {mean, 1.96 * std::sqrt(ss / (r - 1.0)) / std::sqrt(r)};
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t node) {
  std::uint64_t z = splitmix(master);
  z = splitmix(z ^ (replication * 0xd1b54a32d192ed03ULL));
  return splitmix(z ^ (node * 0xa0761d6478bd642fULL + 0x8bb84b93962eacc9ULL));
}

SimResult run(const Scenario &scenario, const PolicyVector &policy, const SimConfig &cfg) {
  cfg.validate();
  scenario.validate();
  if (policy.betas.size() != scenario.nodes.size())
    throw DomainError("simulate: policy size does not match the number of nodes");
  for (double b : policy.betas)
    if (std::isnan(b) || b < 0.0) throw DomainError("simulate: beta must be >= 0");

  const int reps = cfg.replication_count;
  std::vector<SimCounts> per(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++) per[static_cast<std::size_t>(r)] = run_replication(scenario, policy, cfg, r);
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(reps)));
  log_debug("simulate: " + std::to_string(reps) + " replications on " + std::to_string(threads) +
            " threads");
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
  }

  SimResult result;
  result.replications = per;
  std::vector<double> dly, ov, err, qdrop, thr;
  for (const auto &c : per) {
    result.counts += c;
    const auto transmitted = c.delivered + c.dropped_error;
    dly.push_back(ratio(c.dropped_delay, c.dropped_delay + transmitted));
    ov.push_back(ratio(c.dropped_overflow, c.arrivals));
    err.push_back(ratio(c.dropped_error, transmitted));
    qdrop.push_back(ratio(c.dropped_overflow + c.dropped_delay, c.arrivals - c.queued_at_end));
    thr.push_back(static_cast<double>(c.delivered) /
                  (static_cast<double>(c.measured_slots) * scenario.slot_duration));
  }
  result.p_delay = summarise(dly);
  result.p_overflow = summarise(ov);
  result.p_error = summarise(err);
  result.p_queue_drop = summarise(qdrop);
  result.throughput = summarise(thr);
  return result;
}

} // namespace uavq
