#pragma once

#include <cstdlib>
#include <queue>
#include <thread>
#include <unordered_map>
#include <vector>

#include "brwcrit/brw_law.hpp"
#include "brwcrit/rng.hpp"
#include "brwcrit/stats.hpp"

namespace brwcrit {

// Monte Carlo ground truth for the BRW: a discrete-generation simulation of
// the canonical IBP and an event-driven continuous-time simulation. Both use
// the same replica seeding discipline (master seed -> replica stream), so a
// run is reproducible and independent of scheduling order.

struct SimConfig {
  double lambda = 1.0;
  Site start = 0;
  double horizon = 50.0;            // continuous-time cap T
  long long max_generations = 200;  // discrete-generation cap
  long long max_population = 100000;
  long long local_threshold = 50;   // births at the start site => local flag
  long long replicas = 10000;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("sim: lambda must be > 0");
    if (horizon <= 0.0 || max_generations < 1 || max_population < 1 ||
        local_threshold < 1)
      throw std::invalid_argument("sim: all caps must be >= 1");
  }
};

struct ReplicaResult {
  bool global_alive = false;
  bool local = false;     // start site saw >= local_threshold births
  bool censored = false;  // population cap hit before the horizon
  double extinction_time = -1.0;  // generation index / continuous time
  long long total_births = 0;
  long long births_at_start = 0;
  long long steps = 0;  // generations expanded / events processed
};

struct SimOutcome {
  std::vector<ReplicaResult> replicas;
  long long survivors = 0;
  long long local_survivors = 0;
  long long censored = 0;
  double p_hat = 0.0;
  Interval wilson;
  std::uint64_t seed = 0;

  void aggregate() {
    survivors = local_survivors = censored = 0;
    for (const auto& r : replicas) {
      survivors += r.global_alive ? 1 : 0;
      local_survivors += r.local ? 1 : 0;
      censored += r.censored ? 1 : 0;
    }
    p_hat = replicas.empty()
                ? 0.0
                : static_cast<double>(survivors) / replicas.size();
    wilson = wilson_interval(survivors, static_cast<long long>(replicas.size()));
  }
};

namespace detail {

/// Per-site sampling tables (total rate, cumulative child weights), built
/// lazily; one instance per worker thread, so no locking.
struct RowCache {
  const WeightedKernel* kernel;
  struct Entry {
    double rate_sum = 0.0;
    std::vector<Site> targets;
    std::vector<double> cum;
  };
  std::unordered_map<Site, Entry> map;

  const Entry& get(Site x) {
    auto it = map.find(x);
    if (it != map.end()) return it->second;
    Entry e;
    for (const Edge& ed : kernel->row(x)) {
      e.rate_sum += ed.weight;
      e.targets.push_back(ed.to);
      e.cum.push_back(e.rate_sum);
    }
    return map.emplace(x, std::move(e)).first->second;
  }
};

inline int worker_threads(long long jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("BRWCRIT_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw)
      hw = static_cast<unsigned>(cap);
  }
  if (jobs < static_cast<long long>(hw)) hw = static_cast<unsigned>(jobs);
  return static_cast<int>(hw);
}

}  // namespace detail

/// One offspring draw from mu_x: the total S(f) is geometric with success
/// probability 1/(1 + lambda S_x), and given S(f) = i the i child types are
/// i.i.d. categorical with weights k_xy / S_x. This factorization of the
/// closed-form law is validated against offspring_prob by a total-variation
/// test before being trusted (see the sampler tests and acceptance suite).
inline SparseCounts sample_offspring_cached(detail::RowCache& cache,
                                            double lambda, Site x, Prng& rng) {
  const auto& row = cache.get(x);
  if (row.rate_sum == 0.0) return {};
  double p0 = 1.0 / (1.0 + lambda * row.rate_sum);
  long long total = rng.geometric(p0);
  std::unordered_map<Site, int> counts;
  for (long long i = 0; i < total; ++i)
    counts[row.targets[rng.categorical(row.cum)]] += 1;
  SparseCounts f(counts.begin(), counts.end());
  std::sort(f.begin(), f.end());
  return f;
}

inline SparseCounts sample_offspring(const BRWLaw& law, Site x, Prng& rng) {
  detail::RowCache cache{&law.kernel(), {}};
  return sample_offspring_cached(cache, law.lambda(), x, rng);
}

/// One replica of the discrete-generation IBP (breadth-first expansion).
inline ReplicaResult simulate_generations(const BRWLaw& law,
                                          const SimConfig& cfg,
                                          long long replica_index,
                                          detail::RowCache* shared_cache = nullptr) {
  cfg.validate();
  Prng rng = Prng::for_stream(cfg.seed, static_cast<std::uint64_t>(replica_index));
  detail::RowCache local{&law.kernel(), {}};
  detail::RowCache& cache = shared_cache ? *shared_cache : local;

  ReplicaResult res;
  std::unordered_map<Site, long long> gen{{cfg.start, 1}};
  long long population = 1;
  for (long long g = 0; g < cfg.max_generations; ++g) {
    std::unordered_map<Site, long long> next;
    long long next_pop = 0;
    for (const auto& [site, count] : gen) {
      const auto& row = cache.get(site);
      double p0 = 1.0 / (1.0 + cfg.lambda * row.rate_sum);
      for (long long c = 0; c < count; ++c) {
        long long kids = row.rate_sum == 0.0 ? 0 : rng.geometric(p0);
        for (long long i = 0; i < kids; ++i) {
          Site y = row.targets[rng.categorical(row.cum)];
          next[y] += 1;
          ++next_pop;
          ++res.total_births;
          if (y == cfg.start) ++res.births_at_start;
        }
      }
      if (next_pop > cfg.max_population) break;
    }
    res.steps = g + 1;
    population = next_pop;
    if (population == 0) {
      res.extinction_time = static_cast<double>(g + 1);
      break;
    }
    if (population > cfg.max_population) {
      res.censored = true;
      break;
    }
    gen = std::move(next);
  }
  res.global_alive = population > 0;
  res.local = res.births_at_start >= cfg.local_threshold;
  return res;
}

/// One replica of the continuous-time BRW via the embedded jump chain: a
/// particle at x fires after Exp(1 + lambda S_x); the event is a death with
/// probability 1/(1 + lambda S_x), otherwise a birth onto y ~ k_xy / S_x.
inline ReplicaResult simulate_continuous(const BRWLaw& law,
                                         const SimConfig& cfg,
                                         long long replica_index,
                                         detail::RowCache* shared_cache = nullptr) {
  cfg.validate();
  Prng rng = Prng::for_stream(cfg.seed,
                              static_cast<std::uint64_t>(replica_index) ^
                                  0x636f6e74696e75ULL);
  detail::RowCache local{&law.kernel(), {}};
  detail::RowCache& cache = shared_cache ? *shared_cache : local;

  struct Event {
    double time;
    Site site;
    bool operator>(const Event& o) const { return time > o.time; }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;

  ReplicaResult res;
  auto schedule = [&](Site x, double now) {
    double rate = 1.0 + cfg.lambda * cache.get(x).rate_sum;
    queue.push({now + rng.exponential(rate), x});
  };
  schedule(cfg.start, 0.0);
  double now = 0.0;
  while (!queue.empty()) {
    Event ev = queue.top();
    if (ev.time >= cfg.horizon) {  // alive at the horizon
      res.global_alive = true;
      break;
    }
    queue.pop();
    now = ev.time;
    ++res.steps;
    const auto& row = cache.get(ev.site);
    double death_prob = 1.0 / (1.0 + cfg.lambda * row.rate_sum);
    if (rng.bernoulli(death_prob)) {
      if (queue.empty()) res.extinction_time = now;
      continue;  // particle removed
    }
    Site y = row.targets[rng.categorical(row.cum)];
    ++res.total_births;
    if (y == cfg.start) ++res.births_at_start;
    schedule(y, now);       // child
    schedule(ev.site, now);  // parent keeps breeding (memoryless)
    if (static_cast<long long>(queue.size()) > cfg.max_population) {
      res.global_alive = true;
      res.censored = true;
      break;
    }
  }
  res.local = res.births_at_start >= cfg.local_threshold;
  return res;
}

/// Replica ensemble with Wilson 95% interval; deterministic in the master
/// seed and independent of the worker count (replica i always uses stream i).
inline SimOutcome estimate_survival(const BRWLaw& law, const SimConfig& cfg,
                                    bool continuous = false) {
  cfg.validate();
  if (cfg.replicas < 100)
    throw std::invalid_argument("estimate_survival: needs >= 100 replicas");
  SimOutcome out;
  out.seed = cfg.seed;
  out.replicas.resize(static_cast<std::size_t>(cfg.replicas));

  int threads = detail::worker_threads(cfg.replicas);
  auto worker = [&](long long begin, long long end) {
    detail::RowCache cache{&law.kernel(), {}};
    for (long long i = begin; i < end; ++i)
      out.replicas[static_cast<std::size_t>(i)] =
          continuous ? simulate_continuous(law, cfg, i, &cache)
                     : simulate_generations(law, cfg, i, &cache);
  };
  if (threads <= 1) {
    worker(0, cfg.replicas);
  } else {
    std::vector<std::thread> pool;
    long long chunk = (cfg.replicas + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      long long b = t * chunk;
      long long e = std::min(cfg.replicas, b + chunk);
      if (b >= e) break;
      pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }
  out.aggregate();
  return out;
}

}  // namespace brwcrit
