#include "aoii/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>
#include <vector>

#include "aoii/errors.hpp"

namespace aoii {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::size_t kBatches = 100;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct MeanAndError {
  double mean;
  double stderr_;
};

MeanAndError spread(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

std::uint64_t CounterRng::next_u64() { return mix64(key_ + (++counter_) * kGolden); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(mix64(base) ^ (index * kGolden + 0xD1B54A32D192ED03ULL));
}

Policy::Policy(Variant v) : v_(std::move(v)) {
  if (const auto* t = std::get_if<ThresholdPolicy>(&v_)) {
    if (t->n0 < 1) throw ConfigError("threshold policy needs n0 >= 1");
  } else if (const auto* m = std::get_if<MixedPolicy>(&v_)) {
    if (m->n_low < 1) throw ConfigError("mixed policy needs n_low >= 1");
    if (!(m->rho_high >= 0.0 && m->rho_high <= 1.0))
      throw ConfigError("mixed policy needs rho_high in [0,1]");
  } else if (const auto* p = std::get_if<PeriodicPolicy>(&v_)) {
    if (!(p->rate > 0.0 && p->rate <= 1.0)) throw ConfigError("periodic policy needs R in (0,1]");
    period_ = static_cast<std::uint64_t>(std::ceil(1.0 / p->rate - 1e-12));
    period_ = std::max<std::uint64_t>(period_, 1);
  }
}

Action Policy::decide(State s, std::uint64_t slot, CounterRng& rng) const {
  return std::visit(
      [&](const auto& p) -> Action {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NeverTransmit>) {
          return Action::wait;
        } else if constexpr (std::is_same_v<T, ThresholdPolicy>) {
          return s.delta >= p.n0 ? Action::transmit : Action::wait;
        } else if constexpr (std::is_same_v<T, MixedPolicy>) {
          const std::uint64_t n = rng.uniform() < p.rho_high ? p.n_low + 1 : p.n_low;
          return s.delta >= n ? Action::transmit : Action::wait;
        } else {
          return slot % period_ == 0 ? Action::transmit : Action::wait;
        }
      },
      v_);
}

std::string Policy::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NeverTransmit>) {
          os << "never";
        } else if constexpr (std::is_same_v<T, ThresholdPolicy>) {
          os << "threshold(" << p.n0 << ")";
        } else if constexpr (std::is_same_v<T, MixedPolicy>) {
          os << "mixed(" << p.n_low << "," << p.rho_high << ")";
        } else {
          os << "periodic(" << p.rate << ")";
        }
      },
      v_);
  return os.str();
}

SimReport simulate(const Policy& policy, const SourceModel& source, const ChannelModel& channel,
                   const Penalty& penalty, std::uint64_t horizon, std::uint64_t seed,
                   const TransitionObserver& observer) {
  if (horizon < 1) throw ConfigError("sim.horizon must be at least 1");
  CounterRng rng(seed);
  const std::size_t batches = std::min<std::uint64_t>(kBatches, horizon);

  SimReport rep;
  rep.horizon = horizon;
  rep.seed = seed;

  std::vector<double> batch_cost(batches, 0.0);
  std::vector<double> batch_sent(batches, 0.0);
  std::vector<double> batch_len(batches, 0.0);
  double total_cost = 0.0;
  std::uint64_t total_sent = 0;

  State s{0, 0};
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const std::size_t b = static_cast<std::size_t>((t * batches) / horizon);
    const double cost = penalty(s.delta);
    const Action a = policy.decide(s, t, rng);
    const TransitionSet next = transition_dist(s, a, source, channel);

    const double u = rng.uniform();
    double lo = 0.0;
    std::size_t pick = next.size() - 1;
    for (std::size_t k = 0; k < next.size(); ++k) {
      if (u < lo + next[k].prob) {
        pick = k;
        break;
      }
      lo += next[k].prob;
    }
    const Outcome& o = next[pick];
    if (a == Action::transmit) {
      ++total_sent;
      batch_sent[b] += 1.0;
      if (u - lo < o.decoded) ++rep.decode_successes;
    }
    total_cost += cost;
    batch_cost[b] += cost;
    batch_len[b] += 1.0;
    rep.max_delta_seen = std::max(rep.max_delta_seen, s.delta);
    if (observer) observer(s, a, o.next);
    s = o.next;
  }

  const auto T = static_cast<double>(horizon);
  rep.avg_aoii = total_cost / T;
  rep.avg_rate = static_cast<double>(total_sent) / T;
  std::vector<double> aoii_means(batches);
  std::vector<double> rate_means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    aoii_means[b] = batch_cost[b] / batch_len[b];
    rate_means[b] = batch_sent[b] / batch_len[b];
  }
  rep.aoii_stderr = spread(aoii_means).stderr_;
  rep.rate_stderr = spread(rate_means).stderr_;
  return rep;
}

SimReport replicate(const Policy& policy, const SourceModel& source, const ChannelModel& channel,
                    const Penalty& penalty, std::uint64_t horizon, std::uint64_t base_seed,
                    std::uint64_t n_reps, unsigned threads) {
  if (n_reps < 1) throw ConfigError("sim.n_reps must be at least 1");
  std::vector<SimReport> runs(n_reps);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i = next++; i < n_reps; i = next++)
      runs[i] = simulate(policy, source, channel, penalty, horizon, split_seed(base_seed, i));
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, n_reps));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (n_reps == 1) return runs.front();

  SimReport agg;
  agg.horizon = horizon;
  agg.seed = base_seed;
  agg.replications = n_reps;
  std::vector<double> aoii(n_reps);
  std::vector<double> rate(n_reps);
  for (std::uint64_t i = 0; i < n_reps; ++i) {
    aoii[i] = runs[i].avg_aoii;
    rate[i] = runs[i].avg_rate;
    agg.max_delta_seen = std::max(agg.max_delta_seen, runs[i].max_delta_seen);
    agg.decode_successes += runs[i].decode_successes;
  }
  const auto a = spread(aoii);
  const auto r = spread(rate);
  agg.avg_aoii = a.mean;
  agg.aoii_stderr = a.stderr_;
  agg.avg_rate = r.mean;
  agg.rate_stderr = r.stderr_;
  return agg;
}

}  // namespace aoii
