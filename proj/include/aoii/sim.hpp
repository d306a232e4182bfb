#pragma once

// Seeded slotted Monte Carlo simulation of source, HARQ channel and policy.

#include <cstdint>
#include <functional>
#include <string>
#include <variant>

#include "aoii/model.hpp"

namespace aoii {

/// Counter-based generator: output i is a SplitMix64 finaliser applied to
/// key + i·φ. Streams with different keys are independent for practical
/// purposes, and any position is reachable without replaying the stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Deterministic child seed `index` of `base`; distinct indices give
/// distinct seeds.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t index);

struct NeverTransmit {};
struct ThresholdPolicy {
  std::uint64_t n0;
};
/// Each slot picks threshold n_low + 1 with probability rho_high, else n_low.
struct MixedPolicy {
  std::uint64_t n_low;
  double rho_high;
};
/// Transmits on every slot index divisible by ⌈1/R⌉.
struct PeriodicPolicy {
  double rate;
};

class Policy {
 public:
  using Variant = std::variant<NeverTransmit, ThresholdPolicy, MixedPolicy, PeriodicPolicy>;

  Policy(Variant v);  // NOLINT(google-explicit-constructor)

  Action decide(State s, std::uint64_t slot, CounterRng& rng) const;
  const Variant& variant() const { return v_; }
  std::string describe() const;

 private:
  Variant v_;
  std::uint64_t period_ = 1;
};

struct SimReport {
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  std::uint64_t replications = 1;
  double avg_aoii = 0.0;
  double avg_rate = 0.0;
  double aoii_stderr = 0.0;
  double rate_stderr = 0.0;
  std::uint64_t max_delta_seen = 0;
  std::uint64_t decode_successes = 0;

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

/// Called for every slot with (state, action, next state).
using TransitionObserver = std::function<void(State, Action, State)>;

/// Runs `horizon` slots from (0,0); standard errors by 100 batch means.
SimReport simulate(const Policy& policy, const SourceModel& source, const ChannelModel& channel,
                   const Penalty& penalty, std::uint64_t horizon, std::uint64_t seed,
                   const TransitionObserver& observer = {});

/// `n_reps` independent runs seeded with split_seed(base_seed, i). Means are
/// unweighted averages of the replicate means; standard errors come from the
/// spread of replicate means (or the single run's batch means when n_reps = 1, in which case the
/// result is that run's report unchanged).
SimReport replicate(const Policy& policy, const SourceModel& source, const ChannelModel& channel,
                    const Penalty& penalty, std::uint64_t horizon, std::uint64_t base_seed,
                    std::uint64_t n_reps, unsigned threads = 1);

}  // namespace aoii
