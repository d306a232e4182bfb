#pragma once

// Stationary analysis of threshold policies: the m(h, r) recursion, the
// achieved transmission rate, and the exact chain of the per-slot
// randomized two-threshold policy.

#include <cstdint>
#include <functional>
#include <vector>

#include "aoii/model.hpp"

namespace aoii {

/// m(h, r) for 0 ≤ r ≤ h ≤ h_max: mass at (n0 + h, r) relative to (n0, 0).
class MTable {
 public:
  explicit MTable(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {}

  std::size_t h_max() const { return rows_.empty() ? 0 : rows_.size() - 1; }
  /// m(h, r); zero for r > h and for entries that underflowed.
  double at(std::size_t h, std::size_t r) const;
  /// Σ_r m(h, r).
  double layer(std::size_t h) const;
  const std::vector<double>& row(std::size_t h) const { return rows_.at(h); }

 private:
  std::vector<std::vector<double>> rows_;
};

MTable m_table(const SourceModel& source, const ChannelModel& channel, std::size_t h_max);

/// Stationary probabilities q(δ, r) on a truncated support δ ≤ max_delta().
class StationaryDistribution {
 public:
  StationaryDistribution() = default;
  explicit StationaryDistribution(std::vector<std::vector<double>> rows)
      : rows_(std::move(rows)) {}

  double at(std::uint64_t delta, std::uint64_t r) const;
  std::uint64_t max_delta() const { return rows_.empty() ? 0 : rows_.size() - 1; }
  const std::vector<double>& row(std::uint64_t delta) const { return rows_.at(delta); }
  double total() const;
  /// Σ_{δ ≥ from} Σ_r q(δ, r).
  double mass_from(std::uint64_t from) const;

 private:
  std::vector<std::vector<double>> rows_;
};

struct RateConfig {
  double tail_tol = 1e-12;
  std::size_t h_ceiling = 50'000;  ///< layers before truncation-failure
};

struct RateAnalysis {
  std::uint64_t n0 = 1;
  double q00 = 0.0;
  double rate = 0.0;  ///< long-run fraction of transmit slots
  StationaryDistribution stationary;
  double truncation_mass = 0.0;  ///< estimated stationary mass beyond the support
  std::size_t depth = 0;         ///< number of transmit-phase layers kept
};

/// Rate and stationary law of the threshold policy "transmit iff δ ≥ n0".
RateAnalysis achieved_rate(std::uint64_t n0, const SourceModel& source,
                           const ChannelModel& channel, const RateConfig& cfg = {});

struct MixedChainAnalysis {
  std::uint64_t n_low = 1;
  double rho_high = 0.0;
  double rate = 0.0;
  double aoii = 0.0;
  StationaryDistribution stationary;
  double truncation_mass = 0.0;
  std::size_t depth = 0;
};

/// Per-slot randomized policy: at δ = n_low (r = 0) transmit with probability
/// 1 − rho_high; for δ ≥ n_low + 1 always transmit.
MixedChainAnalysis mixed_chain_analysis(std::uint64_t n_low, double rho_high,
                                        const SourceModel& source, const ChannelModel& channel,
                                        const Penalty& penalty, const RateConfig& cfg = {});

/// Probability of transmitting in a given state.
using TransmitProbability = std::function<double(State)>;

/// Stationary law of an arbitrary stationary policy obtained directly from
/// transition_dist: the expected visits per regeneration cycle at (0,0) are
/// propagated layer by layer in δ, then normalised. Stops once a layer
/// carries less than tail_tol of the accumulated mass; throws
/// TruncationError past delta_cap.
StationaryDistribution kernel_stationary(const TransmitProbability& policy,
                                         const SourceModel& source, const ChannelModel& channel,
                                         double tail_tol = 1e-14,
                                         std::uint64_t delta_cap = 200'000);

/// Long-run transmit fraction of `policy` under the stationary law `q`.
double transmit_fraction(const StationaryDistribution& q, const TransmitProbability& policy);

}  // namespace aoii
