#pragma once

// Closed-form evaluation of the Lagrangian MDP under threshold policies:
// the σ_l series of the transmit-phase survival, the average cost g_{n0},
// the value function V(δ, 0), and the optimal threshold n*_{0,λ}.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "aoii/errors.hpp"
#include "aoii/model.hpp"

namespace aoii {

struct SeriesConfig {
  double epsilon = 1e-12;           ///< cutoff on σ_l
  std::uint64_t l_cap = 1'000'000;  ///< hard ceiling on the series index
  double weighted_epsilon = 1e-10;  ///< cutoff on f-weighted increments

  void validate() const;
};

/// σ_0..σ_L where σ_l = Σ_i P^l_{0,i}; L is the first index with σ_L < ε.
struct SigmaSeriesResult {
  std::vector<double> sigma;
  std::size_t depth = 0;
};

SigmaSeriesResult sigma_series(const SourceModel& source, const ChannelModel& channel,
                               const SeriesConfig& cfg);

/// σ_l sequence computed on demand by forward propagation of the
/// transmit-phase mass over transmission counts. Owned by a single solve.
class SigmaSeries {
 public:
  SigmaSeries(const SourceModel& source, const ChannelModel& channel, SeriesConfig cfg);

  /// σ_l; extends the sequence as needed. Throws TruncationError past l_cap.
  double operator[](std::size_t l);

  /// Σ_l w(l)·σ_l, stopping once σ_l < ε and |w(l)·σ_l| < weighted ε.
  template <typename Weight>
  double weighted_sum(Weight&& weight);

  std::size_t computed() const { return sigma_.size(); }
  std::size_t deepest_used() const { return deepest_; }
  const SeriesConfig& config() const { return cfg_; }

 private:
  void extend();

  SourceModel source_;
  ChannelModel channel_;
  SeriesConfig cfg_;
  std::vector<double> gamma1_;
  std::vector<double> gamma2_;
  bool folded_;  // finite rounds: mass indexed by r mod (r_max + 1)
  std::vector<double> mass_;
  std::vector<double> sigma_;
  std::size_t deepest_ = 0;
};

template <typename Weight>
double SigmaSeries::weighted_sum(Weight&& weight) {
  double sum = 0.0;
  for (std::size_t l = 0;; ++l) {
    const double s = (*this)[l];
    const double term = weight(l) * s;
    sum += term;
    if (s < cfg_.epsilon && std::abs(term) < cfg_.weighted_epsilon) {
      if (l > deepest_) deepest_ = l;
      return sum;
    }
  }
}

/// Evaluates g_{n0}, V(δ,0) and the threshold condition for one model,
/// sharing a single σ series across all (n0, λ) queries.
class ThresholdEvaluator {
 public:
  ThresholdEvaluator(const SourceModel& source, const ChannelModel& channel,
                     const Penalty& penalty, SeriesConfig cfg = {},
                     std::uint64_t n0_ceiling = 100'000);

  /// Σ_l σ_l.
  double sigma_sum();
  /// Σ_l f(δ + l)·σ_l.
  double weighted_sum(std::uint64_t delta);

  double g_for_threshold(std::uint64_t n0, double lambda);
  double value_at(std::uint64_t delta, std::uint64_t n0, double lambda, double g);

  /// (1−μ)V(n0+1,0) − V(n0,0) + f(n0) − g_{n0}; positive means transmitting
  /// at δ = n0 beats waiting under threshold n0.
  double threshold_margin(std::uint64_t n0, double lambda);
  /// Strict form of the condition; margins within 1e-12 (relative) count as false.
  bool threshold_condition(std::uint64_t n0, double lambda);

  /// Least n0 ≥ 1 satisfying the threshold condition, or nullopt when μ ≥ α.
  std::optional<std::uint64_t> optimal_threshold(double lambda);

  std::size_t truncation_depth() const { return sigma_.deepest_used(); }
  std::uint64_t condition_evaluations() const { return evaluations_; }

  const SourceModel& source() const { return source_; }
  const ChannelModel& channel() const { return channel_; }
  const Penalty& penalty() const { return penalty_; }

 private:
  double margin_with_scale(std::uint64_t n0, double lambda, double& scale);

  SourceModel source_;
  ChannelModel channel_;
  Penalty penalty_;
  SigmaSeries sigma_;
  std::uint64_t n0_ceiling_;
  std::optional<double> sigma_sum_;
  std::uint64_t evaluations_ = 0;
};

double g_for_threshold(std::uint64_t n0, double lambda, const SourceModel& source,
                       const ChannelModel& channel, const Penalty& penalty,
                       const SeriesConfig& cfg = {});

double value_at(std::uint64_t delta, std::uint64_t n0, double lambda, double g,
                const SourceModel& source, const ChannelModel& channel, const Penalty& penalty,
                const SeriesConfig& cfg = {});

std::optional<std::uint64_t> optimal_threshold(double lambda, const SourceModel& source,
                                               const ChannelModel& channel,
                                               const Penalty& penalty,
                                               const SeriesConfig& cfg = {});

/// Long-run average AoII of the policy that never transmits.
double g_wait(const SourceModel& source, const Penalty& penalty, const SeriesConfig& cfg = {});

struct LagrangianSolution {
  double lambda = 0.0;
  std::optional<std::uint64_t> n0_star;  ///< nullopt: never transmit
  double g = 0.0;
  double sigma_sum = 0.0;
  double weighted_sum = 0.0;
  std::size_t truncation_depth = 0;
};

LagrangianSolution solve_lagrangian(double lambda, const SourceModel& source,
                                    const ChannelModel& channel, const Penalty& penalty,
                                    const SeriesConfig& cfg = {});

}  // namespace aoii
