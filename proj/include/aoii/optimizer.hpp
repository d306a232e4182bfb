#pragma once

// End-to-end solution of the rate-constrained problem: λ* search over the
// Lagrangian thresholds, the adjacent threshold pair, and the mixing weight.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aoii/lagrangian.hpp"
#include "aoii/model.hpp"
#include "aoii/rate.hpp"

namespace aoii {

struct SolverConfig {
  SeriesConfig series;
  double lambda_tol = 1e-6;
  double tail_tol = 1e-12;
  std::uint32_t max_doublings = 64;
  std::uint64_t n0_ceiling = 100'000;

  void validate() const;
  RateConfig rate() const { return RateConfig{tail_tol, RateConfig{}.h_ceiling}; }
};

enum class Regime { never_transmit, pure_threshold, mixed };

std::string to_string(Regime regime);

/// One evaluated λ during the search.
struct LambdaProbe {
  double lambda;
  std::uint64_t threshold;
  double rate;
};

struct SolveDiagnostics {
  std::size_t sigma_depth = 0;
  std::size_t rate_depth = 0;
  std::size_t mixed_depth = 0;
  std::uint32_t doublings = 0;
  std::uint32_t bisections = 0;
  std::uint64_t condition_evaluations = 0;
  /// Threshold at the infeasible end of the final λ bracket.
  std::optional<std::uint64_t> threshold_below;
  std::vector<LambdaProbe> trace;
};

struct CmdpSolution {
  Regime regime = Regime::never_transmit;
  double budget = 1.0;
  double lambda_star = 0.0;
  std::optional<std::uint64_t> n_high;
  std::optional<std::uint64_t> n_low;
  double rho_high = 1.0;
  double rate_high = 0.0;
  double rate_low = 0.0;
  double aoii_high = 0.0;  ///< average AoII of the pure n_high policy
  double aoii_low = 0.0;
  double predicted_rate = 0.0;
  double predicted_aoii = 0.0;
  SolveDiagnostics diagnostics;
};

CmdpSolution solve_cmdp(double budget, const SourceModel& source, const ChannelModel& channel,
                        const Penalty& penalty, const SolverConfig& cfg = {});

/// Rate of a time-shared combination of two policies.
double mixture_rate(double rho_high, double rate_high, double rate_low);

/// Weight on the larger threshold such that the per-slot randomized chain
/// transmits at rate `budget` exactly. Uses the q(0,0) of the two pure
/// chains: the unnormalised mass and transmit mass of the randomized chain
/// are both affine in the weight.
double mixing_weight(double budget, const RateAnalysis& high, const RateAnalysis& low);

}  // namespace aoii
