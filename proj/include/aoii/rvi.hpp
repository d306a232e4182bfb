#pragma once

// Relative value iteration for the Lagrangian MDP on a truncated (δ, r)
// grid. Serves as an independent oracle for the closed-form threshold and
// cost expressions.

#include <cstdint>
#include <map>
#include <vector>

#include "aoii/model.hpp"

namespace aoii {

struct RviConfig {
  std::uint64_t delta_max = 400;   ///< AoII cap; δ+1 beyond it is held at delta_max
  std::uint64_t r_cap = 64;        ///< count cap for unbounded r_max
  std::uint64_t max_iters = 100'000;
  double span_tol = 1e-10;

  void validate() const;
};

struct RviSolution {
  double g = 0.0;
  std::uint64_t delta_max = 0;
  std::uint64_t r_dim = 0;  ///< number of tracked counts (r_max+1 or r_cap+1)
  std::vector<double> values;
  std::vector<std::uint8_t> transmit;
  std::uint64_t iterations = 0;
  bool converged = false;
  double final_span = 0.0;

  bool valid(std::uint64_t delta, std::uint64_t r) const {
    return delta <= delta_max && r < r_dim && r <= delta;
  }
  double value(std::uint64_t delta, std::uint64_t r) const { return values[delta * r_dim + r]; }
  Action action(std::uint64_t delta, std::uint64_t r) const {
    return transmit[delta * r_dim + r] ? Action::transmit : Action::wait;
  }
};

/// Anchored RVI started from V_0(δ, r) = f(δ). For finite r_max the count
/// is tracked modulo the round length, which lumps the chain exactly.
RviSolution rvi_solve(double lambda, const SourceModel& source, const ChannelModel& channel,
                      const Penalty& penalty, const RviConfig& cfg = {});

/// r → least δ whose greedy action is transmit. Requires a converged solution.
std::map<std::uint64_t, std::uint64_t> extract_thresholds(const RviSolution& sol);

}  // namespace aoii
