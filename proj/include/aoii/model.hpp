#pragma once

// Source, channel and penalty models of the AoII monitoring problem and the
// one-step transition kernel of the (δ, r) state process.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aoii {

/// Symmetric Markov source: stays with probability `alpha`, moves to each of
/// the other states with probability `mu`.
class SourceModel {
 public:
  SourceModel(double alpha, double mu, std::optional<std::uint32_t> n_states = std::nullopt);

  /// Builds the source from (α, N) using (N − 1)·μ + α = 1.
  static SourceModel from_states(double alpha, std::uint32_t n_states);

  double alpha() const { return alpha_; }
  double mu() const { return mu_; }
  std::optional<std::uint32_t> n_states() const { return n_states_; }

  /// True when transmissions can help (μ < α); otherwise waiting is optimal.
  bool transmissions_useful() const { return mu_ < alpha_; }

 private:
  double alpha_;
  double mu_;
  std::optional<std::uint32_t> n_states_;
};

enum class Combining { soft, none };

/// HARQ decoding law p(r) = 1 − p_e·c^(r mod (r_max+1)).
class ChannelModel {
 public:
  /// `r_max == nullopt` means an unbounded number of retransmissions.
  ChannelModel(double p_e, double c, std::optional<std::uint64_t> r_max = std::nullopt,
               Combining combining = Combining::soft);

  double p_e() const { return p_e_; }
  /// Effective decay constant (1 when combining is disabled).
  double c() const { return combining_ == Combining::none ? 1.0 : c_; }
  double configured_c() const { return c_; }
  std::optional<std::uint64_t> r_max() const { return r_max_; }
  Combining combining() const { return combining_; }

  /// Length of one HARQ round, or nullopt when unbounded.
  std::optional<std::uint64_t> round_length() const;

  /// True when p(r) does not depend on r.
  bool constant_success() const { return c() == 1.0 || (r_max_ && *r_max_ == 0); }

  double p_success(std::uint64_t r) const;

 private:
  double p_e_;
  double c_;
  std::optional<std::uint64_t> r_max_;
  Combining combining_;
};

/// Strictly increasing, unbounded AoII penalty f: ℕ → ℝ≥0.
class Penalty {
 public:
  enum class Kind { linear, power, table };

  static Penalty linear();
  /// f(δ) = δ^exponent, exponent ≥ 1.
  static Penalty power(double exponent);
  /// f(δ) = values[δ] inside the table; beyond it the last finite
  /// difference is extended linearly. Needs at least two strictly
  /// increasing nonnegative entries.
  static Penalty table(std::vector<double> values);

  Kind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(std::uint64_t delta) const;

  std::string describe() const;

 private:
  Penalty(Kind kind, double exponent, std::vector<double> values)
      : kind_(kind), exponent_(exponent), values_(std::move(values)) {}

  Kind kind_;
  double exponent_;
  std::vector<double> values_;
};

struct State {
  std::uint64_t delta = 0;
  std::uint64_t r = 0;

  friend bool operator==(const State&, const State&) = default;
  friend auto operator<=>(const State&, const State&) = default;
};

enum class Action { wait, transmit };

struct GammaPair {
  double gamma1;  ///< stay on the transmitted value and fail to decode
  double gamma2;  ///< move to a new wrong value, packet useless
};

GammaPair gamma(const SourceModel& source, const ChannelModel& channel, std::uint64_t r);

/// One successor of the kernel. `decoded` is the part of `prob` in which the
/// packet was decoded; it is zero for wait actions.
struct Outcome {
  State next;
  double prob;
  double decoded;
};

/// Support of S_{t+1}; at most three successors.
class TransitionSet {
 public:
  void add(State next, double prob, double decoded = 0.0);

  std::size_t size() const { return size_; }
  const Outcome& operator[](std::size_t i) const { return items_[i]; }
  const Outcome* begin() const { return items_.data(); }
  const Outcome* end() const { return items_.data() + size_; }

  double total() const;
  /// Probability of the given successor (0 when absent).
  double prob_of(State s) const;

 private:
  std::array<Outcome, 3> items_{};
  std::size_t size_ = 0;
};

/// Exact distribution of the next state. Throws ConfigError for states that
/// violate the (δ = 0 ⟹ r = 0, r ≤ δ) invariants.
TransitionSet transition_dist(State state, Action action, const SourceModel& source,
                              const ChannelModel& channel);

/// Numerically certifies Σ_{l≥1} f(l+1)(γ1(0)+γ2(0))^l < ∞ by a ratio test
/// with geometric tail estimate; false means callers must refuse to solve.
bool validate_boundedness(const SourceModel& source, const ChannelModel& channel,
                          const Penalty& penalty, double tol = 1e-10,
                          std::uint64_t l_cap = 1'000'000);

}  // namespace aoii
