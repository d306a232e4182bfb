#include "aoii/optimizer.hpp"

#include <algorithm>
#include <map>

#include "aoii/errors.hpp"

namespace aoii {

void SolverConfig::validate() const {
  series.validate();
  if (!(lambda_tol > 0.0)) throw ConfigError("solver.lambda_tol must be positive");
  if (!(tail_tol > 0.0)) throw ConfigError("solver.tail_tol must be positive");
  if (max_doublings < 1) throw ConfigError("solver.max_doublings must be at least 1");
  if (n0_ceiling < 2) throw ConfigError("solver.n0_ceiling must be at least 2");
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::never_transmit: return "never-transmit";
    case Regime::pure_threshold: return "pure-threshold";
    case Regime::mixed: return "mixed";
  }
  return "unknown";
}

double mixture_rate(double rho_high, double rate_high, double rate_low) {
  return rho_high * rate_high + (1.0 - rho_high) * rate_low;
}

double mixing_weight(double budget, const RateAnalysis& high, const RateAnalysis& low) {
  const double excess_low = (low.rate - budget) / low.q00;
  const double excess_high = (high.rate - budget) / high.q00;
  const double denom = excess_low - excess_high;
  if (!(denom > 0.0)) return excess_high <= 0.0 ? 1.0 : 0.0;
  return std::clamp(excess_low / denom, 0.0, 1.0);
}

namespace {

class Search {
 public:
  Search(const SourceModel& source, const ChannelModel& channel, const Penalty& penalty,
         const SolverConfig& cfg)
      : source_(source),
        channel_(channel),
        cfg_(cfg),
        eval_(source, channel, penalty, cfg.series, cfg.n0_ceiling) {}

  const RateAnalysis& rate(std::uint64_t n0) {
    auto it = rates_.find(n0);
    if (it == rates_.end()) it = rates_.emplace(n0, achieved_rate(n0, source_, channel_, cfg_.rate())).first;
    return it->second;
  }

  LambdaProbe probe(double lambda, std::vector<LambdaProbe>& trace) {
    const std::uint64_t n0 = *eval_.optimal_threshold(lambda);
    LambdaProbe p{lambda, n0, rate(n0).rate};
    trace.push_back(p);
    return p;
  }

  ThresholdEvaluator& evaluator() { return eval_; }

  std::size_t deepest_rate() const {
    std::size_t d = 0;
    for (const auto& [n, r] : rates_) d = std::max(d, r.depth);
    return d;
  }

 private:
  SourceModel source_;
  ChannelModel channel_;
  SolverConfig cfg_;
  ThresholdEvaluator eval_;
  std::map<std::uint64_t, RateAnalysis> rates_;
};

void finish_pure(CmdpSolution& sol, Search& search, std::uint64_t n0) {
  sol.regime = Regime::pure_threshold;
  sol.n_high = n0;
  sol.n_low.reset();
  sol.rho_high = 1.0;
  sol.rate_high = search.rate(n0).rate;
  sol.aoii_high = search.evaluator().g_for_threshold(n0, 0.0);
  sol.predicted_rate = sol.rate_high;
  sol.predicted_aoii = sol.aoii_high;
}

}  // namespace

CmdpSolution solve_cmdp(double budget, const SourceModel& source, const ChannelModel& channel,
                        const Penalty& penalty, const SolverConfig& cfg) {
  cfg.validate();
  if (!(budget > 0.0 && budget <= 1.0)) throw ConfigError("budget R must lie in (0,1]");

  CmdpSolution sol;
  sol.budget = budget;
  if (!source.transmissions_useful()) {
    sol.regime = Regime::never_transmit;
    sol.predicted_aoii = g_wait(source, penalty, cfg.series);
    sol.predicted_rate = 0.0;
    return sol;
  }

  Search search(source, channel, penalty, cfg);
  auto& diag = sol.diagnostics;
  auto record_depths = [&] {
    diag.sigma_depth = search.evaluator().truncation_depth();
    diag.rate_depth = search.deepest_rate();
    diag.condition_evaluations = search.evaluator().condition_evaluations();
  };

  const LambdaProbe free = search.probe(0.0, diag.trace);
  if (free.rate <= budget) {
    finish_pure(sol, search, free.threshold);
    record_depths();
    return sol;
  }

  // Bracket: rate(lo) > R, rate(hi) ≤ R.
  double lo = 0.0;
  double hi = 1.0;
  LambdaProbe at_lo = free;
  LambdaProbe at_hi = search.probe(hi, diag.trace);
  while (at_hi.rate > budget) {
    if (++diag.doublings > cfg.max_doublings)
      throw NumericalError("no feasible Lagrange multiplier found within the doubling limit");
    lo = hi;
    at_lo = at_hi;
    hi *= 2.0;
    at_hi = search.probe(hi, diag.trace);
  }
  while (hi - lo > cfg.lambda_tol) {
    const double mid = 0.5 * (lo + hi);
    const LambdaProbe p = search.probe(mid, diag.trace);
    ++diag.bisections;
    if (p.rate <= budget) {
      hi = mid;
      at_hi = p;
    } else {
      lo = mid;
      at_lo = p;
    }
  }

  sol.lambda_star = hi;
  diag.threshold_below = at_lo.threshold;
  const std::uint64_t n_high = at_hi.threshold;
  if (n_high <= 1) {
    finish_pure(sol, search, n_high);
    record_depths();
    return sol;
  }

  const std::uint64_t n_low = n_high - 1;
  const RateAnalysis& high = search.rate(n_high);
  const RateAnalysis& low = search.rate(n_low);
  if (low.rate <= budget) {
    // The λ search skipped a threshold; the lower one is already feasible.
    finish_pure(sol, search, n_low);
    record_depths();
    return sol;
  }
  const double rho = mixing_weight(budget, high, low);
  if (rho >= 1.0) {
    finish_pure(sol, search, n_high);
    record_depths();
    return sol;
  }

  sol.regime = Regime::mixed;
  sol.n_high = n_high;
  sol.n_low = n_low;
  sol.rho_high = rho;
  sol.rate_high = high.rate;
  sol.rate_low = low.rate;
  sol.aoii_high = search.evaluator().g_for_threshold(n_high, 0.0);
  sol.aoii_low = search.evaluator().g_for_threshold(n_low, 0.0);
  const MixedChainAnalysis mixed =
      mixed_chain_analysis(n_low, rho, source, channel, penalty, cfg.rate());
  sol.predicted_rate = mixed.rate;
  sol.predicted_aoii = mixed.aoii;
  diag.mixed_depth = mixed.depth;
  record_depths();
  return sol;
}

}  // namespace aoii
