#include "aoii/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aoii {

void SeriesConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("solver.epsilon must be positive");
  if (!(weighted_epsilon > 0.0)) throw ConfigError("solver.weighted_epsilon must be positive");
  if (l_cap < 1) throw ConfigError("solver.l_cap must be at least 1");
}

SigmaSeries::SigmaSeries(const SourceModel& source, const ChannelModel& channel, SeriesConfig cfg)
    : source_(source), channel_(channel), cfg_(cfg), folded_(false) {
  cfg_.validate();
  std::uint64_t period = 0;
  if (channel.constant_success()) {
    period = 1;
  } else if (channel.round_length()) {
    period = *channel.round_length();
  }
  if (period > 0) {
    folded_ = true;
    gamma1_.reserve(period);
    gamma2_.reserve(period);
    for (std::uint64_t r = 0; r < period; ++r) {
      const auto g = gamma(source, channel, r);
      gamma1_.push_back(g.gamma1);
      gamma2_.push_back(g.gamma2);
    }
  }
}

void SigmaSeries::extend() {
  if (sigma_.empty()) {
    mass_.assign(1, 1.0);
    sigma_.push_back(1.0);
    return;
  }
  if (!folded_) {
    while (gamma1_.size() < mass_.size()) {
      const auto g = gamma(source_, channel_, gamma1_.size());
      gamma1_.push_back(g.gamma1);
      gamma2_.push_back(g.gamma2);
    }
  }

  std::vector<double> next(folded_ ? gamma1_.size() : mass_.size() + 1, 0.0);
  double reset = 0.0;
  for (std::size_t r = 0; r < mass_.size(); ++r) {
    const double m = mass_[r];
    if (m == 0.0) continue;
    reset += m * gamma2_[r];
    const std::size_t up = folded_ ? (r + 1) % gamma1_.size() : r + 1;
    next[up] += m * gamma1_[r];
  }
  next[0] += reset;
  if (!folded_) {
    while (next.size() > 1 && next.back() == 0.0) next.pop_back();
  }
  mass_ = std::move(next);

  double total = 0.0;
  for (double m : mass_) total += m;
  sigma_.push_back(total);
}

double SigmaSeries::operator[](std::size_t l) {
  if (l > cfg_.l_cap) {
    throw TruncationError("sigma series did not fall below epsilon within l_cap = " +
                          std::to_string(cfg_.l_cap) + " terms");
  }
  while (sigma_.size() <= l) extend();
  return sigma_[l];
}

SigmaSeriesResult sigma_series(const SourceModel& source, const ChannelModel& channel,
                               const SeriesConfig& cfg) {
  SigmaSeries series(source, channel, cfg);
  SigmaSeriesResult out;
  for (std::size_t l = 0;; ++l) {
    const double s = series[l];
    out.sigma.push_back(s);
    if (s < cfg.epsilon) {
      out.depth = l;
      return out;
    }
  }
}

ThresholdEvaluator::ThresholdEvaluator(const SourceModel& source, const ChannelModel& channel,
                                       const Penalty& penalty, SeriesConfig cfg,
                                       std::uint64_t n0_ceiling)
    : source_(source),
      channel_(channel),
      penalty_(penalty),
      sigma_(source, channel, cfg),
      n0_ceiling_(n0_ceiling) {}

double ThresholdEvaluator::sigma_sum() {
  if (!sigma_sum_) sigma_sum_ = sigma_.weighted_sum([](std::size_t) { return 1.0; });
  return *sigma_sum_;
}

double ThresholdEvaluator::weighted_sum(std::uint64_t delta) {
  return sigma_.weighted_sum([&](std::size_t l) { return penalty_(delta + l); });
}

double ThresholdEvaluator::g_for_threshold(std::uint64_t n0, double lambda) {
  if (n0 < 1) throw ConfigError("threshold must be at least 1");
  const double alpha = source_.alpha();
  const double keep = 1.0 - source_.mu();

  double waiting_cost = 0.0;
  double waiting_time = 0.0;
  double reach = 1.0;  // (1−μ)^i
  for (std::uint64_t i = 0; i + 2 <= n0; ++i) {
    waiting_cost += reach * penalty_(i + 1);
    waiting_time += reach;
    reach *= keep;
  }
  const double s = sigma_sum();
  const double numerator =
      penalty_(0) / (1.0 - alpha) + waiting_cost + reach * (weighted_sum(n0) + lambda * s);
  const double denominator = 1.0 / (1.0 - alpha) + waiting_time + reach * s;
  return numerator / denominator;
}

double ThresholdEvaluator::value_at(std::uint64_t delta, std::uint64_t n0, double lambda,
                                    double g) {
  if (delta < 1) throw ConfigError("value_at needs delta >= 1");
  if (delta >= n0) return weighted_sum(delta) + (lambda - g) * sigma_sum();

  const double keep = 1.0 - source_.mu();
  double reach = 1.0;
  double acc = 0.0;
  for (std::uint64_t i = 0; i < n0 - delta; ++i) {
    acc += reach * (penalty_(delta + i) - g);
    reach *= keep;
  }
  return acc + reach * value_at(n0, n0, lambda, g);
}

double ThresholdEvaluator::margin_with_scale(std::uint64_t n0, double lambda, double& scale) {
  ++evaluations_;
  const double g = g_for_threshold(n0, lambda);
  const double v0 = value_at(n0, n0, lambda, g);
  const double v1 = value_at(n0 + 1, n0, lambda, g);
  const double f0 = penalty_(n0);
  scale = std::max({1.0, std::abs(v0), std::abs(v1), std::abs(f0), std::abs(g)});
  return (1.0 - source_.mu()) * v1 - v0 + f0 - g;
}

double ThresholdEvaluator::threshold_margin(std::uint64_t n0, double lambda) {
  double scale = 0.0;
  return margin_with_scale(n0, lambda, scale);
}

bool ThresholdEvaluator::threshold_condition(std::uint64_t n0, double lambda) {
  double scale = 0.0;
  const double m = margin_with_scale(n0, lambda, scale);
  return m > 1e-12 * scale;
}

std::optional<std::uint64_t> ThresholdEvaluator::optimal_threshold(double lambda) {
  if (!source_.transmissions_useful()) return std::nullopt;
  if (threshold_condition(1, lambda)) return 1;

  // Exponential bracketing: condition false at lo, true at hi.
  std::uint64_t lo = 1;
  std::uint64_t hi = 2;
  while (!threshold_condition(hi, lambda)) {
    if (hi >= n0_ceiling_) {
      throw ThresholdNotFound("no threshold up to n0 = " + std::to_string(n0_ceiling_) +
                              " satisfies the optimality condition");
    }
    lo = hi;
    hi = std::min(2 * hi, n0_ceiling_);
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (threshold_condition(mid, lambda)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double g_for_threshold(std::uint64_t n0, double lambda, const SourceModel& source,
                       const ChannelModel& channel, const Penalty& penalty,
                       const SeriesConfig& cfg) {
  ThresholdEvaluator eval(source, channel, penalty, cfg);
  return eval.g_for_threshold(n0, lambda);
}

double value_at(std::uint64_t delta, std::uint64_t n0, double lambda, double g,
                const SourceModel& source, const ChannelModel& channel, const Penalty& penalty,
                const SeriesConfig& cfg) {
  ThresholdEvaluator eval(source, channel, penalty, cfg);
  return eval.value_at(delta, n0, lambda, g);
}

std::optional<std::uint64_t> optimal_threshold(double lambda, const SourceModel& source,
                                               const ChannelModel& channel,
                                               const Penalty& penalty, const SeriesConfig& cfg) {
  ThresholdEvaluator eval(source, channel, penalty, cfg);
  return eval.optimal_threshold(lambda);
}

double g_wait(const SourceModel& source, const Penalty& penalty, const SeriesConfig& cfg) {
  cfg.validate();
  const double alpha = source.alpha();
  const double mu = source.mu();
  const double denom = mu + 1.0 - alpha;

  if (penalty.kind() == Penalty::Kind::linear) {
    // Σ_{i≥1} (1−μ)^{i−1} i = 1/μ².
    return (1.0 - alpha) / (mu * denom);
  }

  // Σ_{i≥1} (1−μ)^{i−1} f(i), summed to stabilisation.
  const double keep = 1.0 - mu;
  double reach = 1.0;
  double series = 0.0;
  double prev = 0.0;
  for (std::uint64_t i = 1; i <= cfg.l_cap; ++i) {
    const double term = reach * penalty(i);
    series += term;
    if (reach < cfg.epsilon && term < cfg.weighted_epsilon) {
      if (i > 1 && !(term / prev < 1.0)) break;
      return mu * (penalty(0) + (1.0 - alpha) * series) / denom;
    }
    prev = term;
    reach *= keep;
  }
  throw DivergenceError("waiting-cost series failed to converge");
}

LagrangianSolution solve_lagrangian(double lambda, const SourceModel& source,
                                    const ChannelModel& channel, const Penalty& penalty,
                                    const SeriesConfig& cfg) {
  LagrangianSolution out;
  out.lambda = lambda;
  if (!source.transmissions_useful()) {
    out.g = g_wait(source, penalty, cfg);
    return out;
  }
  ThresholdEvaluator eval(source, channel, penalty, cfg);
  out.n0_star = eval.optimal_threshold(lambda);
  out.g = eval.g_for_threshold(*out.n0_star, lambda);
  out.sigma_sum = eval.sigma_sum();
  out.weighted_sum = eval.weighted_sum(*out.n0_star);
  out.truncation_depth = eval.truncation_depth();
  return out;
}

}  // namespace aoii
