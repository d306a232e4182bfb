#include "aoii/rate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "aoii/errors.hpp"

namespace aoii {

namespace {

// Π_{j<r} γ1(j) for r = 0, 1, ... until the product underflows to zero.
// Switches to log-space accumulation once the running product drops below
// 1e-300.
std::vector<double> gamma1_prefix_products(const SourceModel& source,
                                           const ChannelModel& channel) {
  std::vector<double> out{1.0};
  double linear = 1.0;
  double log_sum = 0.0;
  bool in_log = false;
  for (std::uint64_t j = 0;; ++j) {
    const double g1 = gamma(source, channel, j).gamma1;
    if (g1 == 0.0) break;
    log_sum += std::log(g1);
    if (!in_log) {
      linear *= g1;
      if (linear < 1e-300) in_log = true;
    }
    const double value = in_log ? std::exp(log_sum) : linear;
    if (value == 0.0) break;
    out.push_back(value);
  }
  return out;
}

// Layer-by-layer evaluation of the m(h, r) recursion.
class MRecursion {
 public:
  MRecursion(const SourceModel& source, const ChannelModel& channel)
      : prefix_(gamma1_prefix_products(source, channel)) {
    gamma2_.reserve(prefix_.size());
    for (std::size_t k = 0; k < prefix_.size(); ++k)
      gamma2_.push_back(gamma(source, channel, k).gamma2);
  }

  // Appends layer h = m0_.size() and returns its row m(h, ·).
  std::vector<double> next_row() {
    const std::size_t h = m0_.size();
    double m_h0 = 0.0;
    if (h == 0) {
      m_h0 = 1.0;
    } else {
      const std::size_t kmax = std::min(h - 1, prefix_.size() - 1);
      for (std::size_t k = 0; k <= kmax; ++k) m_h0 += gamma2_[k] * m0_[h - k - 1] * prefix_[k];
    }
    m0_.push_back(m_h0);

    const std::size_t rmax = std::min(h, prefix_.size() - 1);
    std::vector<double> row(rmax + 1);
    for (std::size_t r = 0; r <= rmax; ++r) row[r] = m0_[h - r] * prefix_[r];
    while (row.size() > 1 && row.back() == 0.0) row.pop_back();
    return row;
  }

 private:
  std::vector<double> prefix_;
  std::vector<double> gamma2_;
  std::vector<double> m0_;
};

double row_sum(const std::vector<double>& row) {
  double s = 0.0;
  for (double v : row) s += v;
  return s;
}

// Geometric extrapolation of the remaining layers from the last two.
double tail_estimate(double previous, double current) {
  if (current == 0.0) return 0.0;
  if (previous <= 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = current / previous;
  if (!(ratio < 1.0)) return std::numeric_limits<double>::infinity();
  return current * ratio / (1.0 - ratio);
}

void check_rate_config(const RateConfig& cfg) {
  if (!(cfg.tail_tol > 0.0)) throw ConfigError("solver.tail_tol must be positive");
  if (cfg.h_ceiling < 1) throw ConfigError("rate h_ceiling must be at least 1");
}

}  // namespace

double MTable::at(std::size_t h, std::size_t r) const {
  if (h >= rows_.size()) throw std::out_of_range("MTable: h beyond h_max");
  const auto& row = rows_[h];
  return r < row.size() ? row[r] : 0.0;
}

double MTable::layer(std::size_t h) const { return row_sum(rows_.at(h)); }

MTable m_table(const SourceModel& source, const ChannelModel& channel, std::size_t h_max) {
  MRecursion rec(source, channel);
  std::vector<std::vector<double>> rows;
  rows.reserve(h_max + 1);
  for (std::size_t h = 0; h <= h_max; ++h) rows.push_back(rec.next_row());
  return MTable(std::move(rows));
}

double StationaryDistribution::at(std::uint64_t delta, std::uint64_t r) const {
  if (delta >= rows_.size()) return 0.0;
  const auto& row = rows_[delta];
  return r < row.size() ? row[r] : 0.0;
}

double StationaryDistribution::total() const { return mass_from(0); }

double StationaryDistribution::mass_from(std::uint64_t from) const {
  double s = 0.0;
  for (std::uint64_t d = from; d < rows_.size(); ++d) s += row_sum(rows_[d]);
  return s;
}

RateAnalysis achieved_rate(std::uint64_t n0, const SourceModel& source,
                           const ChannelModel& channel, const RateConfig& cfg) {
  if (n0 < 1) throw ConfigError("threshold must be at least 1");
  check_rate_config(cfg);
  const double alpha = source.alpha();
  const double keep = 1.0 - source.mu();

  // Σ_{k=1}^{n0−1} (1−μ)^{k−1} and (1−μ)^{n0−1}.
  double below = 0.0;
  double reach = 1.0;
  for (std::uint64_t k = 1; k < n0; ++k) {
    below += reach;
    reach *= keep;
  }

  MRecursion rec(source, channel);
  std::vector<std::vector<double>> layers;
  double layer_total = 0.0;
  double previous = 0.0;
  double tail = 0.0;
  for (std::size_t h = 0;; ++h) {
    if (h > cfg.h_ceiling) {
      throw TruncationError("stationary layers did not fall below tail_tol within " +
                            std::to_string(cfg.h_ceiling) + " layers");
    }
    layers.push_back(rec.next_row());
    const double current = row_sum(layers.back());
    layer_total += current;
    // q00 from the partial sum upper-bounds the true q00, so this test is conservative.
    const double q00_bound = 1.0 / (1.0 + (1.0 - alpha) * (below + reach * layer_total));
    const double scale = q00_bound * (1.0 - alpha) * reach;
    if (h >= 1) {
      tail = tail_estimate(previous, current);
      if (scale * current < cfg.tail_tol && scale * tail < cfg.tail_tol) break;
    }
    previous = current;
  }

  RateAnalysis out;
  out.n0 = n0;
  out.q00 = 1.0 / (1.0 + (1.0 - alpha) * (below + reach * layer_total));
  const double entry = out.q00 * (1.0 - alpha) * reach;  // q(n0, 0)
  out.rate = entry * layer_total;
  out.truncation_mass = entry * tail;
  out.depth = layers.size();

  std::vector<std::vector<double>> rows;
  rows.reserve(n0 + layers.size());
  rows.push_back({out.q00});
  double level = (1.0 - alpha) * out.q00;
  for (std::uint64_t k = 1; k < n0; ++k) {
    rows.push_back({level});
    level *= keep;
  }
  for (auto& layer : layers) {
    for (double& v : layer) v *= entry;
    rows.push_back(std::move(layer));
  }
  out.stationary = StationaryDistribution(std::move(rows));
  return out;
}

MixedChainAnalysis mixed_chain_analysis(std::uint64_t n_low, double rho_high,
                                        const SourceModel& source, const ChannelModel& channel,
                                        const Penalty& penalty, const RateConfig& cfg) {
  if (n_low < 1) throw ConfigError("n_low must be at least 1");
  if (!(rho_high >= 0.0 && rho_high <= 1.0)) throw ConfigError("rho_high must lie in [0,1]");
  check_rate_config(cfg);
  const double alpha = source.alpha();
  const double mu = source.mu();
  const double transmit_low = 1.0 - rho_high;

  std::vector<double> g1_cache;
  std::vector<double> g2_cache;
  auto gammas = [&](std::size_t r) {
    while (g1_cache.size() <= r) {
      const auto g = gamma(source, channel, g1_cache.size());
      g1_cache.push_back(g.gamma1);
      g2_cache.push_back(g.gamma2);
    }
    return std::pair{g1_cache[r], g2_cache[r]};
  };

  // Unnormalised measure with q(0,0) = 1.
  std::vector<std::vector<double>> rows;
  rows.push_back({1.0});
  double total = 1.0;
  double cost = penalty(0);
  double level = 1.0 - alpha;
  for (std::uint64_t k = 1; k <= n_low; ++k) {
    rows.push_back({level});
    total += level;
    cost += penalty(k) * level;
    if (k < n_low) level *= 1.0 - mu;
  }
  const double at_low = rows.back()[0];
  double transmissions = transmit_low * at_low;

  const auto [g1_0, g2_0] = gammas(0);
  std::vector<double> v{at_low * (rho_high * (1.0 - mu) + transmit_low * g2_0),
                        at_low * transmit_low * g1_0};
  while (v.size() > 1 && v.back() == 0.0) v.pop_back();

  double previous = 0.0;
  double tail = 0.0;
  std::size_t depth = 0;
  for (std::uint64_t delta = n_low + 1;; ++delta, ++depth) {
    if (depth > cfg.h_ceiling) {
      throw TruncationError("mixed chain layers did not fall below tail_tol within " +
                            std::to_string(cfg.h_ceiling) + " layers");
    }
    const double current = row_sum(v);
    total += current;
    cost += penalty(delta) * current;
    transmissions += current;

    std::vector<double> next(v.size() + 1, 0.0);
    for (std::size_t r = 0; r < v.size(); ++r) {
      const auto [g1, g2] = gammas(r);
      next[0] += v[r] * g2;
      next[r + 1] += v[r] * g1;
    }
    while (next.size() > 1 && next.back() == 0.0) next.pop_back();
    rows.push_back(std::move(v));
    v = std::move(next);

    if (depth >= 1) {
      tail = tail_estimate(previous, current);
      if (current / total < cfg.tail_tol && tail / total < cfg.tail_tol) break;
    }
    previous = current;
  }

  for (auto& row : rows)
    for (double& x : row) x /= total;

  MixedChainAnalysis out;
  out.n_low = n_low;
  out.rho_high = rho_high;
  out.rate = transmissions / total;
  out.aoii = cost / total;
  out.truncation_mass = tail / total;
  out.depth = depth + 1;
  out.stationary = StationaryDistribution(std::move(rows));
  return out;
}

StationaryDistribution kernel_stationary(const TransmitProbability& policy,
                                         const SourceModel& source, const ChannelModel& channel,
                                         double tail_tol, std::uint64_t delta_cap) {
  // Visits per cycle; the cycle leaves (0,0) once and ends on re-entry.
  std::vector<std::vector<double>> rows{{1.0}};
  std::vector<double> layer{1.0 - source.alpha()};
  double total = 1.0;
  for (std::uint64_t delta = 1;; ++delta) {
    double layer_mass = 0.0;
    for (double w : layer) layer_mass += w;
    total += layer_mass;
    rows.push_back(layer);
    if (layer_mass < tail_tol * total) break;
    if (delta >= delta_cap)
      throw TruncationError("stationary support exceeded " + std::to_string(delta_cap) +
                            " AoII levels");

    std::vector<double> next(layer.size() + 1, 0.0);
    for (std::uint64_t r = 0; r < layer.size(); ++r) {
      const double w = layer[r];
      if (w == 0.0) continue;
      const State s{delta, r};
      const double pt = policy(s);
      for (const Action a : {Action::wait, Action::transmit}) {
        const double pa = a == Action::transmit ? pt : 1.0 - pt;
        if (pa == 0.0) continue;
        for (const Outcome& o : transition_dist(s, a, source, channel))
          if (o.next.delta != 0) next[o.next.r] += w * pa * o.prob;
      }
    }
    while (next.size() > 1 && next.back() == 0.0) next.pop_back();
    layer = std::move(next);
  }
  for (auto& row : rows)
    for (double& x : row) x /= total;
  return StationaryDistribution(std::move(rows));
}

double transmit_fraction(const StationaryDistribution& q, const TransmitProbability& policy) {
  double sum = 0.0;
  for (std::uint64_t d = 1; d <= q.max_delta(); ++d) {
    const auto& row = q.row(d);
    for (std::uint64_t r = 0; r < row.size(); ++r)
      if (row[r] != 0.0) sum += row[r] * policy(State{d, r});
  }
  return sum;
}

}  // namespace aoii
