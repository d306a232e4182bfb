#include "aoii/rvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aoii/errors.hpp"

namespace aoii {

void RviConfig::validate() const {
  if (delta_max < 2) throw ConfigError("rvi.delta_max must be at least 2");
  if (r_cap < 1) throw ConfigError("rvi.r_cap must be at least 1");
  if (max_iters < 1) throw ConfigError("rvi.max_iters must be at least 1");
  if (!(span_tol > 0.0)) throw ConfigError("rvi.span_tol must be positive");
}

namespace {

struct Grid {
  std::uint64_t dmax;
  std::uint64_t rdim;
  bool wraps;
  std::vector<double> cost;
  std::vector<double> gamma1;
  std::vector<double> gamma2;

  std::uint64_t up_delta(std::uint64_t d) const { return std::min(d + 1, dmax); }
  std::uint64_t up_count(std::uint64_t d, std::uint64_t r) const {
    const std::uint64_t next = wraps ? (r + 1) % rdim : std::min(r + 1, rdim - 1);
    return std::min(next, up_delta(d));
  }
};

// Expected next-step values of both actions at (d, r), d ≥ 1.
inline void action_values(const Grid& grid, const std::vector<double>& v, double mu,
                          std::uint64_t d, std::uint64_t r, double& wait, double& send) {
  const std::uint64_t d1 = grid.up_delta(d);
  const double v00 = v[0];
  const double vd0 = v[d1 * grid.rdim];
  const double vdr = v[d1 * grid.rdim + grid.up_count(d, r)];
  const double g1 = grid.gamma1[r];
  const double g2 = grid.gamma2[r];
  wait = (1.0 - mu) * vd0 + mu * v00;
  send = g1 * vdr + g2 * vd0 + (1.0 - g1 - g2) * v00;
}

inline bool prefer_transmit(double wait, double send_with_price) {
  return send_with_price < wait - 1e-12 * std::max(1.0, std::abs(wait));
}

}  // namespace

RviSolution rvi_solve(double lambda, const SourceModel& source, const ChannelModel& channel,
                      const Penalty& penalty, const RviConfig& cfg) {
  cfg.validate();
  Grid grid;
  grid.dmax = cfg.delta_max;
  const auto round = channel.round_length();
  grid.wraps = round && *round <= grid.dmax + 1;
  grid.rdim = std::min(grid.wraps ? *round : cfg.r_cap + 1, grid.dmax + 1);
  grid.cost.resize(grid.dmax + 1);
  for (std::uint64_t d = 0; d <= grid.dmax; ++d) grid.cost[d] = penalty(d);
  for (std::uint64_t r = 0; r < grid.rdim; ++r) {
    const auto g = gamma(source, channel, r);
    grid.gamma1.push_back(g.gamma1);
    grid.gamma2.push_back(g.gamma2);
  }

  const double alpha = source.alpha();
  const double mu = source.mu();
  const std::size_t cells = (grid.dmax + 1) * grid.rdim;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> v(cells, nan);
  std::vector<double> tv(cells, nan);
  for (std::uint64_t d = 0; d <= grid.dmax; ++d)
    for (std::uint64_t r = 0; r < grid.rdim && r <= d; ++r) v[d * grid.rdim + r] = grid.cost[d];

  RviSolution sol;
  sol.delta_max = grid.dmax;
  sol.r_dim = grid.rdim;

  for (std::uint64_t it = 1; it <= cfg.max_iters; ++it) {
    // (0,0): both actions move the AoII identically and transmitting adds λ ≥ 0.
    tv[0] = grid.cost[0] + alpha * v[0] + (1.0 - alpha) * v[grid.rdim];
    double lo = tv[0] - v[0];
    double hi = lo;
    for (std::uint64_t d = 1; d <= grid.dmax; ++d) {
      const std::uint64_t rend = std::min(grid.rdim, d + 1);
      for (std::uint64_t r = 0; r < rend; ++r) {
        double wait = 0.0;
        double send = 0.0;
        action_values(grid, v, mu, d, r, wait, send);
        const std::size_t i = d * grid.rdim + r;
        tv[i] = grid.cost[d] + std::min(wait, lambda + send);
        const double diff = tv[i] - v[i];
        lo = std::min(lo, diff);
        hi = std::max(hi, diff);
      }
    }
    const double anchor = tv[0];
    sol.g = tv[0] - v[0];
    for (std::size_t i = 0; i < cells; ++i) v[i] = tv[i] - anchor;
    sol.iterations = it;
    sol.final_span = hi - lo;
    if (hi - lo <= cfg.span_tol) {
      sol.converged = true;
      break;
    }
  }

  sol.transmit.assign(cells, 0);
  for (std::uint64_t d = 1; d <= grid.dmax; ++d) {
    const std::uint64_t rend = std::min(grid.rdim, d + 1);
    for (std::uint64_t r = 0; r < rend; ++r) {
      double wait = 0.0;
      double send = 0.0;
      action_values(grid, v, mu, d, r, wait, send);
      sol.transmit[d * grid.rdim + r] = prefer_transmit(wait, lambda + send) ? 1 : 0;
    }
  }
  sol.values = std::move(v);
  return sol;
}

std::map<std::uint64_t, std::uint64_t> extract_thresholds(const RviSolution& sol) {
  if (!sol.converged) throw NumericalError("thresholds requested from a non-converged RVI run");
  std::map<std::uint64_t, std::uint64_t> out;
  for (std::uint64_t r = 0; r < sol.r_dim; ++r) {
    for (std::uint64_t d = std::max<std::uint64_t>(r, 1); d <= sol.delta_max; ++d) {
      if (sol.action(d, r) == Action::transmit) {
        out[r] = d;
        break;
      }
    }
  }
  return out;
}

}  // namespace aoii
