#include "aoii/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aoii/errors.hpp"

namespace aoii {

namespace {

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

SourceModel::SourceModel(double alpha, double mu, std::optional<std::uint32_t> n_states)
    : alpha_(alpha), mu_(mu), n_states_(n_states) {
  if (!open_unit(alpha)) throw ConfigError("source.alpha must lie in (0,1)");
  if (!open_unit(mu)) throw ConfigError("source.mu must lie in (0,1)");
  if (alpha + mu > 1.0 + 1e-12) throw ConfigError("source.alpha + source.mu must not exceed 1");
  if (n_states) {
    if (*n_states < 2) throw ConfigError("source.n_states must be at least 2");
    const double residual = (static_cast<double>(*n_states) - 1.0) * mu + alpha - 1.0;
    if (std::abs(residual) > 1e-12)
      throw ConfigError("source: (n_states - 1)*mu + alpha must equal 1");
  }
}

SourceModel SourceModel::from_states(double alpha, std::uint32_t n_states) {
  if (n_states < 2) throw ConfigError("source.n_states must be at least 2");
  return SourceModel(alpha, (1.0 - alpha) / (static_cast<double>(n_states) - 1.0), n_states);
}

ChannelModel::ChannelModel(double p_e, double c, std::optional<std::uint64_t> r_max,
                           Combining combining)
    : p_e_(p_e), c_(c), r_max_(r_max), combining_(combining) {
  if (!open_unit(p_e)) throw ConfigError("channel.p_e must lie in (0,1)");
  if (!(c > 0.0 && c <= 1.0)) throw ConfigError("channel.c must lie in (0,1]");
}

std::optional<std::uint64_t> ChannelModel::round_length() const {
  if (!r_max_) return std::nullopt;
  return *r_max_ + 1;
}

double ChannelModel::p_success(std::uint64_t r) const {
  if (combining_ == Combining::none) return 1.0 - p_e_;
  const std::uint64_t k = r_max_ ? r % (*r_max_ + 1) : r;
  return 1.0 - p_e_ * std::pow(c_, static_cast<double>(k));
}

Penalty Penalty::linear() { return Penalty(Kind::linear, 1.0, {}); }

Penalty Penalty::power(double exponent) {
  if (!(exponent >= 1.0) || !std::isfinite(exponent))
    throw ConfigError("penalty.exponent must be a finite number >= 1");
  return Penalty(Kind::power, exponent, {});
}

Penalty Penalty::table(std::vector<double> values) {
  if (values.size() < 2) throw ConfigError("penalty.values needs at least two entries");
  if (!(values.front() >= 0.0)) throw ConfigError("penalty.values must be nonnegative");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !(values[i] > values[i - 1]))
      throw ConfigError("penalty.values must be finite and strictly increasing");
  }
  return Penalty(Kind::table, 1.0, std::move(values));
}

double Penalty::operator()(std::uint64_t delta) const {
  const auto d = static_cast<double>(delta);
  switch (kind_) {
    case Kind::linear:
      return d;
    case Kind::power:
      return std::pow(d, exponent_);
    case Kind::table: {
      if (delta < values_.size()) return values_[delta];
      const std::size_t last = values_.size() - 1;
      const double step = values_[last] - values_[last - 1];
      return values_[last] + step * static_cast<double>(delta - last);
    }
  }
  return d;
}

std::string Penalty::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::linear: os << "linear"; break;
    case Kind::power: os << "power(" << exponent_ << ")"; break;
    case Kind::table: os << "table[" << values_.size() << "]"; break;
  }
  return os.str();
}

GammaPair gamma(const SourceModel& source, const ChannelModel& channel, std::uint64_t r) {
  const double fail = 1.0 - channel.p_success(r);
  return {source.alpha() * fail, 1.0 - source.alpha() - source.mu() * fail};
}

void TransitionSet::add(State next, double prob, double decoded) {
  items_.at(size_) = Outcome{next, prob, decoded};
  ++size_;
}

double TransitionSet::total() const {
  double s = 0.0;
  for (const auto& o : *this) s += o.prob;
  return s;
}

double TransitionSet::prob_of(State s) const {
  double p = 0.0;
  for (const auto& o : *this)
    if (o.next == s) p += o.prob;
  return p;
}

TransitionSet transition_dist(State state, Action action, const SourceModel& source,
                              const ChannelModel& channel) {
  if (state.delta == 0 && state.r != 0)
    throw ConfigError("state with zero AoII must have zero transmission count");
  if (state.r > state.delta) throw ConfigError("transmission count cannot exceed the AoII");

  const double alpha = source.alpha();
  const double mu = source.mu();
  TransitionSet out;

  if (state.delta == 0) {
    // The count is frozen at zero, so both actions move δ identically.
    const double p = action == Action::transmit ? channel.p_success(0) : 0.0;
    out.add({0, 0}, alpha, alpha * p);
    out.add({1, 0}, 1.0 - alpha, (1.0 - alpha) * p);
    return out;
  }

  if (action == Action::wait) {
    out.add({0, 0}, mu);
    out.add({state.delta + 1, 0}, 1.0 - mu);
    return out;
  }

  const double p = channel.p_success(state.r);
  const auto [g1, g2] = gamma(source, channel, state.r);
  out.add({0, 0}, 1.0 - g1 - g2, alpha * p);
  out.add({state.delta + 1, 0}, g2, (1.0 - alpha) * p);
  out.add({state.delta + 1, state.r + 1}, g1, 0.0);
  return out;
}

bool validate_boundedness(const SourceModel& source, const ChannelModel& channel,
                          const Penalty& penalty, double tol, std::uint64_t l_cap) {
  const auto [g1, g2] = gamma(source, channel, 0);
  const double ratio0 = g1 + g2;
  if (!(ratio0 < 1.0) || !(ratio0 >= 0.0)) return false;

  double power = 1.0;
  double sum = 0.0;
  double prev = 0.0;
  for (std::uint64_t l = 1; l <= l_cap; ++l) {
    power *= ratio0;
    const double term = penalty(l + 1) * power;
    if (!std::isfinite(term)) return false;
    sum += term;
    if (term == 0.0) return true;  // geometric factor underflowed
    if (l >= 2) {
      const double ratio = term / prev;
      if (ratio < 1.0 && term * ratio / (1.0 - ratio) <= tol * std::max(1.0, sum)) return true;
    }
    prev = term;
  }
  return false;
}

}  // namespace aoii
