#include "aoii/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "aoii/errors.hpp"
#include "aoii/lagrangian.hpp"
#include "aoii/rate.hpp"

namespace aoii {

using nlohmann::json;

const char* const kSweepHeader =
    "R,n_high,n_low,rho_high,rate_analytic,aoii_analytic,rate_sim,aoii_sim,aoii_periodic,"
    "aoii_sim_stderr,aoii_periodic_stderr,status";

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

namespace {

// Reads one JSON object, remembering which keys were consumed so the rest
// can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  std::string field(const std::string& key) const { return path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key) + ": missing required field");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key) + ": expected a finite number");
    return x;
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t count(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(field(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : fallback;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number())
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::uint64_t> counts(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of integers");
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned())
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a nonnegative integer");
      out.push_back(v[i].get<std::uint64_t>());
    }
    return out;
  }

  Section child(const std::string& key) { return Section(raw(key), field(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Rethrows model constructor failures with the section name attached.
template <typename F>
auto in_section(const std::string& name, F&& build) {
  try {
    return build();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(name, 0) == 0) throw;
    throw ConfigError(name + ": " + msg);
  }
}

SourceModel read_source(Section s, json& resolved) {
  const double alpha = s.number("alpha");
  std::optional<std::uint32_t> n_states;
  std::optional<double> mu;
  if (s.has("n_states")) {
    const auto n = s.count("n_states");
    if (n < 2 || n > 0xFFFFFFFFULL) throw ConfigError(s.field("n_states") + ": must be at least 2");
    n_states = static_cast<std::uint32_t>(n);
  }
  if (s.has("mu")) mu = s.number("mu");
  s.finish();
  if (!n_states && !mu) throw ConfigError("source: one of n_states or mu is required");
  SourceModel src = in_section("source", [&] {
    return mu ? SourceModel(alpha, *mu, n_states) : SourceModel::from_states(alpha, *n_states);
  });
  resolved["alpha"] = src.alpha();
  resolved["mu"] = src.mu();
  resolved["n_states"] = n_states ? json(*n_states) : json(nullptr);
  return src;
}

ChannelModel read_channel(Section s, json& resolved) {
  const double p_e = s.number("p_e");
  const double c = s.number("c");
  std::optional<std::uint64_t> r_max;
  if (s.has("r_max")) r_max = s.count("r_max");
  const std::string comb = s.text("combining", "soft");
  s.finish();
  Combining combining;
  if (comb == "soft") {
    combining = Combining::soft;
  } else if (comb == "none") {
    combining = Combining::none;
  } else {
    throw ConfigError("channel.combining: expected \"soft\" or \"none\"");
  }
  ChannelModel ch = in_section("channel", [&] { return ChannelModel(p_e, c, r_max, combining); });
  resolved["p_e"] = p_e;
  resolved["c"] = c;
  resolved["r_max"] = r_max ? json(*r_max) : json(nullptr);
  resolved["combining"] = comb;
  return ch;
}

Penalty read_penalty(Section s, json& resolved) {
  const std::string kind = s.text("kind", "linear");
  std::optional<Penalty> pen;
  if (kind == "linear") {
    pen = Penalty::linear();
  } else if (kind == "power") {
    const double e = s.number("exponent");
    pen = in_section("penalty", [&] { return Penalty::power(e); });
    resolved["exponent"] = e;
  } else if (kind == "table") {
    auto values = s.numbers("values");
    pen = in_section("penalty", [&] { return Penalty::table(values); });
    resolved["values"] = values;
  } else {
    throw ConfigError("penalty.kind: expected \"linear\", \"power\" or \"table\"");
  }
  s.finish();
  resolved["kind"] = kind;
  return *pen;
}

std::vector<double> read_budget(Section s, json& resolved) {
  const bool single = s.has("R");
  const bool grid = s.has("R_grid");
  if (single == grid) throw ConfigError("budget: exactly one of R or R_grid is required");
  std::vector<double> out;
  if (single) {
    out.push_back(s.number("R"));
  } else {
    out = s.numbers("R_grid");
    if (out.empty()) throw ConfigError("budget.R_grid: must not be empty");
    for (std::size_t i = 1; i < out.size(); ++i)
      if (!(out[i] > out[i - 1])) throw ConfigError("budget.R_grid: must be strictly increasing");
  }
  for (double r : out)
    if (!(r > 0.0 && r <= 1.0))
      throw ConfigError(std::string("budget.") + (single ? "R" : "R_grid") + ": values must lie in (0,1]");
  s.finish();
  resolved[single ? "R" : "R_grid"] = single ? json(out.front()) : json(out);
  return out;
}

SolverConfig read_solver(std::optional<Section> s, json& resolved) {
  SolverConfig cfg;
  if (s) {
    cfg.series.epsilon = s->number("epsilon", cfg.series.epsilon);
    cfg.series.weighted_epsilon = s->number("weighted_epsilon", cfg.series.weighted_epsilon);
    cfg.series.l_cap = s->count("l_cap", cfg.series.l_cap);
    cfg.lambda_tol = s->number("lambda_tol", cfg.lambda_tol);
    cfg.tail_tol = s->number("tail_tol", cfg.tail_tol);
    const auto doublings = s->count("max_doublings", cfg.max_doublings);
    if (doublings > 1024) throw ConfigError("solver.max_doublings: must not exceed 1024");
    cfg.max_doublings = static_cast<std::uint32_t>(doublings);
    cfg.n0_ceiling = s->count("n0_ceiling", cfg.n0_ceiling);
    s->finish();
  }
  in_section("solver", [&] {
    cfg.validate();
    return 0;
  });
  resolved = {{"epsilon", cfg.series.epsilon},
              {"weighted_epsilon", cfg.series.weighted_epsilon},
              {"l_cap", cfg.series.l_cap},
              {"lambda_tol", cfg.lambda_tol},
              {"tail_tol", cfg.tail_tol},
              {"max_doublings", cfg.max_doublings},
              {"n0_ceiling", cfg.n0_ceiling}};
  return cfg;
}

SimSettings read_sim(std::optional<Section> s, json& resolved) {
  SimSettings sim;
  if (s) {
    sim.horizon = s->count("horizon", sim.horizon);
    sim.seed = s->count("seed", sim.seed);
    sim.n_reps = s->count("n_reps", sim.n_reps);
    const auto threads = s->count("threads", sim.threads);
    if (threads < 1 || threads > 256) throw ConfigError("sim.threads: must lie in [1,256]");
    sim.threads = static_cast<unsigned>(threads);
    s->finish();
  }
  if (sim.horizon < 1) throw ConfigError("sim.horizon: must be at least 1");
  if (sim.n_reps < 1) throw ConfigError("sim.n_reps: must be at least 1");
  resolved = {{"horizon", sim.horizon},
              {"seed", sim.seed},
              {"n_reps", sim.n_reps},
              {"threads", sim.threads}};
  return sim;
}

RviConfig read_rvi(std::optional<Section> s, json& resolved) {
  RviConfig cfg;
  if (s) {
    cfg.delta_max = s->count("delta_max", cfg.delta_max);
    cfg.r_cap = s->count("r_cap", cfg.r_cap);
    cfg.max_iters = s->count("max_iters", cfg.max_iters);
    cfg.span_tol = s->number("span_tol", cfg.span_tol);
    s->finish();
  }
  in_section("rvi", [&] {
    cfg.validate();
    return 0;
  });
  resolved = {{"delta_max", cfg.delta_max},
              {"r_cap", cfg.r_cap},
              {"max_iters", cfg.max_iters},
              {"span_tol", cfg.span_tol}};
  return cfg;
}

std::optional<Policy> read_policy(Section s, json& resolved) {
  const std::string kind = s.text("kind", "optimal");
  std::optional<Policy> policy;
  resolved["kind"] = kind;
  if (kind == "optimal") {
  } else if (kind == "never") {
    policy = Policy(NeverTransmit{});
  } else if (kind == "threshold") {
    const auto n0 = s.count("n0");
    policy = in_section("policy", [&] { return Policy(ThresholdPolicy{n0}); });
    resolved["n0"] = n0;
  } else if (kind == "mixed") {
    const auto n_low = s.count("n_low");
    const double rho = s.number("rho_high");
    policy = in_section("policy", [&] { return Policy(MixedPolicy{n_low, rho}); });
    resolved["n_low"] = n_low;
    resolved["rho_high"] = rho;
  } else if (kind == "periodic") {
    const double r = s.number("R");
    policy = in_section("policy", [&] { return Policy(PeriodicPolicy{r}); });
    resolved["R"] = r;
  } else {
    throw ConfigError(
        "policy.kind: expected \"optimal\", \"never\", \"threshold\", \"mixed\" or \"periodic\"");
  }
  s.finish();
  return policy;
}

ValidateSettings read_validate(std::optional<Section> s, json& resolved) {
  ValidateSettings v;
  if (s) {
    if (s->has("lambdas")) v.lambdas = s->numbers("lambdas");
    if (s->has("rate_thresholds")) v.rate_thresholds = s->counts("rate_thresholds");
    v.perturb_gamma = s->number("perturb_gamma", v.perturb_gamma);
    s->finish();
  }
  for (double l : v.lambdas)
    if (!(l >= 0.0)) throw ConfigError("validate.lambdas: values must be nonnegative");
  for (auto n : v.rate_thresholds)
    if (n < 1) throw ConfigError("validate.rate_thresholds: values must be at least 1");
  resolved = {{"lambdas", v.lambdas},
              {"rate_thresholds", v.rate_thresholds},
              {"perturb_gamma", v.perturb_gamma}};
  return v;
}

std::optional<Section> optional_section(Section& top, const std::string& key) {
  if (!top.has(key)) return std::nullopt;
  return top.child(key);
}

void write_header(std::ostream& out, const std::string& command, const RunConfig& cfg) {
  out << "# aoii " << command << "\n# config: " << cfg.resolved << "\n";
}

std::string opt_count(const std::optional<std::uint64_t>& n) {
  return n ? std::to_string(*n) : std::string("none");
}

const std::vector<double>& require_budget(const RunConfig& cfg) {
  if (cfg.budgets.empty()) throw ConfigError("budget: section is required for this command");
  return cfg.budgets;
}

Policy optimal_policy(const CmdpSolution& sol) {
  switch (sol.regime) {
    case Regime::never_transmit: return Policy(NeverTransmit{});
    case Regime::pure_threshold: return Policy(ThresholdPolicy{*sol.n_high});
    case Regime::mixed: return Policy(MixedPolicy{*sol.n_low, sol.rho_high});
  }
  return Policy(NeverTransmit{});
}

SimReport run_sim(const RunConfig& cfg, const Policy& policy) {
  return replicate(policy, cfg.source, cfg.channel, cfg.penalty, cfg.sim.horizon, cfg.sim.seed,
                   cfg.sim.n_reps, cfg.sim.threads);
}

void write_solution(std::ostream& out, const CmdpSolution& sol) {
  const auto& d = sol.diagnostics;
  out << "regime = " << to_string(sol.regime) << "\n"
      << "budget = " << format_number(sol.budget) << "\n"
      << "lambda_star = " << format_number(sol.lambda_star) << "\n"
      << "n_high = " << opt_count(sol.n_high) << "\n"
      << "n_low = " << opt_count(sol.n_low) << "\n"
      << "rho_high = " << format_number(sol.rho_high) << "\n"
      << "rate_high = " << format_number(sol.rate_high) << "\n"
      << "rate_low = " << format_number(sol.rate_low) << "\n"
      << "aoii_high = " << format_number(sol.aoii_high) << "\n"
      << "aoii_low = " << format_number(sol.aoii_low) << "\n"
      << "predicted_rate = " << format_number(sol.predicted_rate) << "\n"
      << "predicted_aoii = " << format_number(sol.predicted_aoii) << "\n"
      << "sigma_depth = " << d.sigma_depth << "\n"
      << "rate_depth = " << d.rate_depth << "\n"
      << "mixed_depth = " << d.mixed_depth << "\n"
      << "doublings = " << d.doublings << "\n"
      << "bisections = " << d.bisections << "\n"
      << "condition_evaluations = " << d.condition_evaluations << "\n"
      << "threshold_below = " << opt_count(d.threshold_below) << "\n";
}

void write_report(std::ostream& out, const SimReport& rep) {
  out << "horizon = " << rep.horizon << "\n"
      << "seed = " << rep.seed << "\n"
      << "replications = " << rep.replications << "\n"
      << "avg_aoii = " << format_number(rep.avg_aoii) << "\n"
      << "aoii_stderr = " << format_number(rep.aoii_stderr) << "\n"
      << "avg_rate = " << format_number(rep.avg_rate) << "\n"
      << "rate_stderr = " << format_number(rep.rate_stderr) << "\n"
      << "max_delta_seen = " << rep.max_delta_seen << "\n"
      << "decode_successes = " << rep.decode_successes << "\n";
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Collects validation checks as CSV rows.
class CheckTable {
 public:
  explicit CheckTable(std::ostream& out) : out_(out) {
    out_ << "check,status,measured,reference,discrepancy,tolerance\n";
  }

  void compare(const std::string& name, double measured, double reference, double tol,
               bool relative) {
    const double diff = std::abs(measured - reference);
    const double scaled = relative ? diff / std::max(std::abs(reference), 1e-300) : diff;
    emit(name, scaled <= tol, format_number(measured), format_number(reference),
         format_number(scaled), format_number(tol));
  }

  void exact(const std::string& name, const std::string& measured, const std::string& reference) {
    emit(name, measured == reference, measured, reference, measured == reference ? "0" : "mismatch",
         "0");
  }

  void error(const std::string& name, const std::string& what) {
    emit(name, false, "error", "", csv_safe(what), "");
  }

  bool all_passed() const { return failures_ == 0; }
  std::size_t failures() const { return failures_; }
  std::size_t total() const { return total_; }

 private:
  void emit(const std::string& name, bool ok, const std::string& measured,
            const std::string& reference, const std::string& discrepancy,
            const std::string& tol) {
    ++total_;
    if (!ok) ++failures_;
    out_ << name << "," << (ok ? "pass" : "fail") << "," << measured << "," << reference << ","
         << discrepancy << "," << tol << "\n";
  }

  std::ostream& out_;
  std::size_t failures_ = 0;
  std::size_t total_ = 0;
};

std::string lambda_tag(double lambda) { return "[lambda=" + format_number(lambda) + "]"; }

}  // namespace

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  Section top(j, "config");
  json resolved;

  SourceModel source = read_source(top.child("source"), resolved["source"]);
  ChannelModel channel = read_channel(top.child("channel"), resolved["channel"]);
  json pen_json = json::object();
  Penalty penalty = Penalty::linear();
  if (top.has("penalty")) {
    penalty = read_penalty(top.child("penalty"), pen_json);
  } else {
    pen_json["kind"] = "linear";
  }
  resolved["penalty"] = pen_json;

  std::vector<double> budgets;
  if (top.has("budget")) budgets = read_budget(top.child("budget"), resolved["budget"]);

  const SolverConfig solver = read_solver(optional_section(top, "solver"), resolved["solver"]);
  const SimSettings sim = read_sim(optional_section(top, "sim"), resolved["sim"]);
  const RviConfig rvi = read_rvi(optional_section(top, "rvi"), resolved["rvi"]);
  std::optional<Policy> policy;
  if (top.has("policy")) policy = read_policy(top.child("policy"), resolved["policy"]);
  const ValidateSettings validate =
      read_validate(optional_section(top, "validate"), resolved["validate"]);
  std::optional<std::string> out_path;
  if (top.has("outputs")) {
    Section o = top.child("outputs");
    if (o.has("path")) out_path = o.text("path", "");
    o.finish();
    resolved["outputs"]["path"] = out_path ? json(*out_path) : json(nullptr);
  }
  top.finish();

  return RunConfig{source,  channel, penalty, budgets, solver, sim,
                   rvi,     policy,  validate, out_path, resolved.dump()};
}

void cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const auto& budgets = require_budget(cfg);
  write_header(out, "solve", cfg);
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (i) out << "\n";
    write_solution(out, solve_cmdp(budgets[i], cfg.source, cfg.channel, cfg.penalty, cfg.solver));
  }
}

void cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const auto& budgets = require_budget(cfg);
  write_header(out, "sweep", cfg);
  out << kSweepHeader << "\n";
  for (double R : budgets) {
    out << format_number(R) << ",";
    try {
      const CmdpSolution sol = solve_cmdp(R, cfg.source, cfg.channel, cfg.penalty, cfg.solver);
      const SimReport opt = run_sim(cfg, optimal_policy(sol));
      const SimReport per = run_sim(cfg, Policy(PeriodicPolicy{R}));
      out << opt_count(sol.n_high) << "," << opt_count(sol.n_low) << ","
          << format_number(sol.rho_high) << "," << format_number(sol.predicted_rate) << ","
          << format_number(sol.predicted_aoii) << "," << format_number(opt.avg_rate) << ","
          << format_number(opt.avg_aoii) << "," << format_number(per.avg_aoii) << ","
          << format_number(opt.aoii_stderr) << "," << format_number(per.aoii_stderr) << ","
          << to_string(sol.regime) << "\n";
    } catch (const NumericalError& e) {
      out << ",,,,,,,,,," << csv_safe(std::string("failed: ") + e.what()) << "\n";
    }
  }
}

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  std::optional<Policy> policy = cfg.policy;
  std::optional<CmdpSolution> sol;
  if (!policy) {
    sol = solve_cmdp(require_budget(cfg).front(), cfg.source, cfg.channel, cfg.penalty,
                     cfg.solver);
    policy = optimal_policy(*sol);
  }
  const SimReport rep = run_sim(cfg, *policy);
  write_header(out, "simulate", cfg);
  out << "policy = " << policy->describe() << "\n";
  if (sol) {
    out << "predicted_rate = " << format_number(sol->predicted_rate) << "\n"
        << "predicted_aoii = " << format_number(sol->predicted_aoii) << "\n";
  }
  write_report(out, rep);
}

bool cmd_validate(const RunConfig& cfg, std::ostream& out) {
  write_header(out, "validate", cfg);
  CheckTable table(out);
  const auto& src = cfg.source;
  const auto& pen = cfg.penalty;
  const ChannelModel perturbed(std::clamp(cfg.channel.p_e() + cfg.validate.perturb_gamma, 1e-9,
                                          1.0 - 1e-9),
                               cfg.channel.configured_c(), cfg.channel.r_max(),
                               cfg.channel.combining());

  if (!src.transmissions_useful()) {
    const double gw = g_wait(src, pen, cfg.solver.series);
    for (double lambda : cfg.validate.lambdas) {
      const std::string tag = lambda_tag(lambda);
      try {
        const RviSolution rvi = rvi_solve(lambda, src, cfg.channel, pen, cfg.rvi);
        table.compare("waiting-cost" + tag, rvi.g, gw, 1e-4, true);
        if (lambda > 0.0) {
          const auto thr = extract_thresholds(rvi);
          table.exact("waiting-policy" + tag, thr.count(0) ? std::to_string(thr.at(0)) : "none",
                      "none");
        }
      } catch (const NumericalError& e) {
        table.error("waiting" + tag, e.what());
      }
    }
    out << "# summary: " << table.total() - table.failures() << "/" << table.total()
        << " passed\n";
    return table.all_passed();
  }

  ThresholdEvaluator eval(src, perturbed, pen, cfg.solver.series, cfg.solver.n0_ceiling);
  for (double lambda : cfg.validate.lambdas) {
    const std::string tag = lambda_tag(lambda);
    try {
      const std::uint64_t n0 = *eval.optimal_threshold(lambda);
      const double g = eval.g_for_threshold(n0, lambda);
      const RviSolution rvi = rvi_solve(lambda, src, cfg.channel, pen, cfg.rvi);
      const auto thr = extract_thresholds(rvi);
      table.exact("threshold" + tag, std::to_string(n0),
                  thr.count(0) ? std::to_string(thr.at(0)) : "none");
      table.compare("cost" + tag, g, rvi.g, 1e-4, true);
    } catch (const NumericalError& e) {
      table.error("lagrangian-vs-rvi" + tag, e.what());
    }
  }
  for (std::uint64_t n0 : cfg.validate.rate_thresholds) {
    const std::string tag = "[n0=" + std::to_string(n0) + "]";
    try {
      const RateAnalysis ra = achieved_rate(n0, src, perturbed, cfg.solver.rate());
      const auto policy = [n0](State s) { return s.delta >= n0 ? 1.0 : 0.0; };
      const StationaryDistribution q = kernel_stationary(policy, src, cfg.channel);
      table.compare("rate" + tag, ra.rate, q.mass_from(n0), 1e-9, false);
      table.compare("cost-table" + tag, eval.g_for_threshold(n0, 0.0),
                    [&] {
                      double s = 0.0;
                      for (std::uint64_t d = 0; d <= q.max_delta(); ++d)
                        for (double x : q.row(d)) s += x * pen(d);
                      return s;
                    }(),
                    1e-8, true);
    } catch (const NumericalError& e) {
      table.error("rate" + tag, e.what());
    }
  }
  out << "# summary: " << table.total() - table.failures() << "/" << table.total() << " passed\n";
  return table.all_passed();
}

void cmd_wait_aoii(const RunConfig& cfg, std::ostream& out) {
  const double gw = g_wait(cfg.source, cfg.penalty, cfg.solver.series);
  const SimReport rep = run_sim(cfg, Policy(NeverTransmit{}));
  write_header(out, "wait-aoii", cfg);
  out << "g_wait = " << format_number(gw) << "\n"
      << "waiting_optimal = " << (cfg.source.transmissions_useful() ? "false" : "true") << "\n"
      << "sim_aoii = " << format_number(rep.avg_aoii) << "\n"
      << "sim_aoii_stderr = " << format_number(rep.aoii_stderr) << "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"AoII solver and simulator for a Markov source over a HARQ channel", "aoii"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> reps;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_path, "write results here instead of standard output");
  app.add_option("--seed", seed, "override sim.seed");
  app.add_option("--reps", reps, "override sim.n_reps");
  app.fallthrough();
  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve", "solve the rate-constrained problem for each budget"},
      {"sweep", "CSV table over the budget grid with simulated columns"},
      {"simulate", "simulate the configured or optimal policy"},
      {"validate", "cross-check closed forms against RVI and the kernel"},
      {"wait-aoii", "average AoII of never transmitting"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError("--config: cannot open " + config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config(buf.str());
    if (seed) cfg.sim.seed = *seed;
    if (reps) {
      if (*reps < 1) throw ConfigError("--reps: must be at least 1");
      cfg.sim.n_reps = *reps;
    }
    if (seed || reps) {
      json resolved = json::parse(cfg.resolved);
      resolved["sim"]["seed"] = cfg.sim.seed;
      resolved["sim"]["n_reps"] = cfg.sim.n_reps;
      cfg.resolved = resolved.dump();
    }
    if (out_path) cfg.out_path = out_path;

    std::ostringstream result;
    bool ok = true;
    if (command == "solve") {
      cmd_solve(cfg, result);
    } else if (command == "sweep") {
      cmd_sweep(cfg, result);
    } else if (command == "simulate") {
      cmd_simulate(cfg, result);
    } else if (command == "validate") {
      ok = cmd_validate(cfg, result);
    } else {
      cmd_wait_aoii(cfg, result);
    }

    if (cfg.out_path) {
      std::ofstream file(*cfg.out_path, std::ios::binary | std::ios::trunc);
      if (!file) throw ConfigError("outputs.path: cannot write " + *cfg.out_path);
      file << result.str();
    } else {
      out << result.str();
    }
    return ok ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace aoii
