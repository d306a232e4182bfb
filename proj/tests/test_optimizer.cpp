#include <doctest.h>

#include "aoii/errors.hpp"
#include "aoii/optimizer.hpp"

using namespace aoii;

TEST_CASE("regimes") {
  const auto pen = Penalty::linear();
  const ChannelModel ch(0.5, 0.5, 2);

  SUBCASE("waiting source") {
    const auto sol = solve_cmdp(0.3, SourceModel(0.5, 0.5), ch, pen);
    CHECK(sol.regime == Regime::never_transmit);
    CHECK(sol.predicted_aoii == doctest::Approx(g_wait(SourceModel(0.5, 0.5), pen)));
    CHECK(sol.predicted_rate == 0.0);
    CHECK_FALSE(sol.n_high.has_value());
  }
  SUBCASE("unconstrained budget") {
    const auto src = SourceModel::from_states(0.5, 16);
    const auto sol = solve_cmdp(1.0, src, ch, pen);
    CHECK(sol.regime == Regime::pure_threshold);
    CHECK(sol.n_high == optimal_threshold(0.0, src, ch, pen));
    CHECK(sol.lambda_star == 0.0);
  }
  SUBCASE("binding budget mixes adjacent thresholds") {
    const auto src = SourceModel::from_states(0.5, 16);
    const auto sol = solve_cmdp(0.2, src, ch, pen);
    REQUIRE(sol.regime == Regime::mixed);
    CHECK(*sol.n_high == *sol.n_low + 1);
    CHECK(sol.rate_high <= 0.2);
    CHECK(sol.rate_low > 0.2);
    CHECK(sol.predicted_rate == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(sol.predicted_aoii >= sol.aoii_low - 1e-12);
    CHECK(sol.predicted_aoii <= sol.aoii_high + 1e-12);
    CHECK(sol.lambda_star > 0.0);
  }
  SUBCASE("invalid budget") {
    CHECK_THROWS_AS(solve_cmdp(0.0, SourceModel::from_states(0.5, 16), ch, pen), ConfigError);
    CHECK_THROWS_AS(solve_cmdp(1.5, SourceModel::from_states(0.5, 16), ch, pen), ConfigError);
  }
}

TEST_CASE("search trace is monotone") {
  const auto pen = Penalty::linear();
  for (const auto& [src, ch] :
       {std::pair{SourceModel::from_states(0.5, 16), ChannelModel(0.5, 0.5, 2)},
        std::pair{SourceModel::from_states(0.5, 128), ChannelModel(0.9, 0.5)},
        std::pair{SourceModel::from_states(0.8, 128), ChannelModel(0.5, 0.5, 2)}}) {
    for (double R : {0.02, 0.1, 0.3}) {
      auto trace = solve_cmdp(R, src, ch, pen).diagnostics.trace;
      std::sort(trace.begin(), trace.end(),
                [](const LambdaProbe& a, const LambdaProbe& b) { return a.lambda < b.lambda; });
      for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i].threshold >= trace[i - 1].threshold);
        CHECK(trace[i].rate <= trace[i - 1].rate + 1e-12);
      }
    }
  }
}

TEST_CASE("solutions meet the budget across a grid") {
  const auto pen = Penalty::linear();
  const auto src = SourceModel::from_states(0.5, 16);
  const ChannelModel ch(0.5, 0.5, 2);
  double prev_aoii = 1e300;
  for (int i = 1; i <= 20; ++i) {
    const double R = 0.05 * i;
    const auto sol = solve_cmdp(R, src, ch, pen);
    CHECK(sol.predicted_rate <= R + 1e-9);
    if (sol.regime == Regime::mixed) CHECK(sol.predicted_rate == doctest::Approx(R).epsilon(1e-9));
    CHECK(sol.predicted_aoii <= prev_aoii + 1e-12);
    prev_aoii = sol.predicted_aoii;
  }
}

TEST_CASE("solver configuration validation") {
  SolverConfig cfg;
  cfg.lambda_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(to_string(Regime::mixed) == "mixed");
  CHECK(to_string(Regime::never_transmit) == "never-transmit");
  CHECK(to_string(Regime::pure_threshold) == "pure-threshold");
}
