#include <doctest.h>

#include <cmath>

#include "aoii/errors.hpp"
#include "aoii/lagrangian.hpp"
#include "aoii/rvi.hpp"

using namespace aoii;

namespace {

RviConfig small_grid() {
  RviConfig cfg;
  cfg.delta_max = 150;
  cfg.r_cap = 24;
  return cfg;
}

}  // namespace

TEST_CASE("rvi reproduces the closed-form threshold and cost") {
  const auto pen = Penalty::linear();
  const std::pair<SourceModel, ChannelModel> cases[] = {
      {SourceModel::from_states(0.5, 16), ChannelModel(0.5, 0.5, 2)},
      {SourceModel::from_states(0.8, 16), ChannelModel(0.9, 0.5)},
      {SourceModel::from_states(0.2, 16), ChannelModel(0.1, 1.0, 64)},
      {SourceModel::from_states(0.8, 2), ChannelModel(0.5, 0.5, 0)},
  };
  for (const auto& [src, ch] : cases)
    for (double lambda : {0.0, 1.0, 5.0, 20.0}) {
      const auto sol = rvi_solve(lambda, src, ch, pen, small_grid());
      REQUIRE(sol.converged);
      const auto thr = extract_thresholds(sol);
      REQUIRE(thr.count(0));
      CHECK(thr.at(0) == *optimal_threshold(lambda, src, ch, pen));
      CHECK(sol.g == doctest::Approx(g_for_threshold(thr.at(0), lambda, src, ch, pen)).epsilon(1e-6));
    }
}

TEST_CASE("rvi structure") {
  const auto pen = Penalty::linear();
  const auto src = SourceModel::from_states(0.5, 16);
  const ChannelModel ch(0.5, 0.5);
  const auto sol = rvi_solve(5.0, src, ch, pen, small_grid());
  REQUIRE(sol.converged);
  CHECK(sol.value(0, 0) == 0.0);
  CHECK(std::isnan(sol.values[0 * sol.r_dim + 1]));

  SUBCASE("increasing in the AoII") {
    for (std::uint64_t r = 0; r < sol.r_dim; ++r)
      for (std::uint64_t d = std::max<std::uint64_t>(r, 1); d + 1 <= 100; ++d)
        CHECK(sol.value(d + 1, r) >= sol.value(d, r) - 1e-9);
  }
  SUBCASE("non-increasing in the count when transmissions help") {
    for (std::uint64_t d = 1; d <= 100; ++d)
      for (std::uint64_t r = 0; r + 1 < sol.r_dim && r + 1 <= d; ++r)
        CHECK(sol.value(d, r + 1) <= sol.value(d, r) + 1e-9);
  }
  SUBCASE("thresholds non-increasing in the count") {
    const auto thr = extract_thresholds(sol);
    std::uint64_t prev = thr.at(0);
    for (const auto& [r, d] : thr) {
      CHECK(d <= std::max(prev, r));
      prev = d;
    }
  }
}

TEST_CASE("rvi in the waiting regime") {
  const auto src = SourceModel::from_states(0.2, 2);
  const ChannelModel ch(0.5, 0.5);
  const auto sol = rvi_solve(1.0, src, ch, Penalty::linear(), small_grid());
  REQUIRE(sol.converged);
  CHECK(sol.g == doctest::Approx(g_wait(src, Penalty::linear())).epsilon(1e-8));
  CHECK(extract_thresholds(sol).empty());
  for (std::uint64_t d = 1; d <= 100; ++d)
    for (std::uint64_t r = 0; r + 1 < sol.r_dim && r + 1 <= d; ++r)
      CHECK(sol.value(d, r + 1) >= sol.value(d, r) - 1e-9);
}

TEST_CASE("doubling the AoII cap leaves the answer unchanged") {
  const auto src = SourceModel::from_states(0.5, 16);
  const ChannelModel ch(0.5, 0.5, 2);
  auto cfg = small_grid();
  const auto a = rvi_solve(5.0, src, ch, Penalty::linear(), cfg);
  cfg.delta_max *= 2;
  const auto b = rvi_solve(5.0, src, ch, Penalty::linear(), cfg);
  CHECK(extract_thresholds(a) == extract_thresholds(b));
  CHECK(a.g == doctest::Approx(b.g).epsilon(1e-9));
}

TEST_CASE("rvi failure modes") {
  RviConfig cfg = small_grid();
  cfg.max_iters = 2;
  const auto sol = rvi_solve(1.0, SourceModel::from_states(0.5, 16), ChannelModel(0.5, 0.5), Penalty::linear(), cfg);
  CHECK_FALSE(sol.converged);
  CHECK_THROWS_AS(extract_thresholds(sol), NumericalError);
  RviConfig bad;
  bad.delta_max = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
