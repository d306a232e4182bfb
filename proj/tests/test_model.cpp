#include <doctest.h>

#include <cmath>

#include "aoii/errors.hpp"
#include "aoii/model.hpp"

using namespace aoii;

TEST_CASE("source construction from N and validation") {
  const auto s = SourceModel::from_states(0.5, 16);
  CHECK(s.mu() == doctest::Approx(0.5 / 15).epsilon(1e-15));
  CHECK(s.transmissions_useful());
  CHECK_FALSE(SourceModel::from_states(0.2, 2).transmissions_useful());
  CHECK_THROWS_AS(SourceModel(0.0, 0.5), ConfigError);
  CHECK_THROWS_AS(SourceModel(0.7, 0.5), ConfigError);
  CHECK_THROWS_AS(SourceModel(0.5, 0.1, 16), ConfigError);
  CHECK_THROWS_AS(SourceModel::from_states(0.5, 1), ConfigError);
}

TEST_CASE("channel decoding law") {
  const ChannelModel soft(0.5, 0.5, 2);
  CHECK(soft.p_success(0) == doctest::Approx(0.5));
  CHECK(soft.p_success(1) == doctest::Approx(0.75));
  CHECK(soft.p_success(2) == doctest::Approx(0.875));
  CHECK(soft.p_success(3) == doctest::Approx(0.5));
  CHECK(soft.round_length() == 3);

  const ChannelModel unbounded(0.5, 0.5);
  CHECK_FALSE(unbounded.round_length().has_value());
  CHECK(unbounded.p_success(10) == doctest::Approx(1.0 - 0.5 * std::pow(0.5, 10)));

  const ChannelModel plain(0.3, 0.5, std::nullopt, Combining::none);
  CHECK(plain.constant_success());
  CHECK(plain.p_success(7) == doctest::Approx(0.7));
  CHECK(plain.configured_c() == 0.5);
  CHECK(ChannelModel(0.3, 0.5, 0).constant_success());

  CHECK_THROWS_AS(ChannelModel(0.0, 0.5), ConfigError);
  CHECK_THROWS_AS(ChannelModel(1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(ChannelModel(0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(ChannelModel(0.5, 1.5), ConfigError);
}

TEST_CASE("penalties") {
  const auto lin = Penalty::linear();
  CHECK(lin(0) == 0.0);
  CHECK(lin(17) == 17.0);
  CHECK(Penalty::power(2.0)(5) == doctest::Approx(25.0));
  CHECK_THROWS_AS(Penalty::power(0.5), ConfigError);

  const auto tab = Penalty::table({0.0, 1.0, 3.0});
  CHECK(tab(2) == 3.0);
  CHECK(tab(4) == doctest::Approx(7.0));
  CHECK_THROWS_AS(Penalty::table({0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(Penalty::table({1.0}), ConfigError);
}

TEST_CASE("gamma coefficients") {
  const auto src = SourceModel::from_states(0.5, 16);
  const ChannelModel ch(0.5, 0.5, 2);
  for (std::uint64_t r = 0; r < 5; ++r) {
    const double p = ch.p_success(r);
    const auto g = gamma(src, ch, r);
    CHECK(g.gamma1 == doctest::Approx(src.alpha() * (1 - p)));
    CHECK(g.gamma2 == doctest::Approx(1 - src.alpha() - src.mu() * (1 - p)));
  }
}

TEST_CASE("transition kernel rows") {
  const auto src = SourceModel::from_states(0.5, 16);
  const ChannelModel ch(0.5, 0.5, 2);

  SUBCASE("rows sum to one and stay on the valid support") {
    for (std::uint64_t d = 0; d <= 30; ++d)
      for (std::uint64_t r = 0; r <= d; ++r) {
        if (d == 0 && r > 0) continue;
        for (Action a : {Action::wait, Action::transmit}) {
          const auto t = transition_dist({d, r}, a, src, ch);
          CHECK(t.total() == doctest::Approx(1.0).epsilon(1e-14));
          for (const auto& o : t) {
            CHECK(o.prob >= 0.0);
            CHECK(o.decoded <= o.prob + 1e-15);
            CHECK(o.next.r <= o.next.delta);
            if (o.next.delta == 0) CHECK(o.next.r == 0);
            if (a == Action::wait) CHECK(o.decoded == 0.0);
          }
        }
      }
  }

  SUBCASE("explicit entries") {
    const auto w = transition_dist({4, 0}, Action::wait, src, ch);
    CHECK(w.prob_of({0, 0}) == doctest::Approx(src.mu()));
    CHECK(w.prob_of({5, 0}) == doctest::Approx(1 - src.mu()));

    const auto g = gamma(src, ch, 1);
    const auto t = transition_dist({4, 1}, Action::transmit, src, ch);
    CHECK(t.prob_of({5, 2}) == doctest::Approx(g.gamma1));
    CHECK(t.prob_of({5, 0}) == doctest::Approx(g.gamma2));
    CHECK(t.prob_of({0, 0}) == doctest::Approx(1 - g.gamma1 - g.gamma2));

    const auto z = transition_dist({0, 0}, Action::transmit, src, ch);
    CHECK(z.prob_of({0, 0}) == doctest::Approx(src.alpha()));
    CHECK(z.prob_of({1, 0}) == doctest::Approx(1 - src.alpha()));
  }

  SUBCASE("every state reaches (0,0) in one step") {
    for (const double alpha : {0.2, 0.5, 0.8})
      for (const std::uint32_t n : {2u, 16u, 128u}) {
        const auto s = SourceModel::from_states(alpha, n);
        for (std::uint64_t d = 0; d <= 100; ++d)
          for (Action a : {Action::wait, Action::transmit})
            CHECK(transition_dist({d, 0}, a, s, ChannelModel(0.9, 1.0)).prob_of({0, 0}) > 0.0);
      }
  }

  SUBCASE("invalid states") {
    CHECK_THROWS_AS(transition_dist({0, 1}, Action::wait, src, ch), ConfigError);
    CHECK_THROWS_AS(transition_dist({2, 3}, Action::transmit, src, ch), ConfigError);
  }
}

TEST_CASE("boundedness certificate") {
  const auto src = SourceModel::from_states(0.5, 16);
  CHECK(validate_boundedness(src, ChannelModel(0.5, 0.5, 2), Penalty::linear()));
  CHECK(validate_boundedness(src, ChannelModel(0.9, 1.0), Penalty::power(3.0)));
  CHECK(validate_boundedness(SourceModel::from_states(0.99, 128), ChannelModel(0.99, 1.0),
                             Penalty::power(4.0)));
}
