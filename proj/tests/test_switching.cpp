#include <doctest.h>

#include <limits>

#include "irsopt/errors.hpp"
#include "irsopt/metrics.hpp"
#include "irsopt/switching.hpp"
#include "test_support.hpp"

using namespace irsopt;

namespace {

using Crafted = testing::SwitchInstance;
using testing::crafted_interference;

struct Desk {
  ChannelSet ch;
  std::vector<CVec> phases;
  std::vector<CVec> w;
};

Desk desk(std::uint64_t seed) {
  Scenario s = testing::desk_scenario();
  s.seed = seed;
  Desk d{sample_channels(s), {}, {}};
  Rng rng(seed * 31 + 5);
  d.phases = testing::random_phases(d.ch, rng);
  d.w = testing::random_beamformers(2, s.n_t, s.power_budget_watts(), rng);
  return d;
}

}  // namespace

TEST_CASE("switch_value") {
  const Crafted c = crafted_interference();
  const double all_on = sum_rate(c.ch, DesignState{c.w, c.phases, SwitchVector::all_on(3)});
  CHECK(switch_value(c.ch, c.phases, c.w, SwitchVector::all_on(3), {0.0, 0.0}) == doctest::Approx(all_on));
  CHECK(switch_value(c.ch, c.phases, c.w, SwitchVector::all_on(3), {10.0, 0.0}) == 0.0);
  CHECK(switch_value(c.ch, c.phases, c.w, SwitchVector::all_off(3), {0.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(switch_value(c.ch, c.phases, c.w, SwitchVector::all_on(3), {0.0}), DimensionError);
}

TEST_CASE("greedy_switch") {
  SUBCASE("single IRS that helps is kept") {
    Scenario s = testing::tiny_scenario(4, 4, 1, 1);
    const ChannelSet ch = sample_channels(s);
    Rng rng(1);
    const auto w = testing::random_beamformers(1, 4, 1.0, rng);
    const std::vector<CVec> ph = {CVec::Ones(4)};
    const auto g = greedy_switch(ch, ph, w, {0.0});
    CHECK(g.switches == SwitchVector::all_on(1));
    CHECK(g.value > 0.0);
    CHECK(g.rounds == 0);
  }
  SUBCASE("nothing feasible: all-on, value 0") {
    const Desk d = desk(1);
    const auto g = greedy_switch(d.ch, d.phases, d.w, {1e3, 1e3});
    CHECK(g.switches == SwitchVector::all_on(3));
    CHECK(g.value == 0.0);
  }
  SUBCASE("crafted interference instance: greedy equals exhaustive") {
    const Crafted c = crafted_interference();
    const auto g = greedy_switch(c.ch, c.phases, c.w, {0.0, 0.0});
    const auto e = exhaustive_switch(c.ch, c.phases, c.w, {0.0, 0.0});
    CHECK(g.value == doctest::Approx(e.value).epsilon(1e-12));
    CHECK(g.switches == e.switches);
    CHECK(g.switches == SwitchVector{{1, 1, 0}});
    CHECK(g.value > switch_value(c.ch, c.phases, c.w, SwitchVector::all_on(3), {0.0, 0.0}));
  }
}

TEST_CASE("exhaustive_switch") {
  SUBCASE("single IRS: both branches") {
    Scenario s = testing::tiny_scenario(4, 4, 1, 1);
    const ChannelSet ch = sample_channels(s);
    Rng rng(2);
    const auto w = testing::random_beamformers(1, 4, 1.0, rng);
    const auto e = exhaustive_switch(ch, {CVec::Ones(4)}, w, {0.0});
    CHECK(e.rounds == 2);
    CHECK(e.switches == SwitchVector::all_on(1));
  }
  SUBCASE("three IRSs: explicit enumeration") {
    const Desk d = desk(3);
    double best = -1.0;
    SwitchVector arg;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const SwitchVector x{{std::uint8_t(a), std::uint8_t(b), std::uint8_t(c)}};
          const double v = sum_rate(d.ch, DesignState{d.w, d.phases, x});
          if (v > best) {
            best = v;
            arg = x;
          }
        }
    const auto e = exhaustive_switch(d.ch, d.phases, d.w, {0.0, 0.0});
    CHECK(e.value == doctest::Approx(best).epsilon(1e-12));
    CHECK(e.switches == arg);
    CHECK(e.rounds == 8);
  }
  SUBCASE("infinite threshold") {
    const Desk d = desk(4);
    const double inf = std::numeric_limits<double>::infinity();
    const auto e = exhaustive_switch(d.ch, d.phases, d.w, {inf, inf});
    CHECK(e.value == 0.0);
    // all vectors tie at 0: the empty set wins
    CHECK(e.switches == SwitchVector::all_off(3));
  }
  SUBCASE("ties prefer fewer IRSs, then lower indices") {
    Crafted c = crafted_interference();
    // IRS 2 off and nothing else matters for user 1: make IRS 1 useless too
    c.ch.h[1][1] = CVec::Zero(1);
    c.ch.h[1][2] = CVec::Zero(1);
    const auto e = exhaustive_switch(c.ch, c.phases, c.w, {0.0, 0.0});
    CHECK(e.switches == SwitchVector{{1, 0, 0}});
  }
  SUBCASE("too many IRSs") {
    ChannelSet ch;
    ch.g.assign(17, CMat::Ones(1, 1));
    ch.h = {std::vector<CVec>(17, CVec::Ones(1))};
    ch.noise = Vec::Ones(1);
    CHECK_THROWS_AS(exhaustive_switch(ch, std::vector<CVec>(17, CVec::Ones(1)), {CVec::Ones(1)}, {0.0}),
                    DomainError);
  }
}

TEST_CASE("greedy vs exhaustive on desk seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Desk d = desk(seed);
    const std::vector<double> gamma = {0.01, 0.01};
    const auto g = greedy_switch(d.ch, d.phases, d.w, gamma);
    const auto e = exhaustive_switch(d.ch, d.phases, d.w, gamma);
    const double all_on = switch_value(d.ch, d.phases, d.w, SwitchVector::all_on(3), gamma);
    CAPTURE(seed);
    CHECK(g.value <= e.value + 1e-12);
    CHECK(g.value >= all_on);
    CHECK(g.rounds <= 3);
    if (g.value > 0.0) {
      for (double r : user_rates(d.ch, DesignState{d.w, d.phases, g.switches})) CHECK(r >= 0.01 - 1e-4);
    }
  }
}
