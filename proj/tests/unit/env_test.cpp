#include "batchlab/common/error.hpp"
#include "batchlab/common/rng.hpp"
#include "batchlab/env/chain.hpp"
#include "batchlab/env/point_mass.hpp"
#include "batchlab/env/registry.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace batchlab::env {
namespace {

PointReach point_reach() { return PointReach(PointReach::default_geometry(), 0.99); }

TEST(PointReach, ResetInsideInitBoxAndDeterministic) {
  auto env = point_reach();
  auto s = env.reset(0);
  const auto& box = env.geometry().init_box;
  EXPECT_GE(s.position[0], box.x_lo);
  EXPECT_LE(s.position[0], box.x_hi);
  EXPECT_GE(s.position[1], box.y_lo);
  EXPECT_LE(s.position[1], box.y_hi);
  EXPECT_EQ(s.t, 0);
  EXPECT_EQ(env.geometry().goal.x, 8.0);
  EXPECT_EQ(env.reset(0), s);
}

TEST(PointReach, InitDistributionUniformChiSquare) {
  auto env = point_reach();
  const auto& box = env.geometry().init_box;
  constexpr int kBins = 5;
  constexpr int kSamples = 10000;
  std::vector<int> counts(kBins * kBins, 0);
  for (int i = 0; i < kSamples; ++i) {
    auto s = env.reset(static_cast<std::uint64_t>(i));
    const int bx = std::min(kBins - 1, static_cast<int>((s.position[0] - box.x_lo) / (box.x_hi - box.x_lo) * kBins));
    const int by = std::min(kBins - 1, static_cast<int>((s.position[1] - box.y_lo) / (box.y_hi - box.y_lo) * kBins));
    ++counts[by * kBins + bx];
  }
  const double expected = static_cast<double>(kSamples) / (kBins * kBins);
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 24 degrees of freedom, p = 0.001 critical value.
  EXPECT_LT(chi2, 51.18);
}

TEST(PointReach, StepIsKinematicIdentity) {
  auto env = point_reach();
  auto s = env.make_state(4.0, 4.0, 0);
  std::vector<double> a{0.5, -0.25};
  auto [next, r] = env.step(s, a);
  EXPECT_DOUBLE_EQ(next.position[0], 4.5);
  EXPECT_DOUBLE_EQ(next.position[1], 3.75);
  EXPECT_EQ(next.t, 1);
  EXPECT_EQ(r, 0.0);
  std::vector<double> big{3.0, -7.0};
  auto clipped = env.step(s, big).state;
  EXPECT_DOUBLE_EQ(clipped.position[0], 5.0);
  EXPECT_DOUBLE_EQ(clipped.position[1], 3.0);
}

TEST(PointReach, ZeroActionKeepsPosition) {
  auto env = point_reach();
  auto s = env.reset(3);
  std::vector<double> zero{0.0, 0.0};
  auto [next, r] = env.step(s, zero);
  EXPECT_EQ(next.position, s.position);
  EXPECT_EQ(r, 0.0);
  EXPECT_FALSE(next.done);
}

TEST(PointReach, ScriptedControllerSucceeds) {
  auto env = point_reach();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = env.reset(seed);
    double ret = 0.0;
    while (!s.done) {
      auto [next, r] = env.step(s, env.scripted_action(s, 0));
      ret += r;
      s = next;
    }
    EXPECT_TRUE(s.success);
    EXPECT_EQ(ret, 1.0);
    EXPECT_LE(s.t, env.spec().horizon);
  }
}

TEST(PointReach, StepAfterDoneThrows) {
  auto env = point_reach();
  auto s = env.make_state(7.9, 7.9, 0);
  std::vector<double> a{0.1, 0.1};
  auto [next, r] = env.step(s, a);
  ASSERT_TRUE(next.done && next.success);
  EXPECT_EQ(r, 1.0);
  EXPECT_THROW(env.step(next, a), EnvError);
}

TEST(PointReach, HorizonEndsEpisode) {
  auto env = point_reach();
  auto s = env.reset(1);
  std::vector<double> zero{0.0, 0.0};
  while (!s.done) s = env.step(s, zero).state;
  EXPECT_EQ(s.t, 60);
  EXPECT_FALSE(s.success);
}

TEST(TwoCorridors, WallBlocksCenter) {
  TwoCorridors env(TwoCorridors::default_geometry(), {}, 0.99);
  auto s = env.make_state(0.0, 4.2, 0);
  std::vector<double> up{0.0, 1.0};
  auto next = env.step(s, up).state;
  EXPECT_LT(next.position[1], 4.5);
  EXPECT_GE(next.position[1], 4.2);
}

TEST(TwoCorridors, WallContactSlidesAlongTheWall) {
  TwoCorridors env(TwoCorridors::default_geometry(), {}, 0.99);
  auto s = env.make_state(0.0, 4.2, 0);
  std::vector<double> diagonal{0.5, 1.0};
  auto next = env.step(s, diagonal).state;
  EXPECT_NEAR(next.position[0], 0.5, 1e-12);
  EXPECT_LT(next.position[1], 4.5);
  EXPECT_GE(next.position[1], 4.4);
}

TEST(TwoCorridors, StraightLineControllerNeverSucceeds) {
  TwoCorridors env(TwoCorridors::default_geometry(), {}, 0.99);
  const auto& goal = env.geometry().goal;
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto s = env.reset(seed);
    while (!s.done) {
      std::vector<double> a{goal.x - s.position[0], goal.y - s.position[1]};
      const double m = std::max(std::abs(a[0]), std::abs(a[1]));
      if (m > 1.0) a = {a[0] / m, a[1] / m};
      s = env.step(s, a).state;
    }
    successes += s.success;
  }
  EXPECT_EQ(successes, 0);
}

TEST(ScriptedDemos, PointReachAllSuccessful) {
  auto env = point_reach();
  auto demos = scripted_demos(env, 5, 0.1, 7);
  ASSERT_EQ(demos.size(), 5u);
  for (const auto& d : demos) {
    EXPECT_TRUE(d.success);
    EXPECT_EQ(d.provenance.source, rollout::Source::demo);
    EXPECT_EQ(d.total_return(), 1.0);
  }
}

TEST(ScriptedDemos, TwoCorridorsBothModesPresent) {
  TwoCorridors env(TwoCorridors::default_geometry(), {}, 0.99);
  auto demos = scripted_demos(env, 20, 0.1, 3);
  int left = 0;
  int right = 0;
  for (const auto& d : demos) {
    std::vector<std::vector<double>> obs;
    for (const auto& t : d.transitions) obs.push_back(t.next_state);
    const int c = env.corridor_of(obs);
    left += c < 0;
    right += c > 0;
  }
  EXPECT_GE(left, 5);
  EXPECT_GE(right, 5);
  EXPECT_EQ(left + right, 20);
}

TEST(ScriptedDemos, NoiselessDemosAreDeterministic) {
  for (const auto& name : {"PointReach", "TwoCorridors", "PrecisionDock", "Chain5"}) {
    auto env = make_environment(name, nullptr, 0.99);
    EXPECT_EQ(scripted_demos(*env, 4, 0.0, 11), scripted_demos(*env, 4, 0.0, 11)) << name;
  }
}

TEST(ScriptedDemos, PrecisionDockSucceedsWithNoise) {
  auto env = make_environment("PrecisionDock", nullptr, 0.99);
  EXPECT_NO_THROW(scripted_demos(*env, 30, 0.1, 5));
}

TEST(ScriptedDemos, FailingControllerIsAnError) {
  nlohmann::json params{{"horizon", 2}};
  auto env = make_environment("PointReach", params, 0.99);
  EXPECT_THROW(scripted_demos(*env, 1, 0.0, 0), EnvError);
}

TEST(Registry, UnknownNamesAndKeysRejected) {
  EXPECT_THROW(make_environment("Nope", nullptr, 0.99), ConfigError);
  nlohmann::json bad{{"gap_widht", 1.0}};
  try {
    make_environment("TwoCorridors", bad, 0.99);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "env_params.gap_widht");
  }
}

TEST(Registry, GeometryOverridesApply) {
  nlohmann::json params{{"goal", {5.0, 5.0, 1.0}}, {"init_box", {0.0, 0.5, 0.0, 0.5}}};
  auto env = make_environment("PointReach", params, 0.99);
  const auto& g = dynamic_cast<const PointMassEnv&>(*env).geometry();
  EXPECT_EQ(g.goal.x, 5.0);
  EXPECT_EQ(g.init_box.x_hi, 0.5);
}

TEST(ValueIteration, SingleStateGeometricSeries) {
  TabularMdp m;
  m.num_states = 1;
  m.num_actions = 1;
  m.gamma = 0.9;
  m.outcomes = {{{Outcome{1.0, 0, 1.0, false}}}};
  auto r = value_iteration(m);
  EXPECT_NEAR(r.q[0][0], 10.0, 1e-8);
  EXPECT_LT(r.final_delta, 1e-10);
}

TEST(ValueIteration, ZeroRewardsGiveZero) {
  Chain5 chain(0.9);
  auto m = chain.tabular();
  for (auto& s : m.outcomes)
    for (auto& a : s)
      for (auto& o : a) o.reward = 0.0;
  for (const auto& row : value_iteration(m).q)
    for (double q : row) EXPECT_EQ(q, 0.0);
}

TEST(ValueIteration, Chain5MatchesMonteCarloReturns) {
  Chain5 chain(0.9);
  auto q = value_iteration(chain.tabular()).q;
  for (std::size_t s = 0; s < Chain5::kStates; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      // Take a, then act greedily w.r.t. q; sum discounted rewards.
      auto state = chain.state_at(s);
      double ret = 0.0;
      double discount = 1.0;
      std::vector<double> act{a == 1 ? Chain5::kRight : Chain5::kLeft};
      for (int t = 0; t < 400 && !state.success; ++t) {
        state.done = false;
        auto [next, r] = chain.step(state, act);
        ret += discount * r;
        discount *= 0.9;
        state = next;
        const auto idx = static_cast<std::size_t>(state.position[0]);
        act = {q[idx][1] >= q[idx][0] ? Chain5::kRight : Chain5::kLeft};
      }
      EXPECT_NEAR(q[s][a], ret, 1e-9) << s << "," << a;
    }
  }
  EXPECT_NEAR(q[4][1], 1.0, 1e-12);
  EXPECT_NEAR(q[0][1], std::pow(0.9, 4), 1e-9);
}

TEST(Chain5, ObservationIsOneHotAndActionsDiscretize) {
  Chain5 chain;
  auto s = chain.state_at(2);
  EXPECT_EQ(s.observation.to_vector(), (std::vector<double>{0, 0, 1, 0, 0}));
  std::vector<double> left{-0.3};
  std::vector<double> right{0.0};
  EXPECT_EQ(chain.step(s, left).state.position[0], 1.0);
  EXPECT_EQ(chain.step(s, right).state.position[0], 3.0);
  EXPECT_EQ(Chain5::index_of(chain.step(s, right).state.observation.values()), 3u);
}

}  // namespace
}  // namespace batchlab::env
