#include "batchlab/common/error.hpp"
#include "batchlab/extraction/extraction.hpp"
#include "batchlab/policy/diffusion.hpp"
#include "batchlab/policy/gaussian.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

namespace batchlab::extraction {
namespace {

using policy::ActionBounds;
using policy::PolicyClass;

// Critic defined by closed-form Q(s, a) and V(s).
class StubCritic final : public value::Critic {
 public:
  using QFn = std::function<double(std::span<const double>, std::span<const double>)>;
  using VFn = std::function<double(std::span<const double>)>;
  StubCritic(QFn q, VFn v) : q_(std::move(q)), v_(std::move(v)) {}

  nn::Tensor q(const nn::Tensor& s, const nn::Tensor& a) const override {
    nn::Tensor out = nn::Tensor::matrix(s.rows(), 1);
    for (std::size_t i = 0; i < s.rows(); ++i) out[i] = q_(s.row_span(i), a.row_span(i));
    return out;
  }
  nn::Tensor v(const nn::Tensor& s) const override {
    nn::Tensor out = nn::Tensor::matrix(s.rows(), 1);
    for (std::size_t i = 0; i < s.rows(); ++i) out[i] = v_(s.row_span(i));
    return out;
  }

 private:
  QFn q_;
  VFn v_;
};

StubCritic constant_advantage(double adv) {
  return {[adv](auto, auto) { return 1.0 + adv; }, [](auto) { return 1.0; }};
}

// Returns the same action in every row regardless of seed.
class ConstantPolicy final : public policy::Policy {
 public:
  explicit ConstantPolicy(std::vector<double> a) : bounds_{std::vector<double>(a.size(), -1.0), std::vector<double>(a.size(), 1.0)}, a_(std::move(a)) {}
  std::size_t state_dim() const override { return 1; }
  const ActionBounds& bounds() const override { return bounds_; }
  nn::Tensor sample(std::span<const double>, std::size_t n, std::uint64_t) const override {
    nn::Tensor out = nn::Tensor::matrix(n, a_.size());
    for (std::size_t i = 0; i < n; ++i) std::copy(a_.begin(), a_.end(), out.row_span(i).begin());
    return out;
  }

 private:
  ActionBounds bounds_;
  std::vector<double> a_;
};

ActionBounds unit(std::size_t dim) { return {std::vector<double>(dim, -1.0), std::vector<double>(dim, 1.0)}; }

policy::PolicyConfig small_config(PolicyClass cls, std::size_t steps = 30) {
  policy::PolicyConfig c;
  c.policy_class = cls;
  c.hidden = {16};
  c.diffusion_steps = 5;
  c.batch_size = 32;
  c.steps_per_trajectory = steps;
  c.max_steps = steps;
  c.lr = 1e-3;
  return c;
}

std::vector<rollout::Trajectory> mixed_data() {
  std::vector<rollout::Trajectory> out;
  Rng rng(1);
  for (int i = 0; i < 12; ++i) {
    const bool success = i % 3 == 0;
    rollout::Trajectory t;
    for (int k = 0; k < 4; ++k) {
      const bool last = k == 3;
      t.transitions.push_back({{rng.normal(), rng.normal()}, {rng.uniform(-1, 1)}, last && success ? 1.0 : 0.0,
                               {rng.normal(), rng.normal()}, last, last && success});
    }
    t.success = success;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<nn::Tensor> parameters_of(const policy::Policy& p) {
  std::vector<nn::Tensor> out;
  if (const auto* g = dynamic_cast<const policy::GaussianPolicy*>(&p)) {
    auto copy = g->params();
    for (auto* t : copy.parameters()) out.push_back(*t);
  } else {
    auto copy = dynamic_cast<const policy::DiffusionPolicy&>(p).params().eps_net;
    for (auto* t : copy.parameters()) out.push_back(*t);
  }
  return out;
}

TEST(AwrWeight, ClosedFormCases) {
  const std::vector<double> s{0.0}, a{0.0};
  for (double beta : {0.1, 3.0, 50.0}) EXPECT_DOUBLE_EQ(awr_weight(constant_advantage(0.0), s, a, beta, 100.0), 1.0);
  EXPECT_NEAR(awr_weight(constant_advantage(std::log(2.0)), s, a, 1.0, 100.0), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(awr_weight(constant_advantage(10.0), s, a, 3.0, 100.0), 100.0);
}

TEST(AwrWeight, MonotoneInAdvantage) {
  const std::vector<double> s{0.0}, a{0.0};
  double prev = 0.0;
  for (double adv = -3.0; adv <= 1.5; adv += 0.25) {
    const double w = awr_weight(constant_advantage(adv), s, a, 3.0, 100.0);
    EXPECT_GT(w, prev);
    prev = w;
  }
}

TEST(AwrWeight, BatchedMatchesScalar) {
  const auto data = mixed_data();
  const rollout::TransitionTable table(data);
  StubCritic critic([](auto s, auto a) { return s[0] * a[0]; }, [](auto s) { return 0.3 * s[1]; });
  const auto w = awr_weights(critic, table, 2.0, 5.0);
  for (std::size_t i = 0; i < table.size(); ++i)
    EXPECT_DOUBLE_EQ(w[i], awr_weight(critic, table.state(i), table.action(i), 2.0, 5.0));
}

TEST(TrainPolicy, FilterIsNoOpOnAllSuccessData) {
  auto data = mixed_data();
  for (auto& t : data) {
    t.success = true;
    t.transitions.back().success = true;
  }
  const rollout::TransitionTable table(data);
  for (auto cls : {PolicyClass::gaussian, PolicyClass::diffusion}) {
    const auto il = train_policy(table, nullptr, {.kind = ExtractionKind::none_il}, small_config(cls), unit(1), 5);
    const auto fil = train_policy(table, nullptr, {.kind = ExtractionKind::filtered_il}, small_config(cls), unit(1), 5);
    EXPECT_EQ(parameters_of(*il), parameters_of(*fil));
  }
}

TEST(TrainPolicy, AwrWithZeroAdvantageIsBehaviourCloning) {
  const auto data = mixed_data();
  const rollout::TransitionTable table(data);
  const auto critic = constant_advantage(0.0);
  for (auto cls : {PolicyClass::gaussian, PolicyClass::diffusion}) {
    const auto il = train_policy(table, nullptr, {.kind = ExtractionKind::none_il}, small_config(cls), unit(1), 6);
    const auto awr = train_policy(table, &critic, {.kind = ExtractionKind::awr_explicit}, small_config(cls), unit(1), 6);
    const auto bon = train_policy(table, &critic, {.kind = ExtractionKind::best_of_n_implicit}, small_config(cls), unit(1), 6);
    EXPECT_EQ(parameters_of(*il), parameters_of(*awr));
    EXPECT_EQ(parameters_of(*il), parameters_of(*bon));
  }
}

TEST(TrainPolicy, AwrGaussianFollowsHighAdvantageAction) {
  std::vector<rollout::Trajectory> data;
  for (int i = 0; i < 20; ++i) {
    data.push_back(testing::single_step({0.0}, {0.5}));
    data.push_back(testing::single_step({0.0}, {-0.5}));
  }
  const rollout::TransitionTable table(data);
  // Advantage +A for a = 0.5 and -A for a = -0.5, with A = 1.
  const StubCritic critic([](auto, auto a) { return 2.0 * a[0]; }, [](auto) { return 0.0; });
  const ExtractionSpec spec{.kind = ExtractionKind::awr_explicit, .beta = 20.0, .weight_clip = 100.0};
  const double w_hi = awr_weight(critic, std::vector<double>{0.0}, std::vector<double>{0.5}, spec.beta, spec.weight_clip);
  const double w_lo = awr_weight(critic, std::vector<double>{0.0}, std::vector<double>{-0.5}, spec.beta, spec.weight_clip);
  const double oracle_mean = (0.5 * w_hi - 0.5 * w_lo) / (w_hi + w_lo);

  auto cfg = small_config(PolicyClass::gaussian, 1500);
  const auto pol = train_policy(table, &critic, spec, cfg, unit(1), 7);
  const double mean = dynamic_cast<const policy::GaussianPolicy&>(*pol).mean(std::vector<double>{0.0})[0];
  EXPECT_NEAR(mean, oracle_mean, 0.05);
  EXPECT_NEAR(mean, 0.5, 0.05);
}

TEST(TrainPolicy, FilteredNeverSeesFailures) {
  const auto data = mixed_data();
  const rollout::TransitionTable table(data);
  std::size_t seen = 0;
  const BatchObserver observer = [&](std::span<const std::size_t> rows) {
    for (auto r : rows) {
      ASSERT_TRUE(table.from_success(r)) << "row " << r;
      ++seen;
    }
  };
  train_policy(table, nullptr, {.kind = ExtractionKind::filtered_il}, small_config(PolicyClass::diffusion), unit(1), 8,
               nullptr, observer);
  EXPECT_GT(seen, 0u);
}

TEST(TrainPolicy, Errors) {
  auto data = mixed_data();
  for (auto& t : data) {
    t.success = false;
    for (auto& tr : t.transitions) tr.success = false;
  }
  const rollout::TransitionTable table(data);
  try {
    train_policy(table, nullptr, {.kind = ExtractionKind::filtered_il}, small_config(PolicyClass::gaussian), unit(1), 1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "empty filtered dataset");
  }
  EXPECT_THROW(
      train_policy(table, nullptr, {.kind = ExtractionKind::awr_explicit}, small_config(PolicyClass::gaussian), unit(1), 1),
      DataError);
  EXPECT_THROW(train_policy(rollout::TransitionTable{}, nullptr, {}, small_config(PolicyClass::gaussian), unit(1), 1),
               DataError);
}

TEST(TrainPolicy, WarmStartContinuesFromGivenPolicy) {
  const auto data = mixed_data();
  const rollout::TransitionTable table(data);
  auto cfg = small_config(PolicyClass::gaussian, 1);
  const auto first = train_policy(table, nullptr, {.kind = ExtractionKind::none_il}, cfg, unit(1), 2);
  cfg.warm_start = true;
  cfg.lr = 1e-12;
  const auto warm = train_policy(table, nullptr, {.kind = ExtractionKind::none_il}, cfg, unit(1), 3, first.get());
  const auto a = parameters_of(*first), b = parameters_of(*warm);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].size(); ++k) EXPECT_NEAR(a[i][k], b[i][k], 1e-9);
}

policy::GaussianPolicy noisy_gaussian(std::size_t adim) {
  Rng rng(3);
  policy::GaussianPolicyParams p{nn::MlpParams::init({1, 8, adim}, nn::Activation::tanh, rng), nn::Tensor::matrix(1, adim, -0.5)};
  return policy::GaussianPolicy(p, unit(adim), policy::SampleMode::full);
}

TEST(SelectAction, SingleSampleIsPlainSampling) {
  const auto pol = noisy_gaussian(2);
  const StubCritic critic([](auto, auto a) { return a[0]; }, [](auto) { return 0.0; });
  const std::vector<double> s{0.4};
  const auto direct = pol.sample(s, 1, 42);
  const auto chosen = select_action(pol, &critic, s, 1, 42);
  EXPECT_EQ(chosen, direct.to_vector());
}

TEST(SelectAction, ReturnsExhaustiveArgmaxOfProjection) {
  const auto pol = noisy_gaussian(2);
  const std::vector<double> dir{0.6, -0.8};
  const StubCritic critic([&](auto, auto a) { return a[0] * dir[0] + a[1] * dir[1]; }, [](auto) { return 0.0; });
  const std::vector<double> s{-0.2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto samples = pol.sample(s, 16, seed);
    std::size_t best = 0;
    double best_q = -1e300;
    for (std::size_t i = 0; i < 16; ++i) {
      const double q = samples.at(i, 0) * dir[0] + samples.at(i, 1) * dir[1];
      if (q > best_q) {
        best_q = q;
        best = i;
      }
    }
    const auto chosen = select_action(pol, &critic, s, 16, seed);
    EXPECT_EQ(chosen, std::vector<double>(samples.row_span(best).begin(), samples.row_span(best).end()));
  }
}

TEST(SelectAction, InvariantUnderIncreasingTransform) {
  const auto pol = noisy_gaussian(2);
  const StubCritic q([](auto s, auto a) { return std::sin(3 * a[0]) + a[1] * s[0]; }, [](auto) { return 0.0; });
  const StubCritic q2([](auto s, auto a) { return 2.0 * (std::sin(3 * a[0]) + a[1] * s[0]) + 7.0; }, [](auto) { return 0.0; });
  const std::vector<double> s{0.7};
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(select_action(pol, &q, s, 64, seed), select_action(pol, &q2, s, 64, seed));
}

TEST(SelectAction, ConstantPolicyAndTies) {
  const ConstantPolicy pol({0.25, -0.5});
  const StubCritic critic([](auto, auto a) { return a[0]; }, [](auto) { return 0.0; });
  const std::vector<double> s{0.0};
  for (std::size_t n : {1u, 3u, 64u}) EXPECT_EQ(select_action(pol, &critic, s, n, 9), (std::vector<double>{0.25, -0.5}));

  // A constant critic ties everywhere, so the first sample wins.
  const auto g = noisy_gaussian(1);
  const StubCritic flat([](auto, auto) { return 1.0; }, [](auto) { return 0.0; });
  EXPECT_EQ(select_action(g, &flat, s, 32, 4)[0], g.sample(s, 32, 4).at(0, 0));
  EXPECT_THROW(select_action(g, &flat, s, 0, 4), Error);
}

TEST(ExtractionSpec, RolloutCandidates) {
  EXPECT_EQ((ExtractionSpec{.kind = ExtractionKind::best_of_n_implicit, .n_samples = 64}).rollout_candidates(), 64u);
  EXPECT_EQ((ExtractionSpec{.kind = ExtractionKind::awr_explicit, .n_samples = 64}).rollout_candidates(), 1u);
  EXPECT_EQ((ExtractionSpec{.kind = ExtractionKind::awr_explicit, .n_samples = 8, .explicit_best_of_n = true})
                .rollout_candidates(),
            8u);
  EXPECT_EQ((ExtractionSpec{.kind = ExtractionKind::filtered_il}).rollout_candidates(), 1u);
  for (auto k : {ExtractionKind::none_il, ExtractionKind::filtered_il, ExtractionKind::awr_explicit,
                 ExtractionKind::best_of_n_implicit})
    EXPECT_EQ(extraction_kind_from_string(to_string(k)), k);
}

}  // namespace
}  // namespace batchlab::extraction
