#include "batchlab/common/error.hpp"
#include "batchlab/extraction/extraction.hpp"
#include "batchlab/nn/graph.hpp"
#include "batchlab/oracle/finite_difference.hpp"
#include "batchlab/policy/config.hpp"
#include "batchlab/policy/diffusion.hpp"
#include "batchlab/policy/gaussian.hpp"
#include "batchlab/policy/serialization.hpp"
#include "batchlab/rollout/transition_table.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

namespace batchlab::policy {
namespace {

ActionBounds unit_bounds(std::size_t dim, double half_width = 1.0) {
  return {std::vector<double>(dim, -half_width), std::vector<double>(dim, half_width)};
}

GaussianPolicyParams random_gaussian(std::size_t sdim, std::size_t adim, Rng& rng) {
  GaussianPolicyParams p{nn::MlpParams::init({sdim, 8, adim}, nn::Activation::tanh, rng), nn::Tensor::matrix(1, adim)};
  for (double& v : p.log_std.values()) v = rng.uniform(-1.0, 0.5);
  return p;
}

TEST(GaussianLogprob, AtMeanWithUnitStd) {
  GaussianPolicyParams p{nn::MlpParams::zeros({2, 1}, nn::Activation::relu), nn::Tensor::matrix(1, 1)};
  const std::vector<double> s{0.3, -0.7}, a{0.0};
  EXPECT_NEAR(gaussian_logprob(p, s, a), -0.5 * std::log(2.0 * std::numbers::pi), 1e-14);
}

TEST(GaussianLogprob, SymmetricAboutMean) {
  Rng rng(3);
  auto p = random_gaussian(3, 2, rng);
  const std::vector<double> s{0.1, 0.2, -0.4};
  const auto mu = p.trunk.forward(nn::Tensor::row(s));
  const std::vector<double> hi{mu[0] + 0.37, mu[1] - 0.11}, lo{mu[0] - 0.37, mu[1] + 0.11};
  EXPECT_NEAR(gaussian_logprob(p, s, hi), gaussian_logprob(p, s, lo), 1e-12);
}

TEST(GaussianLogprob, MatchesProductOfDensities) {
  Rng rng(4);
  auto p = random_gaussian(3, 3, rng);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> s{rng.normal(), rng.normal(), rng.normal()};
    const std::vector<double> a{rng.normal(), rng.normal(), rng.normal()};
    const auto mu = p.trunk.forward(nn::Tensor::row(s));
    double density = 1.0;
    for (std::size_t d = 0; d < 3; ++d) {
      const double sd = std::exp(p.log_std[d]);
      const double z = (a[d] - mu[d]) / sd;
      density *= std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    }
    EXPECT_NEAR(gaussian_logprob(p, s, a), std::log(density), 1e-10);
  }
}

TEST(GaussianLogprob, LogStdIsClamped) {
  GaussianPolicyParams p{nn::MlpParams::zeros({1, 1}, nn::Activation::relu), nn::Tensor::row({10.0})};
  const std::vector<double> s{0.0}, a{0.0};
  EXPECT_NEAR(gaussian_logprob(p, s, a), -kLogStdMax - 0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
}

TEST(GaussianNll, GraphMatchesLogprobAndFiniteDifferences) {
  Rng rng(5);
  auto p = random_gaussian(3, 2, rng);
  nn::Tensor states = nn::Tensor::matrix(6, 3), actions = nn::Tensor::matrix(6, 2);
  for (double& v : states.values()) v = rng.normal();
  for (double& v : actions.values()) v = rng.normal();

  auto build = [&](nn::Graph& g, nn::MlpBinding& b, nn::Var& ls) {
    b = nn::bind(g, p.trunk);
    ls = g.param(p.log_std);
    return g.mean(gaussian_nll(g, b, ls, g.input(states), g.input(actions)));
  };
  nn::Graph g;
  nn::MlpBinding b;
  nn::Var ls;
  const nn::Var loss = build(g, b, ls);
  double expect = 0.0;
  for (std::size_t i = 0; i < 6; ++i) expect -= gaussian_logprob(p, states.row_span(i), actions.row_span(i)) / 6.0;
  EXPECT_NEAR(g.value(loss).item(), expect, 1e-12);

  g.backward(loss);
  auto grads = nn::gradients(g, b);
  grads.push_back(g.grad(ls));
  auto params = p.parameters();
  auto check = oracle::check_gradients(
      [&] {
        nn::Graph h;
        nn::MlpBinding hb;
        nn::Var hl;
        return h.value(build(h, hb, hl)).item();
      },
      params, grads);
  EXPECT_LE(check.max_relative_error, 1e-5);
}

TEST(GaussianSample, MeanModeIsDeterministic) {
  Rng rng(6);
  GaussianPolicy pol(random_gaussian(2, 2, rng), unit_bounds(2, 5.0), SampleMode::mean);
  const std::vector<double> s{0.5, -0.5};
  const auto a = pol.sample(s, 3, 1), b = pol.sample(s, 3, 99);
  EXPECT_EQ(a, b);
  for (std::size_t d = 0; d < 2; ++d) EXPECT_EQ(a.at(2, d), pol.mean(s)[d]);
}

TEST(GaussianSample, TinyStdFullModeApproachesMean) {
  Rng rng(7);
  auto p = random_gaussian(2, 2, rng);
  p.log_std = nn::Tensor::row({-50.0, -50.0});
  GaussianPolicy full(p, unit_bounds(2, 5.0), SampleMode::full);
  const std::vector<double> s{0.2, 0.1};
  const auto a = full.sample(s, 50, 11);
  const auto mu = full.mean(s);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t d = 0; d < 2; ++d) EXPECT_NEAR(a.at(i, d), mu[d], 0.05);
}

TEST(GaussianSample, EmpiricalStdMatchesLearnedStd) {
  Rng rng(8);
  auto p = random_gaussian(1, 2, rng);
  p.log_std = nn::Tensor::row({std::log(0.5), std::log(0.2)});
  GaussianPolicy pol(p, unit_bounds(2, 100.0), SampleMode::full);
  const std::vector<double> s{0.0};
  const auto a = pol.sample(s, 100000, 12);
  const auto sd = pol.std_dev();
  for (std::size_t d = 0; d < 2; ++d) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      m += a.at(i, d);
      m2 += a.at(i, d) * a.at(i, d);
    }
    m /= a.rows();
    const double emp = std::sqrt(m2 / a.rows() - m * m);
    EXPECT_LE(std::abs(emp - sd[d]) / sd[d], 0.02);
  }
}

TEST(GaussianSample, FullModeClipsToBounds) {
  GaussianPolicyParams p{nn::MlpParams::zeros({1, 1}, nn::Activation::relu), nn::Tensor::row({1.5})};
  GaussianPolicy pol(p, unit_bounds(1), SampleMode::full);
  const std::vector<double> s{0.0};
  for (double v : pol.sample(s, 1000, 3).values()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(DiffusionSchedule, LinearScheduleInvariants) {
  const auto s = DiffusionSchedule::linear(100);
  ASSERT_EQ(s.beta.size(), 101u);
  EXPECT_EQ(s.alpha_bar[0], 1.0);
  EXPECT_NEAR(s.beta[1], 1e-4, 1e-18);
  EXPECT_NEAR(s.beta[100], 2e-2, 1e-15);
  for (int t = 2; t <= 100; ++t) {
    EXPECT_GT(s.beta[t], s.beta[t - 1]);
    EXPECT_LT(s.alpha_bar[t], s.alpha_bar[t - 1]);
  }
  EXPECT_THROW(DiffusionSchedule::linear(0), Error);
  EXPECT_THROW(DiffusionSchedule::linear(10, 0.1, 0.01), Error);
}

TEST(DiffusionLoss, PerfectPredictorGivesZero) {
  const auto sched = DiffusionSchedule::linear(10);
  Rng rng(1);
  nn::Tensor s = nn::Tensor::matrix(32, 2), a = nn::Tensor::matrix(32, 2);
  for (double& v : a.values()) v = rng.uniform(-1.0, 1.0);
  const auto batch = make_diffusion_batch(sched, s, a, rng);
  EXPECT_EQ(diffusion_loss_value(batch, batch.eps), 0.0);
}

TEST(DiffusionLoss, ZeroNetworkGivesActionDim) {
  constexpr std::size_t adim = 3;
  DiffusionPolicyParams p{nn::MlpParams::zeros({2 + adim + kTimeEmbeddingDim, 8, adim}, nn::Activation::relu),
                          DiffusionSchedule::linear(100)};
  constexpr std::size_t rows = 40000;
  nn::Tensor s = nn::Tensor::matrix(rows, 2), a = nn::Tensor::matrix(rows, adim, 0.3);
  // Loss is a mean of chi-squared(3) draws; its standard error here is about 0.012.
  EXPECT_NEAR(diffusion_train_loss(p, s, a, 17), static_cast<double>(adim), 0.06);
}

TEST(DiffusionLoss, SingleStepScheduleByHand) {
  const auto sched = DiffusionSchedule::linear(1, 0.01, 0.02);
  EXPECT_DOUBLE_EQ(sched.alpha_bar[1], 0.99);
  nn::Tensor s = nn::Tensor::row({0.5}), a = nn::Tensor::matrix(4, 1);
  s = nn::Tensor::matrix(4, 1, 0.5);
  a = nn::Tensor({4, 1}, {0.9, -0.2, 0.0, 1.0});
  Rng rng(21);
  const auto batch = make_diffusion_batch(sched, s, a, rng);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(batch.t[i], 1);
    EXPECT_NEAR(batch.noisy[i], std::sqrt(0.99) * a[i] + 0.1 * batch.eps[i], 1e-15);
    EXPECT_EQ(batch.input.at(i, 0), 0.5);
    EXPECT_EQ(batch.input.at(i, 1), batch.noisy[i]);
    EXPECT_NEAR(batch.input.at(i, 2), std::sin(1.0), 1e-15);
  }
}

TEST(DiffusionLoss, ForwardMarginalMatchesClosedForm) {
  const auto sched = DiffusionSchedule::linear(4, 0.05, 0.4);
  constexpr std::size_t rows = 80000;
  const double a0 = 0.6;
  nn::Tensor s = nn::Tensor::matrix(rows, 1), a = nn::Tensor::matrix(rows, 1, a0);
  Rng rng(5);
  const auto batch = make_diffusion_batch(sched, s, a, rng);
  for (int t = 1; t <= 4; ++t) {
    double n = 0, m = 0, m2 = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (batch.t[i] != t) continue;
      ++n;
      m += batch.noisy[i];
      m2 += batch.noisy[i] * batch.noisy[i];
    }
    ASSERT_GT(n, rows / 5);
    m /= n;
    const double var = m2 / n - m * m;
    const double want_var = 1.0 - sched.alpha_bar[t];
    EXPECT_NEAR(m, std::sqrt(sched.alpha_bar[t]) * a0, 5.0 * std::sqrt(want_var / n)) << "t=" << t;
    EXPECT_NEAR(var / want_var, 1.0, 0.05) << "t=" << t;
  }
}

TEST(DiffusionLoss, GraphLossMatchesFiniteDifferences) {
  Rng rng(9);
  DiffusionPolicyParams p{nn::MlpParams::init({2 + 2 + kTimeEmbeddingDim, 8, 2}, nn::Activation::tanh, rng),
                          DiffusionSchedule::linear(10)};
  nn::Tensor s = nn::Tensor::matrix(5, 2), a = nn::Tensor::matrix(5, 2);
  for (double& v : s.values()) v = rng.normal();
  for (double& v : a.values()) v = rng.uniform(-1, 1);
  const auto batch = make_diffusion_batch(p.schedule, s, a, rng);
  nn::Graph g;
  const auto b = nn::bind(g, p.eps_net);
  const nn::Var loss = g.mean(diffusion_per_sample_loss(g, b, batch));
  EXPECT_NEAR(g.value(loss).item(), diffusion_loss_value(batch, p.eps_net.forward(batch.input)), 1e-12);
  g.backward(loss);
  const auto grads = nn::gradients(g, b);
  auto params = p.eps_net.parameters();
  auto check = oracle::check_gradients(
      [&] { return diffusion_loss_value(batch, p.eps_net.forward(batch.input)); }, params, grads, 1e-5, 1e-5);
  EXPECT_LE(check.max_relative_error, 1e-5);
}

TEST(DiffusionSample, SingleStepZeroNetworkDividesBySqrtAlpha) {
  const auto sched = DiffusionSchedule::linear(1, 0.01, 0.02);
  DiffusionPolicy pol({nn::MlpParams::zeros({1 + 2 + kTimeEmbeddingDim, 2}, nn::Activation::relu), sched},
                      unit_bounds(2), false);
  const std::vector<double> s{0.0};
  const auto out = pol.sample(s, 16, 77);
  Rng replay(77);
  for (std::size_t i = 0; i < 16 * 2; ++i) {
    const double x1 = replay.normal();
    EXPECT_NEAR(out[i], std::clamp(x1 / std::sqrt(0.99), -1.0, 1.0), 1e-14);
  }
}

TEST(DiffusionSample, DeterministicInSeedAndBounded) {
  Rng rng(10);
  DiffusionPolicy pol({nn::MlpParams::init({2 + 1 + kTimeEmbeddingDim, 16, 1}, nn::Activation::relu, rng),
                       DiffusionSchedule::linear(20)},
                      {{-2.0}, {3.0}});
  const std::vector<double> s{0.1, 0.2};
  const auto a = pol.sample(s, 64, 5);
  EXPECT_EQ(a, pol.sample(s, 64, 5));
  EXPECT_NE(a, pol.sample(s, 64, 6));
  for (double v : a.values()) {
    EXPECT_GE(v, -2.0);
    EXPECT_LE(v, 3.0);
  }
}

TEST(DiffusionSample, NonFiniteChainIsAnError) {
  auto net = nn::MlpParams::zeros({1 + 1 + kTimeEmbeddingDim, 1}, nn::Activation::relu);
  net.biases[0][0] = std::numeric_limits<double>::infinity();
  DiffusionPolicy pol({net, DiffusionSchedule::linear(3)}, unit_bounds(1), false);
  const std::vector<double> s{0.0};
  EXPECT_THROW(pol.sample(s, 2, 1), Error);
}

// Behaviour cloning on a bimodal 1-D action set at +-0.8 with a constant state.
std::vector<rollout::Trajectory> bimodal_data(std::size_t per_mode) {
  std::vector<rollout::Trajectory> out;
  for (std::size_t i = 0; i < per_mode; ++i) {
    out.push_back(testing::single_step({0.0}, {0.8}));
    out.push_back(testing::single_step({0.0}, {-0.8}));
  }
  return out;
}

PolicyConfig bc_config(PolicyClass cls, std::size_t steps) {
  PolicyConfig c;
  c.policy_class = cls;
  c.steps_per_trajectory = steps;
  c.max_steps = steps;
  c.lr = 1e-3;
  return c;
}

TEST(DiffusionPolicyTraining, RecoversBothModes) {
  const auto data = bimodal_data(100);
  const rollout::TransitionTable table(data);
  const auto pol = extraction::train_policy(table, nullptr, {.kind = extraction::ExtractionKind::none_il},
                                            bc_config(PolicyClass::diffusion, 1500), unit_bounds(1), 3);
  const std::vector<double> s{0.0};
  const auto a = pol->sample(s, 1000, 4);
  int pos = 0, neg = 0;
  for (double v : a.values()) {
    if (std::abs(v - 0.8) < 0.3) ++pos;
    if (std::abs(v + 0.8) < 0.3) ++neg;
  }
  EXPECT_GE(pos, 300);
  EXPECT_GE(neg, 300);
}

TEST(GaussianPolicyTraining, MeanCollapsesBetweenModes) {
  const auto data = bimodal_data(100);
  const rollout::TransitionTable table(data);
  const auto pol = extraction::train_policy(table, nullptr, {.kind = extraction::ExtractionKind::none_il},
                                            bc_config(PolicyClass::gaussian, 1500), unit_bounds(1), 3);
  const std::vector<double> s{0.0};
  EXPECT_LE(std::abs(dynamic_cast<const GaussianPolicy&>(*pol).mean(s)[0]), 0.3);
}

TEST(GaussianPolicyTraining, RecoversUnimodalMean) {
  std::vector<rollout::Trajectory> data;
  Rng rng(2);
  for (int i = 0; i < 200; ++i) data.push_back(testing::single_step({0.0}, {0.4 + 0.1 * rng.normal()}));
  double mean = 0.0;
  for (const auto& t : data) mean += t.transitions[0].action[0] / data.size();
  const rollout::TransitionTable table(data);
  const auto pol = extraction::train_policy(table, nullptr, {.kind = extraction::ExtractionKind::none_il},
                                            bc_config(PolicyClass::gaussian, 1500), unit_bounds(1), 3);
  const auto& g = dynamic_cast<const GaussianPolicy&>(*pol);
  const std::vector<double> s{0.0};
  EXPECT_NEAR(g.mean(s)[0], mean, 0.03);
  EXPECT_LT(g.std_dev()[0], 1.0);
}

TEST(PolicySerialization, RoundTripsBothClasses) {
  Rng rng(12);
  GaussianPolicy g(random_gaussian(3, 2, rng), {{-1.0, -2.0}, {1.0, 2.0}}, SampleMode::full);
  DiffusionPolicy d({nn::MlpParams::init({3 + 2 + kTimeEmbeddingDim, 8, 2}, nn::Activation::relu, rng),
                     DiffusionSchedule::linear(7, 1e-3, 0.1)},
                    {{-1.0, -2.0}, {1.0, 2.0}}, false);
  for (const Policy* p : {static_cast<const Policy*>(&g), static_cast<const Policy*>(&d)}) {
    std::stringstream buf;
    write_policy(buf, *p);
    const auto back = read_policy(buf);
    const std::vector<double> s{0.1, 0.2, 0.3};
    EXPECT_EQ(back->bounds(), p->bounds());
    EXPECT_EQ(back->sample(s, 8, 3), p->sample(s, 8, 3));
  }
  std::stringstream bad("{\"class\":\"gaussian\"}\n");
  EXPECT_THROW(read_policy(bad), FormatError);
}

}  // namespace
}  // namespace batchlab::policy
