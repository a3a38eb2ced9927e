#include "batchlab/common/error.hpp"
#include "batchlab/env/chain.hpp"
#include "batchlab/oracle/finite_difference.hpp"
#include "batchlab/value/iql.hpp"
#include "batchlab/value/serialization.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace batchlab::value {
namespace {

std::vector<double> one_hot(std::size_t s) {
  std::vector<double> v(env::Chain5::kStates, 0.0);
  v[s] = 1.0;
  return v;
}

// Chain5 transitions as single-step trajectories: `right` right moves and
// `left` left moves from every state.
std::vector<rollout::Trajectory> chain_dataset(int right, int left) {
  std::vector<rollout::Trajectory> out;
  for (std::size_t s = 0; s < env::Chain5::kStates; ++s) {
    for (int k = 0; k < right + left; ++k) {
      const bool go_right = k < right;
      rollout::Trajectory t;
      const bool goal = go_right && s == env::Chain5::kStates - 1;
      const std::size_t next = go_right ? std::min(s + 1, env::Chain5::kStates - 1) : (s == 0 ? 0 : s - 1);
      t.transitions.push_back({one_hot(s), {go_right ? env::Chain5::kRight : env::Chain5::kLeft}, goal ? 1.0 : 0.0,
                               one_hot(next), goal, goal});
      t.success = goal;
      out.push_back(std::move(t));
    }
  }
  return out;
}

rollout::TransitionBatch random_batch(std::size_t rows, std::size_t sdim, std::size_t adim, Rng& rng) {
  rollout::TransitionBatch b{nn::Tensor::matrix(rows, sdim), nn::Tensor::matrix(rows, adim), nn::Tensor::matrix(rows, 1),
                             nn::Tensor::matrix(rows, sdim), nn::Tensor::matrix(rows, 1)};
  for (auto* t : {&b.states, &b.actions, &b.next_states})
    for (double& v : t->values()) v = rng.normal();
  for (double& v : b.rewards.values()) v = rng.index(2);
  for (double& v : b.dones.values()) v = rng.index(3) == 0 ? 1.0 : 0.0;
  return b;
}

ValueHeads small_heads(std::size_t sdim, std::size_t adim, Rng& rng, double tau = 0.8, double gamma = 0.99) {
  IqlConfig c;
  c.hidden = {8};
  c.activation = nn::Activation::tanh;
  c.tau = tau;
  c.gamma = gamma;
  return ValueHeads::init(sdim, adim, c, rng);
}

// Single-layer net whose output is the constant `bias`.
nn::MlpParams constant_net(std::size_t in, double bias) {
  auto net = nn::MlpParams::zeros({in, 1}, nn::Activation::relu);
  net.biases[0][0] = bias;
  return net;
}

TEST(ExpectileLoss, DirectSubstitution) {
  EXPECT_DOUBLE_EQ(expectile_loss(0.8, 1.0), 0.8);
  EXPECT_DOUBLE_EQ(expectile_loss(0.8, -1.0), 0.2);
  for (double x : {-3.0, -0.5, 0.0, 0.25, 2.0}) EXPECT_DOUBLE_EQ(expectile_loss(0.5, x), 0.5 * x * x);
}

TEST(QLoss, TargetIdentityGivesZero) {
  ValueHeads h;
  h.gamma = 0.99;
  h.q_net = constant_net(2, 2.98);
  h.q_target_net = h.q_net;
  h.v_net = constant_net(1, 2.0);
  rollout::TransitionBatch b{nn::Tensor::row({0.3}), nn::Tensor::row({0.1}), nn::Tensor::row({1.0}),
                             nn::Tensor::row({0.4}), nn::Tensor::row({0.0})};
  EXPECT_NEAR(q_loss(h, b), 0.0, 1e-24);
}

TEST(QLoss, TerminalTargetIsReward) {
  Rng rng(1);
  auto h = small_heads(2, 1, rng);
  auto b = random_batch(5, 2, 1, rng);
  b.dones = nn::Tensor::matrix(5, 1, 1.0);
  const auto targets = bellman_targets(h, b);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(targets[i], b.rewards[i]);
}

TEST(QLoss, MatchesNaiveLoop) {
  Rng rng(2);
  auto h = small_heads(3, 2, rng);
  auto b = random_batch(17, 3, 2, rng);
  double total = 0.0;
  for (std::size_t i = 0; i < 17; ++i) {
    std::vector<double> sa(b.states.row_span(i).begin(), b.states.row_span(i).end());
    sa.insert(sa.end(), b.actions.row_span(i).begin(), b.actions.row_span(i).end());
    const double q = h.q_net.forward(nn::Tensor::row(sa)).item();
    const double vn = h.v_net.forward(nn::Tensor::row(b.next_states.row_span(i))).item();
    const double target = b.rewards[i] + (b.dones[i] > 0.5 ? 0.0 : h.gamma * vn);
    total += (target - q) * (target - q);
  }
  EXPECT_NEAR(q_loss(h, b), total / 17.0, 1e-12);
}

TEST(VLoss, ZeroResidualAndSymmetricCase) {
  ValueHeads h;
  h.q_net = constant_net(3, 1.5);
  h.q_target_net = h.q_net;
  h.v_net = constant_net(2, 1.5);
  Rng rng(3);
  auto b = random_batch(9, 2, 1, rng);
  EXPECT_EQ(v_loss(h, b), 0.0);

  h.tau = 0.5;
  h.v_net = constant_net(2, 0.5);
  EXPECT_DOUBLE_EQ(v_loss(h, b), 0.5 * 1.0);
}

TEST(Losses, GraphFormsMatchFiniteDifferences) {
  Rng rng(4);
  auto h = small_heads(3, 2, rng, 0.7);
  auto b = random_batch(11, 3, 2, rng);
  const auto targets = bellman_targets(h, b);
  const auto qt = h.q_target_values(b.states, b.actions);

  {
    nn::Graph g;
    const auto bind = nn::bind(g, h.q_net);
    const auto loss = q_loss_graph(g, bind, targets, b);
    EXPECT_NEAR(g.value(loss).item(), q_loss(h, b), 1e-12);
    g.backward(loss);
    const auto grads = nn::gradients(g, bind);
    auto params = h.q_net.parameters();
    auto check = oracle::check_gradients([&] { return q_loss(h, b); }, params, grads, 1e-5, 1e-5);
    EXPECT_LE(check.max_relative_error, 1e-5);
  }
  {
    nn::Graph g;
    const auto bind = nn::bind(g, h.v_net);
    const auto loss = v_loss_graph(g, bind, qt, b, h.tau);
    EXPECT_NEAR(g.value(loss).item(), v_loss(h, b), 1e-12);
    g.backward(loss);
    const auto grads = nn::gradients(g, bind);
    auto params = h.v_net.parameters();
    auto check = oracle::check_gradients([&] { return v_loss(h, b); }, params, grads, 1e-5, 1e-5);
    EXPECT_LE(check.max_relative_error, 1e-5);
  }
}

TEST(ValueHeads, InitValidatesHyperparameters) {
  Rng rng(0);
  IqlConfig c;
  c.tau = 1.0;
  EXPECT_THROW(ValueHeads::init(2, 1, c, rng), ConfigError);
  c.tau = 0.8;
  c.gamma = 0.0;
  EXPECT_THROW(ValueHeads::init(2, 1, c, rng), ConfigError);
}

TEST(ValueHeads, TwinCriticReportsMinimum) {
  Rng rng(5);
  IqlConfig c;
  c.hidden = {8};
  c.twin_q = true;
  auto h = ValueHeads::init(2, 1, c, rng);
  auto b = random_batch(6, 2, 1, rng);
  const auto q = h.q(b.states, b.actions);
  const auto sa = concat_state_action(b.states, b.actions);
  const auto q1 = h.q_net.forward(sa), q2 = h.q2_net->forward(sa);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(q[i], std::min(q1[i], q2[i]));
}

// Q* from value iteration, evaluated on every (state, action) pair of Chain5.
struct ChainTargets {
  nn::Tensor states;
  nn::Tensor q;
  std::vector<double> max_q;
};

ChainTargets chain_targets(const env::QTable& q) {
  ChainTargets out{nn::Tensor::matrix(10, 5), nn::Tensor::matrix(10, 1), {}};
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      out.states.at(2 * s + a, s) = 1.0;
      out.q[2 * s + a] = q[s][a];
    }
    out.max_q.push_back(std::max(q[s][0], q[s][1]));
  }
  return out;
}

TEST(FitExpectileValue, HighTauApproachesMaximum) {
  const auto vi = value_iteration(env::Chain5(0.9).tabular());
  const auto t = chain_targets(vi.q);
  Rng rng(6);
  auto v = nn::MlpParams::init({5, 32, 1}, nn::Activation::relu, rng);
  fit_expectile_value(v, t.states, t.q, 0.99, 4000, 3e-3);
  for (std::size_t s = 0; s < 5; ++s) {
    const double got = v.forward(nn::Tensor::row(one_hot(s))).item();
    EXPECT_LE(std::abs(got - t.max_q[s]) / t.max_q[s], 0.01) << "state " << s;
  }
}

TEST(FitExpectileValue, HalfTauIsBehaviourMean) {
  const auto vi = value_iteration(env::Chain5(0.9).tabular());
  const auto t = chain_targets(vi.q);
  Rng rng(7);
  auto v = nn::MlpParams::init({5, 32, 1}, nn::Activation::relu, rng);
  fit_expectile_value(v, t.states, t.q, 0.5, 4000, 3e-3);
  for (std::size_t s = 0; s < 5; ++s)
    EXPECT_NEAR(v.forward(nn::Tensor::row(one_hot(s))).item(), 0.5 * (vi.q[s][0] + vi.q[s][1]), 2e-3);
}

TEST(FitExpectileValue, MonotoneInTau) {
  const auto vi = value_iteration(env::Chain5(0.9).tabular());
  const auto t = chain_targets(vi.q);
  std::vector<std::vector<double>> values;
  for (double tau : {0.3, 0.6, 0.9}) {
    Rng rng(8);
    auto v = nn::MlpParams::init({5, 32, 1}, nn::Activation::relu, rng);
    fit_expectile_value(v, t.states, t.q, tau, 3000, 3e-3);
    std::vector<double> row;
    for (std::size_t s = 0; s < 5; ++s) row.push_back(v.forward(nn::Tensor::row(one_hot(s))).item());
    values.push_back(row);
  }
  for (std::size_t k = 1; k < values.size(); ++k)
    for (std::size_t s = 0; s < 5; ++s) EXPECT_LE(values[k - 1][s], values[k][s] + 2e-3);
}

IqlConfig chain_config() {
  IqlConfig c;
  c.tau = 0.9;
  c.gamma = 0.9;
  c.batch_size = 64;
  c.lr = 1e-3;
  c.steps_per_trajectory = 200;
  c.max_steps = 4000;
  return c;
}

TEST(UpdateValue, RecoversChainOptimalValues) {
  // Four right moves per left move from each state keeps the tau=0.9
  // expectile within 0.014 of the max (tabular fixed point, computed offline).
  const auto data = chain_dataset(4, 1);
  const rollout::TransitionTable table(data);
  const auto heads = update_value(table, chain_config(), 11);
  const auto vi = value_iteration(env::Chain5(0.9).tabular());
  for (std::size_t s = 0; s < 5; ++s) {
    const auto q = heads.q_for_state(one_hot(s), nn::Tensor({2, 1}, {env::Chain5::kLeft, env::Chain5::kRight}));
    EXPECT_NEAR(std::max(q[0], q[1]), std::max(vi.q[s][0], vi.q[s][1]), 0.05) << "state " << s;
  }
}

TEST(UpdateValue, TerminalZeroRewardFixedPoint) {
  std::vector<rollout::Trajectory> data;
  for (int i = 0; i < 10; ++i) data.push_back(testing::single_step({0.5, -0.5}, {0.2}, 0.0, true));
  const rollout::TransitionTable table(data);
  auto c = chain_config();
  c.max_steps = 1500;
  const auto heads = update_value(table, c, 2);
  EXPECT_NEAR(heads.q(nn::Tensor::row({0.5, -0.5}), nn::Tensor::row({0.2})).item(), 0.0, 0.01);
}

TEST(UpdateValue, DeterministicInSeed) {
  const auto data = chain_dataset(1, 1);
  const rollout::TransitionTable table(data);
  auto c = chain_config();
  c.max_steps = 50;
  c.hidden = {16};
  EXPECT_TRUE(update_value(table, c, 3) == update_value(table, c, 3));
  EXPECT_FALSE(update_value(table, c, 3) == update_value(table, c, 4));
}

TEST(UpdateValue, ZeroPolyakRateFreezesTarget) {
  const auto data = chain_dataset(1, 1);
  const rollout::TransitionTable table(data);
  auto c = chain_config();
  c.max_steps = 30;
  c.hidden = {16};
  c.polyak = 0.0;
  Rng rng(9);
  const auto start = ValueHeads::init(5, 1, c, rng);
  const auto trained = update_value(table, c, 1, &start);
  EXPECT_EQ(trained.q_target_net, start.q_target_net);
  EXPECT_NE(trained.q_net, start.q_net);
}

TEST(UpdateValue, StepScheduleAndErrors) {
  IqlConfig c;
  EXPECT_EQ(c.gradient_steps(10), 2000u);
  EXPECT_EQ(c.gradient_steps(1000), 50000u);
  EXPECT_THROW(update_value(rollout::TransitionTable{}, c, 0), DataError);
}

TEST(UpdateValue, DivergenceIsReportedWithStep) {
  std::vector<rollout::Trajectory> data{testing::single_step({1.0}, {1.0}, 1e300, true)};
  const rollout::TransitionTable table(data);
  auto c = chain_config();
  c.max_steps = 20;
  try {
    update_value(table, c, 0);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(ValueSerialization, RoundTrip) {
  Rng rng(10);
  for (bool twin : {false, true}) {
    IqlConfig c;
    c.hidden = {8, 4};
    c.twin_q = twin;
    c.tau = 0.7;
    const auto h = ValueHeads::init(3, 2, c, rng);
    std::stringstream buf;
    write_value_heads(buf, h);
    EXPECT_TRUE(read_value_heads(buf) == h);
  }
  std::stringstream bad("not json\n");
  EXPECT_THROW(read_value_heads(bad), FormatError);
}

}  // namespace
}  // namespace batchlab::value
