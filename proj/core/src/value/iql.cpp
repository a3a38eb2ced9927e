#include "batchlab/value/iql.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/nn/adam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace batchlab::value {

nn::Tensor Critic::q_for_state(std::span<const double> state, const nn::Tensor& actions) const {
  nn::Tensor states = nn::Tensor::matrix(actions.rows(), state.size());
  for (std::size_t i = 0; i < actions.rows(); ++i) std::copy(state.begin(), state.end(), states.row_span(i).begin());
  return q(states, actions);
}

std::size_t IqlConfig::gradient_steps(std::size_t num_trajectories) const {
  return std::min(steps_per_trajectory * num_trajectories, max_steps);
}

nn::Tensor concat_state_action(const nn::Tensor& states, const nn::Tensor& actions) {
  if (states.rows() != actions.rows()) throw ShapeError("concat_state_action: row mismatch");
  nn::Tensor out = nn::Tensor::matrix(states.rows(), states.cols() + actions.cols());
  out.mat().leftCols(static_cast<Eigen::Index>(states.cols())) = states.mat();
  out.mat().rightCols(static_cast<Eigen::Index>(actions.cols())) = actions.mat();
  return out;
}

namespace {

std::vector<std::size_t> q_sizes(std::size_t in, const IqlConfig& c) {
  std::vector<std::size_t> s{in};
  s.insert(s.end(), c.hidden.begin(), c.hidden.end());
  s.push_back(1);
  return s;
}

nn::Tensor elementwise_min(nn::Tensor a, const nn::Tensor& b) {
  a.mat() = a.mat().cwiseMin(b.mat());
  return a;
}

void polyak_update(nn::MlpParams& target, const nn::MlpParams& online, double rate) {
  auto t = target.parameters();
  auto o = online.parameters();
  for (std::size_t i = 0; i < t.size(); ++i) t[i]->mat() = (1.0 - rate) * t[i]->mat() + rate * o[i]->mat();
}

struct Trainable {
  nn::MlpParams* net;
  nn::AdamState adam;
};

Trainable trainable(nn::MlpParams& net, double lr) {
  auto params = net.parameters();
  return Trainable{&net, nn::AdamState::for_params(std::span<nn::Tensor* const>(params), nn::AdamConfig{.lr = lr})};
}

template <typename LossBuilder>
double train_step(Trainable& t, LossBuilder&& build) {
  nn::Graph g;
  const nn::MlpBinding b = nn::bind(g, *t.net);
  const nn::Var loss = build(g, b);
  const double value = g.value(loss).item();
  g.backward(loss);
  auto grads = nn::gradients(g, b);
  auto params = t.net->parameters();
  nn::adam_step(t.adam, params, grads);
  return value;
}

}  // namespace

ValueHeads ValueHeads::init(std::size_t state_dim, std::size_t action_dim, const IqlConfig& config, Rng& rng) {
  if (!(config.tau > 0.0 && config.tau < 1.0)) throw ConfigError("value.tau", "must lie in (0,1)");
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) throw ConfigError("value.gamma", "must lie in (0,1)");
  ValueHeads h;
  h.tau = config.tau;
  h.gamma = config.gamma;
  h.q_net = nn::MlpParams::init(q_sizes(state_dim + action_dim, config), config.activation, rng);
  h.q_target_net = h.q_net;
  h.v_net = nn::MlpParams::init(q_sizes(state_dim, config), config.activation, rng);
  if (config.twin_q) {
    h.q2_net = nn::MlpParams::init(q_sizes(state_dim + action_dim, config), config.activation, rng);
    h.q2_target_net = h.q2_net;
  }
  return h;
}

nn::Tensor ValueHeads::q(const nn::Tensor& states, const nn::Tensor& actions) const {
  const nn::Tensor sa = concat_state_action(states, actions);
  nn::Tensor out = q_net.forward(sa);
  if (q2_net) out = elementwise_min(std::move(out), q2_net->forward(sa));
  return out;
}

nn::Tensor ValueHeads::v(const nn::Tensor& states) const { return v_net.forward(states); }

nn::Tensor ValueHeads::q_target_values(const nn::Tensor& states, const nn::Tensor& actions) const {
  const nn::Tensor sa = concat_state_action(states, actions);
  nn::Tensor out = q_target_net.forward(sa);
  if (q2_target_net) out = elementwise_min(std::move(out), q2_target_net->forward(sa));
  return out;
}

bool ValueHeads::operator==(const ValueHeads& o) const {
  return q_net == o.q_net && q_target_net == o.q_target_net && v_net == o.v_net && q2_net == o.q2_net &&
         q2_target_net == o.q2_target_net && tau == o.tau &&
         gamma == o.gamma;
}

double expectile_loss(double tau, double x) { return std::abs(tau - (x < 0.0 ? 1.0 : 0.0)) * x * x; }

nn::Tensor bellman_targets(const ValueHeads& heads, const rollout::TransitionBatch& batch) {
  nn::Tensor next_v = heads.v(batch.next_states);
  nn::Tensor out = batch.rewards;
  out.mat().array() += heads.gamma * (1.0 - batch.dones.mat().array()) * next_v.mat().array();
  return out;
}

double q_loss(const ValueHeads& heads, const rollout::TransitionBatch& batch) {
  const nn::Tensor targets = bellman_targets(heads, batch);
  const nn::Tensor pred = heads.q_net.forward(concat_state_action(batch.states, batch.actions));
  return (targets.mat() - pred.mat()).squaredNorm() / static_cast<double>(targets.rows());
}

double v_loss(const ValueHeads& heads, const rollout::TransitionBatch& batch) {
  const nn::Tensor qt = heads.q_target_values(batch.states, batch.actions);
  const nn::Tensor v = heads.v(batch.states);
  double total = 0.0;
  for (std::size_t i = 0; i < qt.rows(); ++i) total += expectile_loss(heads.tau, qt[i] - v[i]);
  return total / static_cast<double>(qt.rows());
}

nn::Var q_loss_graph(nn::Graph& g, const nn::MlpBinding& q, const nn::Tensor& targets,
                     const rollout::TransitionBatch& batch) {
  const nn::Var pred = nn::forward(g, q, g.input(concat_state_action(batch.states, batch.actions)));
  return g.mean(g.square(g.sub(g.input(targets), pred)));
}

nn::Var v_loss_graph(nn::Graph& g, const nn::MlpBinding& v, const nn::Tensor& q_targets,
                     const rollout::TransitionBatch& batch, double tau) {
  const nn::Var pred = nn::forward(g, v, g.input(batch.states));
  return g.mean(g.expectile(g.sub(g.input(q_targets), pred), tau));
}

ValueHeads update_value(const rollout::TransitionTable& table, const IqlConfig& config, std::uint64_t seed,
                        const ValueHeads* warm_start, ValueTrainingStats* stats) {
  if (table.empty()) throw DataError("update_value: empty dataset");
  if (config.batch_size == 0) throw ConfigError("value.batch_size", "must be >= 1");
  Rng rng(seed);
  ValueHeads heads = warm_start ? *warm_start : ValueHeads::init(table.state_dim(), table.action_dim(), config, rng);
  heads.tau = config.tau;
  heads.gamma = config.gamma;

  Trainable v_opt = trainable(heads.v_net, config.lr);
  Trainable q_opt = trainable(heads.q_net, config.lr);
  std::optional<Trainable> q2_opt;
  if (heads.q2_net) q2_opt = trainable(*heads.q2_net, config.lr);

  const std::size_t steps = config.gradient_steps(table.num_trajectories());
  std::vector<std::size_t> rows(config.batch_size);
  double last_q = 0.0;
  double last_v = 0.0;
  for (std::size_t step = 0; step < steps; ++step) {
    for (auto& r : rows) r = rng.index(table.size());
    const auto batch = table.gather(rows);
    try {
      const nn::Tensor qt = heads.q_target_values(batch.states, batch.actions);
      last_v = train_step(v_opt, [&](nn::Graph& g, const nn::MlpBinding& b) {
        return v_loss_graph(g, b, qt, batch, config.tau);
      });
      const nn::Tensor targets = bellman_targets(heads, batch);
      last_q = train_step(q_opt, [&](nn::Graph& g, const nn::MlpBinding& b) { return q_loss_graph(g, b, targets, batch); });
      if (q2_opt)
        train_step(*q2_opt, [&](nn::Graph& g, const nn::MlpBinding& b) { return q_loss_graph(g, b, targets, batch); });
    } catch (const NumericError& e) {
      std::ostringstream msg;
      msg << "update_value diverged at step " << step << "/" << steps << " (last q_loss " << last_q << ", v_loss "
          << last_v << "): " << e.what();
      throw NumericError(msg.str());
    }
    polyak_update(heads.q_target_net, heads.q_net, config.polyak);
    if (heads.q2_net) polyak_update(*heads.q2_target_net, *heads.q2_net, config.polyak);
  }
  if (stats) *stats = ValueTrainingStats{steps, last_q, last_v};
  return heads;
}

void fit_expectile_value(nn::MlpParams& v, const nn::Tensor& states, const nn::Tensor& q_targets, double tau,
                         std::size_t steps, double lr) {
  Trainable opt = trainable(v, lr);
  for (std::size_t s = 0; s < steps; ++s) {
    train_step(opt, [&](nn::Graph& g, const nn::MlpBinding& b) {
      const nn::Var pred = nn::forward(g, b, g.input(states));
      return g.mean(g.expectile(g.sub(g.input(q_targets), pred), tau));
    });
  }
}

}  // namespace batchlab::value
