#include "batchlab/extraction/extraction.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/common/rng.hpp"
#include "batchlab/nn/adam.hpp"
#include "batchlab/policy/diffusion.hpp"
#include "batchlab/policy/gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace batchlab::extraction {

std::string to_string(ExtractionKind k) {
  switch (k) {
    case ExtractionKind::none_il: return "none_il";
    case ExtractionKind::filtered_il: return "filtered_il";
    case ExtractionKind::awr_explicit: return "awr_explicit";
    case ExtractionKind::best_of_n_implicit: return "best_of_n_implicit";
  }
  return "?";
}

ExtractionKind extraction_kind_from_string(const std::string& name) {
  for (auto k : {ExtractionKind::none_il, ExtractionKind::filtered_il, ExtractionKind::awr_explicit,
                 ExtractionKind::best_of_n_implicit})
    if (to_string(k) == name) return k;
  throw Error("unknown extraction kind '" + name + "'");
}

std::size_t ExtractionSpec::rollout_candidates() const {
  if (kind == ExtractionKind::best_of_n_implicit) return n_samples;
  if (kind == ExtractionKind::awr_explicit && explicit_best_of_n) return n_samples;
  return 1;
}

double awr_weight(const value::Critic& critic, std::span<const double> state, std::span<const double> action, double beta,
                  double clip) {
  const nn::Tensor s = nn::Tensor::row(state);
  const double adv = critic.q(s, nn::Tensor::row(action))[0] - critic.v(s)[0];
  return std::min(std::exp(beta * adv), clip);
}

std::vector<double> awr_weights(const value::Critic& critic, const rollout::TransitionTable& table, double beta,
                                double clip) {
  const auto rows = table.all_indices();
  const auto batch = table.gather(rows);
  const nn::Tensor q = critic.q(batch.states, batch.actions);
  const nn::Tensor v = critic.v(batch.states);
  std::vector<double> w(rows.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::min(std::exp(beta * (q[i] - v[i])), clip);
  return w;
}

namespace {

nn::Tensor gather_weights(const std::vector<double>& weights, std::span<const std::size_t> rows) {
  nn::Tensor w = nn::Tensor::matrix(rows.size(), 1);
  for (std::size_t j = 0; j < rows.size(); ++j) w[j] = weights[rows[j]];
  return w;
}

nn::Tensor normalize_actions(const nn::Tensor& actions, const policy::ActionBounds& bounds) {
  nn::Tensor out = actions;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t d = 0; d < out.cols(); ++d) out.at(i, d) = bounds.normalize(out.at(i, d), d);
  return out;
}

struct TrainingPlan {
  std::vector<std::size_t> pool;
  std::vector<double> weights;
  std::size_t steps = 0;
};

template <typename StepFn>
void run_minibatches(const rollout::TransitionTable& table, const TrainingPlan& plan, std::size_t batch_size, Rng& rng,
                     const BatchObserver& observer, StepFn&& step) {
  std::vector<std::size_t> rows(batch_size);
  for (std::size_t s = 0; s < plan.steps; ++s) {
    for (auto& r : rows) r = plan.pool[rng.index(plan.pool.size())];
    if (observer) observer(rows);
    step(table.gather(rows), gather_weights(plan.weights, rows));
  }
}

void train_gaussian(policy::GaussianPolicy& pol, const rollout::TransitionTable& table, const TrainingPlan& plan,
                    const policy::PolicyConfig& config, Rng& rng, const BatchObserver& observer) {
  auto& p = pol.params();
  auto params = p.parameters();
  auto adam = nn::AdamState::for_params(std::span<nn::Tensor* const>(params), nn::AdamConfig{.lr = config.lr});
  run_minibatches(table, plan, config.batch_size, rng, observer,
                  [&](const rollout::TransitionBatch& batch, const nn::Tensor& weights) {
                    nn::Graph g;
                    const auto trunk = nn::bind(g, p.trunk);
                    const nn::Var log_std = g.param(p.log_std);
                    const nn::Var nll = policy::gaussian_nll(g, trunk, log_std, g.input(batch.states), g.input(batch.actions));
                    const nn::Var loss = g.mean(g.mul_col(nll, g.input(weights)));
                    g.backward(loss);
                    auto grads = nn::gradients(g, trunk);
                    grads.push_back(g.grad(log_std));
                    nn::adam_step(adam, params, grads);
                  });
}

void train_diffusion(policy::DiffusionPolicy& pol, const rollout::TransitionTable& table, const TrainingPlan& plan,
                     const policy::PolicyConfig& config, Rng& rng, const BatchObserver& observer) {
  auto& p = pol.params();
  auto params = p.eps_net.parameters();
  auto adam = nn::AdamState::for_params(std::span<nn::Tensor* const>(params), nn::AdamConfig{.lr = config.lr});
  run_minibatches(table, plan, config.batch_size, rng, observer,
                  [&](const rollout::TransitionBatch& batch, const nn::Tensor& weights) {
                    const auto noised = policy::make_diffusion_batch(
                        p.schedule, batch.states, normalize_actions(batch.actions, pol.bounds()), rng);
                    nn::Graph g;
                    const auto net = nn::bind(g, p.eps_net);
                    const nn::Var per_sample = policy::diffusion_per_sample_loss(g, net, noised);
                    const nn::Var loss = g.mean(g.mul_col(per_sample, g.input(weights)));
                    g.backward(loss);
                    nn::adam_step(adam, params, nn::gradients(g, net));
                  });
}

}  // namespace

std::unique_ptr<policy::Policy> train_policy(const rollout::TransitionTable& table, const value::Critic* critic,
                                             const ExtractionSpec& spec, const policy::PolicyConfig& config,
                                             const policy::ActionBounds& bounds, std::uint64_t seed,
                                             const policy::Policy* warm_start, const BatchObserver& observer) {
  if (table.empty()) throw DataError("train_policy: empty dataset");
  if (spec.kind == ExtractionKind::awr_explicit && critic == nullptr)
    throw DataError("train_policy: awr_explicit requires value heads");
  if (config.batch_size == 0) throw ConfigError("policy.batch_size", "must be >= 1");

  TrainingPlan plan;
  plan.pool = spec.kind == ExtractionKind::filtered_il ? table.success_indices() : table.all_indices();
  if (plan.pool.empty()) throw DataError("empty filtered dataset");
  plan.weights = spec.kind == ExtractionKind::awr_explicit ? awr_weights(*critic, table, spec.beta, spec.weight_clip)
                                                           : std::vector<double>(table.size(), 1.0);
  // Step budget follows the trajectories actually trained on.
  std::size_t trajectories = table.num_trajectories();
  if (spec.kind == ExtractionKind::filtered_il) {
    std::vector<bool> seen(table.num_trajectories(), false);
    trajectories = 0;
    for (auto i : plan.pool)
      if (!seen[table.trajectory_of(i)]) {
        seen[table.trajectory_of(i)] = true;
        ++trajectories;
      }
  }
  plan.steps = config.gradient_steps(trajectories);

  Rng rng(seed);
  std::unique_ptr<policy::Policy> pol;
  if (warm_start && config.warm_start) {
    if (const auto* g = dynamic_cast<const policy::GaussianPolicy*>(warm_start))
      pol = std::make_unique<policy::GaussianPolicy>(*g);
    else if (const auto* d = dynamic_cast<const policy::DiffusionPolicy*>(warm_start))
      pol = std::make_unique<policy::DiffusionPolicy>(*d);
  }
  if (!pol) pol = policy::init_policy(config, table.state_dim(), bounds, rng);

  if (auto* g = dynamic_cast<policy::GaussianPolicy*>(pol.get()))
    train_gaussian(*g, table, plan, config, rng, observer);
  else
    train_diffusion(dynamic_cast<policy::DiffusionPolicy&>(*pol), table, plan, config, rng, observer);
  return pol;
}

std::vector<double> select_action(const policy::Policy& policy, const value::Critic* critic,
                                  std::span<const double> state, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("select_action: n must be >= 1");
  const nn::Tensor samples = policy.sample(state, n, seed);
  std::size_t best = 0;
  if (critic != nullptr && n > 1) {
    const nn::Tensor q = critic->q_for_state(state, samples);
    for (std::size_t i = 1; i < n; ++i)
      if (q[i] > q[best]) best = i;
  }
  auto row = samples.row_span(best);
  return {row.begin(), row.end()};
}

}  // namespace batchlab::extraction
