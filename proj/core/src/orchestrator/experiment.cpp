#include "batchlab/orchestrator/experiment.hpp"

#include "batchlab/env/registry.hpp"
#include "batchlab/rollout/collect.hpp"
#include "batchlab/rollout/transition_table.hpp"

namespace batchlab::orchestrator {

std::uint64_t stream_seed(std::uint64_t run_seed, int iteration, std::uint64_t stream) {
  return derive_seed({run_seed, static_cast<std::uint64_t>(iteration), stream});
}

namespace {

double success_fraction(std::span<const rollout::Trajectory> ts) {
  if (ts.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& t : ts) n += t.success ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(ts.size());
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, std::uint64_t seed, const IterationObserver& observer) {
  config.validate();
  const auto env = env::make_environment(config.env, config.env_params, config.value.gamma);
  const auto& spec = env->spec();
  const policy::ActionBounds bounds{spec.action_low, spec.action_high};
  const bool use_value = config.algorithm == AlgorithmClass::value_rl;
  const std::uint64_t eval_seed = stream_seed(seed, 0, kEvalStream);

  RunReport report;
  report.seed = seed;
  std::shared_ptr<const policy::Policy> pol;
  std::optional<value::ValueHeads> heads;

  for (int i = 0; i <= config.iterations; ++i) {
    try {
      std::vector<rollout::Trajectory> fresh;
      if (i == 0) {
        fresh = env::scripted_demos(*env, static_cast<int>(config.demos), config.demo_noise, stream_seed(seed, 0, kDemoStream));
      } else {
        const auto actor = rollout::Actor::from_spec(*pol, heads ? &*heads : nullptr, config.extraction);
        fresh = rollout::collect(*env, actor, config.rollouts_per_iteration, config.noise,
                                 stream_seed(seed, i, kCollectStream), i, config.jobs);
      }
      report.dataset.add(i, std::move(fresh));
      const rollout::TransitionTable table(report.dataset.all());

      if (use_value) {
        const value::ValueHeads* warm = config.value.warm_start && heads ? &*heads : nullptr;
        heads = value::update_value(table, config.value, stream_seed(seed, i, kValueStream), warm);
      }
      // pi_0 is plain behaviour cloning for every algorithm class.
      extraction::ExtractionSpec train_spec = config.extraction;
      if (i == 0) train_spec.kind = extraction::ExtractionKind::none_il;
      pol = extraction::train_policy(table, heads ? &*heads : nullptr, train_spec, config.policy, bounds,
                                     stream_seed(seed, i, kPolicyStream), pol.get());

      const auto eval_actor = i == 0 ? rollout::Actor{pol.get()}
                                     : rollout::Actor::from_spec(*pol, heads ? &*heads : nullptr, config.extraction);
      const auto eval = rollout::evaluate(*env, eval_actor, config.eval_episodes, eval_seed, config.jobs);

      const auto added = report.dataset.iteration(i);
      report.iterations.push_back({i, eval.mean, eval.stderr_, report.dataset.size(), report.dataset.transitions(),
                                   success_fraction(added)});
      if (observer) observer({report.iterations.back(), *pol, heads ? &*heads : nullptr, added});
    } catch (const RunError&) {
      throw;
    } catch (const std::exception& e) {
      throw RunError(i, e.what());
    }
  }
  report.final_policy = pol;
  report.final_heads = std::move(heads);
  return report;
}

}  // namespace batchlab::orchestrator
