// batchlab: run, sweep, heatmap and accept front end.
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or arguments.

#include "batchlab/common/allocator.hpp"
#include "batchlab/common/error.hpp"
#include "batchlab/env/registry.hpp"
#include "batchlab/rollout/collect.hpp"
#include "batchlab/rollout/io.hpp"
#include "batchlab/lab/acceptance.hpp"
#include "batchlab/lab/artifacts.hpp"
#include "batchlab/lab/commands.hpp"
#include "batchlab/lab/config_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace batchlab;

namespace {

struct CommonOptions {
  std::string config;
  bool fast = false;
  std::optional<std::size_t> jobs;
};

orchestrator::ExperimentConfig load(const CommonOptions& o) {
  auto c = lab::load_config(o.config);
  if (o.fast) lab::apply_fast_profile(c);
  if (o.jobs) c.jobs = std::max<std::size_t>(1, *o.jobs);
  c.validate();
  return c;
}

int cmd_run(const CommonOptions& o, std::optional<std::uint64_t> seed, std::string out, std::size_t bins) {
  const auto c = load(o);
  const std::uint64_t s = seed.value_or(c.seeds.front());
  if (out.empty()) out = "runs/" + c.env + "_" + orchestrator::to_string(c.algorithm) + "_seed" + std::to_string(s);
  const auto report = lab::execute_run(c, s, {.dir = out, .histogram_bins = bins});
  std::cout << "run " << out << ": return " << report.initial_return() << " -> " << report.final_return() << "\n";
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& axis, const std::string& out) {
  const auto m_values = lab::parse_axis(axis);
  const auto c = load(o);
  const auto rows = lab::run_sweep(c, m_values, out);
  std::cout << lab::read_file(fs::path(out) / "sweep.csv");
  for (const auto& r : rows)
    if (!r.error.empty()) std::cerr << "run M=" << r.m << " seed=" << r.seed << " failed: " << r.error << "\n";
  return 0;
}

int cmd_heatmap(const std::vector<std::string>& runs, std::size_t bins, bool success_only, const std::string& out) {
  std::vector<fs::path> dirs(runs.begin(), runs.end());
  const auto entries = lab::render_heatmaps(dirs, bins, success_only, out);
  for (const auto& e : entries) std::cout << e.run.string() << ": " << e.nonzero_cells << " nonzero cells\n";
  return 0;
}

int cmd_eval(const std::string& run_dir, int iteration, const std::vector<std::size_t>& candidates,
             std::optional<std::size_t> episodes, std::uint64_t seed, std::optional<std::size_t> jobs,
             const std::string& trajectories_out) {
  const auto config = lab::load_run_config(run_dir);
  const auto ckpt = lab::load_checkpoint(run_dir, iteration);
  const auto env = env::make_environment(config.env, config.env_params, config.value.gamma);
  for (const std::size_t n : candidates) {
    if (n > 1 && !ckpt.heads) throw ConfigError("candidates", "run has no value checkpoint; only 1 is allowed");
    const rollout::Actor actor{ckpt.policy.get(), ckpt.heads ? &*ckpt.heads : nullptr, n};
    const auto r = rollout::evaluate(*env, actor, episodes.value_or(config.eval_episodes), seed, jobs.value_or(config.jobs));
    std::cout << "candidates " << n << ": return " << r.mean << " +- " << r.stderr_ << "\n";
    if (!trajectories_out.empty()) {
      const auto ts = rollout::collect(*env, actor, episodes.value_or(config.eval_episodes), std::nullopt, seed, 0,
                                       jobs.value_or(config.jobs));
      std::ostringstream o;
      rollout::write_trajectories(o, ts);
      lab::write_atomic(trajectories_out + ".n" + std::to_string(n) + ".jsonl", o.str());
    }
  }
  return 0;
}

fs::path self_path(const char* argv0) {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  return ec ? fs::absolute(argv0) : p;
}

int cmd_accept(lab::AcceptanceOptions options, const std::string& report) {
  const auto results = lab::run_acceptance(options, [](const lab::CriterionResult& r) {
    std::cerr << (r.passed ? "PASS" : "FAIL") << " " << r.id << " " << r.name << " (" << r.seconds << " s)\n";
  });
  const auto text = lab::render_acceptance_text(results);
  std::cout << text;
  if (!report.empty()) lab::write_atomic(report, lab::acceptance_json(results).dump(2) + "\n");
  return lab::acceptance_json(results)["passed"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  CLI::App app{"batchlab: batch online RL experiments"};
  app.require_subcommand(1);

  CommonOptions common;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t bins = 40;

  auto* run = app.add_subcommand("run", "Run one experiment and write its run directory");
  run->add_option("--config", common.config, "JSON config file")->required();
  run->add_option("--seed", seed, "Seed (default: first entry of config seeds)");
  run->add_option("--out", out, "Run directory");
  run->add_option("--jobs", common.jobs, "Worker threads");
  run->add_option("--bins", bins, "Histogram bins per axis");
  run->add_flag("--fast", common.fast, "Reduced-cost profile");

  std::string axis;
  std::string sweep_out = "sweep";
  auto* sweep = app.add_subcommand("sweep", "Data-scaling sweep over rollouts per iteration");
  sweep->add_option("--config", common.config, "JSON config file")->required();
  sweep->add_option("--axis", axis, "M=<v1>,<v2>,...")->required();
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep->add_option("--jobs", common.jobs, "Runs in parallel");
  sweep->add_flag("--fast", common.fast, "Reduced-cost profile");

  std::vector<std::string> runs;
  bool success_only = false;
  std::string heat_out = "heatmaps";
  auto* heat = app.add_subcommand("heatmap", "State-visitation histograms of stored trajectories");
  heat->add_option("--runs", runs, "Run directories")->required();
  heat->add_option("--bins", bins, "Bins per axis");
  heat->add_flag("--success-only", success_only, "Only successful trajectories");
  heat->add_option("--out", heat_out, "Output directory");

  std::string eval_run;
  int eval_iteration = -1;
  std::vector<std::size_t> eval_candidates{1};
  std::optional<std::size_t> eval_episodes;
  std::uint64_t eval_seed = 0;
  std::string eval_trajectories;
  auto* eval = app.add_subcommand("eval", "Evaluate a stored checkpoint");
  eval->add_option("--trajectories", eval_trajectories, "Also write noise-free episodes to <prefix>.n<N>.jsonl");
  eval->add_option("--run", eval_run, "Run directory")->required();
  eval->add_option("--iteration", eval_iteration, "Checkpoint iteration (default: latest)");
  eval->add_option("--candidates", eval_candidates, "Sampled actions per step (best-of-n under Q)");
  eval->add_option("--episodes", eval_episodes, "Evaluation episodes");
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_option("--jobs", common.jobs, "Worker threads");

  lab::AcceptanceOptions accept_options;
  std::string accept_work = "accept";
  std::string accept_report;
  auto* accept = app.add_subcommand("accept", "Run the acceptance criteria and report pass/fail per criterion");
  accept->add_flag("--fast", accept_options.fast, "Reduced-cost profile for the run-based criteria");
  accept->add_option("--only", accept_options.only, "Criterion ids to run (default: all)");
  accept->add_flag("--corrupt-checkpoint", accept_options.corrupt_checkpoint,
                   "Damage the stored value checkpoint before it is reloaded");
  accept->add_option("--work", accept_work, "Scratch directory for run outputs");
  accept->add_option("--report", accept_report, "Also write a JSON report");
  accept->add_option("--jobs", common.jobs, "Runs in parallel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return cmd_run(common, seed, out, bins);
    if (*sweep) return cmd_sweep(common, axis, sweep_out);
    if (*eval) return cmd_eval(eval_run, eval_iteration, eval_candidates, eval_episodes, eval_seed, common.jobs, eval_trajectories);
    if (*heat) return cmd_heatmap(runs, bins, success_only, heat_out);
    if (*accept) {
      accept_options.work_dir = accept_work;
      accept_options.jobs = std::max<std::size_t>(1, common.jobs.value_or(1));
      accept_options.cli = self_path(argv[0]);
      return cmd_accept(accept_options, accept_report);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
