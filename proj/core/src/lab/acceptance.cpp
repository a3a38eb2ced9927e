#include "batchlab/lab/acceptance.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/common/parallel.hpp"
#include "batchlab/common/rng.hpp"
#include "batchlab/env/chain.hpp"
#include "batchlab/env/registry.hpp"
#include "batchlab/extraction/extraction.hpp"
#include "batchlab/lab/artifacts.hpp"
#include "batchlab/lab/config_io.hpp"
#include "batchlab/nn/graph.hpp"
#include "batchlab/oracle/finite_difference.hpp"
#include "batchlab/orchestrator/histogram.hpp"
#include "batchlab/policy/diffusion.hpp"
#include "batchlab/policy/gaussian.hpp"
#include "batchlab/rollout/collect.hpp"
#include "batchlab/rollout/noise.hpp"
#include "batchlab/rollout/transition_table.hpp"
#include "batchlab/value/iql.hpp"
#include "batchlab/value/serialization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>

namespace batchlab::lab {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Tolerances, pinned.
constexpr double kGradientTolerance = 1e-5;
constexpr double kExpectileRelativeTolerance = 0.01;
constexpr double kIqlAbsoluteTolerance = 0.05;
constexpr double kModeMassMin = 0.30;
constexpr double kGaussianMeanMax = 0.3;
constexpr double kBandLow = 0.30;
constexpr double kBandHigh = 0.65;
constexpr double kRecipeGainMin = 0.15;
constexpr double kTrendTolerance = 0.02;
constexpr double kDiversityRatioMin = 1.5;
constexpr double kAutocorrelationTolerance = 0.05;
constexpr double kVarianceRelativeTolerance = 0.05;
// Guards exact ties in ">=" comparisons against last-bit rounding.
constexpr double kTieSlack = 1e-12;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string num(double v) { return fmt("%.4g", v); }

CriterionResult make(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

// 1 ---------------------------------------------------------------------------

// Central-difference step, and the denominator floor of the relative error:
// gradients below ~1e-5 are compared by absolute error instead, since the
// difference quotient's roundoff (~1e-11) dominates them.
constexpr double kStep = 1e-5;
constexpr double kFloor = 1e-5;

rollout::TransitionBatch random_batch(std::size_t rows, std::size_t sdim, std::size_t adim, Rng& rng) {
  rollout::TransitionBatch b{nn::Tensor::matrix(rows, sdim), nn::Tensor::matrix(rows, adim), nn::Tensor::matrix(rows, 1),
                             nn::Tensor::matrix(rows, sdim), nn::Tensor::matrix(rows, 1)};
  for (auto* t : {&b.states, &b.actions, &b.next_states})
    for (double& v : t->values()) v = rng.normal();
  for (double& v : b.rewards.values()) v = static_cast<double>(rng.index(2));
  for (double& v : b.dones.values()) v = rng.index(3) == 0 ? 1.0 : 0.0;
  return b;
}

double bc_gradient_error(Rng& rng) {
  policy::GaussianPolicyParams p{nn::MlpParams::init({3, 16, 2}, nn::Activation::tanh, rng), nn::Tensor::matrix(1, 2)};
  for (double& v : p.log_std.values()) v = rng.uniform(-1.0, 0.5);
  nn::Tensor states = nn::Tensor::matrix(8, 3), actions = nn::Tensor::matrix(8, 2);
  for (double& v : states.values()) v = rng.normal();
  for (double& v : actions.values()) v = rng.normal();
  auto build = [&](nn::Graph& g, nn::MlpBinding& b, nn::Var& ls) {
    b = nn::bind(g, p.trunk);
    ls = g.param(p.log_std);
    return g.mean(policy::gaussian_nll(g, b, ls, g.input(states), g.input(actions)));
  };
  nn::Graph g;
  nn::MlpBinding b;
  nn::Var ls;
  g.backward(build(g, b, ls));
  auto grads = nn::gradients(g, b);
  grads.push_back(g.grad(ls));
  auto params = p.parameters();
  return oracle::check_gradients(
             [&] {
               nn::Graph h;
               nn::MlpBinding hb;
               nn::Var hl;
               return h.value(build(h, hb, hl)).item();
             },
             params, grads)
      .max_relative_error;
}

std::pair<double, double> value_gradient_errors(Rng& rng) {
  value::IqlConfig c;
  c.hidden = {16};
  c.activation = nn::Activation::tanh;
  c.tau = 0.8;
  auto h = value::ValueHeads::init(3, 2, c, rng);
  const auto b = random_batch(12, 3, 2, rng);
  const auto targets = value::bellman_targets(h, b);
  const auto qt = h.q_target_values(b.states, b.actions);

  nn::Graph gq;
  const auto bq = nn::bind(gq, h.q_net);
  gq.backward(value::q_loss_graph(gq, bq, targets, b));
  auto q_params = h.q_net.parameters();
  const double q_err =
      oracle::check_gradients([&] { return value::q_loss(h, b); }, q_params, nn::gradients(gq, bq), kStep, kFloor)
          .max_relative_error;

  nn::Graph gv;
  const auto bv = nn::bind(gv, h.v_net);
  gv.backward(value::v_loss_graph(gv, bv, qt, b, h.tau));
  auto v_params = h.v_net.parameters();
  const double v_err =
      oracle::check_gradients([&] { return value::v_loss(h, b); }, v_params, nn::gradients(gv, bv), kStep, kFloor)
          .max_relative_error;
  return {v_err, q_err};
}

double diffusion_gradient_error(Rng& rng) {
  policy::DiffusionPolicyParams p{
      nn::MlpParams::init({2 + 2 + policy::kTimeEmbeddingDim, 16, 2}, nn::Activation::tanh, rng),
      policy::DiffusionSchedule::linear(25)};
  nn::Tensor s = nn::Tensor::matrix(8, 2), a = nn::Tensor::matrix(8, 2);
  for (double& v : s.values()) v = rng.normal();
  for (double& v : a.values()) v = rng.uniform(-1.0, 1.0);
  const auto batch = policy::make_diffusion_batch(p.schedule, s, a, rng);
  nn::Graph g;
  const auto b = nn::bind(g, p.eps_net);
  g.backward(g.mean(policy::diffusion_per_sample_loss(g, b, batch)));
  auto params = p.eps_net.parameters();
  return oracle::check_gradients([&] { return policy::diffusion_loss_value(batch, p.eps_net.forward(batch.input)); },
                                 params, nn::gradients(g, b), kStep, kFloor)
      .max_relative_error;
}

CriterionResult gradient_correctness() {
  auto r = make(1, "gradient-correctness");
  Rng rng(1001);
  const double bc = bc_gradient_error(rng);
  const auto [expectile, q] = value_gradient_errors(rng);
  const double diffusion = diffusion_gradient_error(rng);
  const double worst = std::max({bc, expectile, q, diffusion});
  r.measured = {{"bc_log_likelihood", bc},
                {"expectile_loss", expectile},
                {"q_loss", q},
                {"diffusion_loss", diffusion},
                {"tolerance", kGradientTolerance}};
  r.passed = worst <= kGradientTolerance;
  r.detail = "max relative error " + num(worst) + " over BC, expectile, Q and diffusion losses (limit " +
             num(kGradientTolerance) + ")";
  return r;
}

// 2, 3 ------------------------------------------------------------------------

std::vector<double> one_hot(std::size_t s) {
  std::vector<double> v(env::Chain5::kStates, 0.0);
  v[s] = 1.0;
  return v;
}

CriterionResult expectile_limits() {
  auto r = make(2, "expectile-limits");
  const auto vi = env::value_iteration(env::Chain5(0.9).tabular());
  // Behaviour takes the worse (left) action twice as often as the right one.
  constexpr std::size_t kLeftCopies = 2;
  constexpr std::size_t kRightCopies = 1;
  constexpr std::size_t kRows = env::Chain5::kStates * (kLeftCopies + kRightCopies);
  nn::Tensor states = nn::Tensor::matrix(kRows, env::Chain5::kStates), targets = nn::Tensor::matrix(kRows, 1);
  std::size_t row = 0;
  for (std::size_t s = 0; s < env::Chain5::kStates; ++s) {
    for (std::size_t k = 0; k < kLeftCopies + kRightCopies; ++k, ++row) {
      states.at(row, s) = 1.0;
      targets[row] = vi.q[s][k < kLeftCopies ? 0 : 1];
    }
  }
  double worst_max = 0.0, worst_mean = 0.0;
  ordered_json per_state = ordered_json::array();
  std::vector<double> v_high, v_half;
  for (double tau : {0.99, 0.5}) {
    Rng rng(tau > 0.9 ? 2001 : 2002);
    auto v = nn::MlpParams::init({env::Chain5::kStates, 32, 1}, nn::Activation::relu, rng);
    value::fit_expectile_value(v, states, targets, tau, 4000, 3e-3);
    for (std::size_t s = 0; s < env::Chain5::kStates; ++s)
      (tau > 0.9 ? v_high : v_half).push_back(v.forward(nn::Tensor::row(one_hot(s))).item());
  }
  for (std::size_t s = 0; s < env::Chain5::kStates; ++s) {
    const double max_q = std::max(vi.q[s][0], vi.q[s][1]);
    const double mean_q =
        (kLeftCopies * vi.q[s][0] + kRightCopies * vi.q[s][1]) / static_cast<double>(kLeftCopies + kRightCopies);
    const double e_max = std::abs(v_high[s] - max_q) / std::abs(max_q);
    const double e_mean = std::abs(v_half[s] - mean_q) / std::abs(mean_q);
    worst_max = std::max(worst_max, e_max);
    worst_mean = std::max(worst_mean, e_mean);
    per_state.push_back({{"state", s}, {"max_q", max_q}, {"v_0.99", v_high[s]}, {"mean_q", mean_q}, {"v_0.5", v_half[s]}});
  }
  r.measured = {{"states", per_state},
                {"max_relative_error_tau_0.99", worst_max},
                {"max_relative_error_tau_0.5", worst_mean},
                {"tolerance", kExpectileRelativeTolerance}};
  r.passed = worst_max <= kExpectileRelativeTolerance && worst_mean <= kExpectileRelativeTolerance;
  r.detail = "tau=0.99 vs max_a Q: " + fmt("%.2f%%", 100 * worst_max) + ", tau=0.5 vs behaviour mean: " +
             fmt("%.2f%%", 100 * worst_mean) + " (limit 1%)";
  return r;
}

// Every (state, action) of Chain5 as single-step trajectories, four right
// moves per left move.
std::vector<rollout::Trajectory> chain_coverage() {
  const env::Chain5 chain(0.9);
  std::vector<rollout::Trajectory> out;
  for (std::size_t s = 0; s < env::Chain5::kStates; ++s) {
    for (int k = 0; k < 5; ++k) {
      const auto state = chain.state_at(s);
      const std::vector<double> action{k < 4 ? env::Chain5::kRight : env::Chain5::kLeft};
      const auto [next, reward] = chain.step(state, action);
      rollout::Trajectory t;
      t.transitions.push_back(
          {state.observation.to_vector(), action, reward, next.observation.to_vector(), next.done, next.success});
      t.success = next.success;
      out.push_back(std::move(t));
    }
  }
  return out;
}

CriterionResult iql_oracle(const fs::path& dir, bool corrupt) {
  auto r = make(3, "iql-oracle");
  value::IqlConfig c;
  c.tau = 0.9;
  c.gamma = 0.9;
  c.batch_size = 64;
  c.lr = 1e-3;
  c.steps_per_trajectory = 200;
  c.max_steps = 4000;
  const auto data = chain_coverage();
  const auto trained = value::update_value(rollout::TransitionTable(data), c, 3001);

  const auto path = dir / "value.ckpt";
  std::ostringstream bytes;
  value::write_value_heads(bytes, trained);
  std::string stored = bytes.str();
  if (corrupt) stored.resize(stored.size() / 2);
  write_atomic(path, stored);

  std::optional<value::ValueHeads> heads;
  try {
    std::istringstream in(read_file(path));
    heads = value::read_value_heads(in);
  } catch (const Error& e) {
    r.detail = "stored checkpoint could not be reloaded: " + std::string(e.what());
    r.measured = {{"checkpoint", path.filename().string()}, {"error", e.what()}};
    return r;
  }

  const auto vi = env::value_iteration(env::Chain5(0.9).tabular());
  const nn::Tensor actions({2, 1}, {env::Chain5::kLeft, env::Chain5::kRight});
  double worst = 0.0;
  ordered_json per_state = ordered_json::array();
  for (std::size_t s = 0; s < env::Chain5::kStates; ++s) {
    const auto q = heads->q_for_state(one_hot(s), actions);
    const double got = std::max(q[0], q[1]);
    const double want = std::max(vi.q[s][0], vi.q[s][1]);
    worst = std::max(worst, std::abs(got - want));
    per_state.push_back({{"state", s}, {"max_q", got}, {"optimal", want}});
  }
  r.measured = {{"states", per_state}, {"max_abs_error", worst}, {"tolerance", kIqlAbsoluteTolerance}};
  r.passed = worst <= kIqlAbsoluteTolerance;
  r.detail = "reloaded Q vs value iteration, max |error| " + num(worst) + " (limit " + num(kIqlAbsoluteTolerance) + ")";
  return r;
}

// 4 ---------------------------------------------------------------------------

CriterionResult expressivity_gap() {
  auto r = make(4, "expressivity-gap");
  std::vector<rollout::Trajectory> data;
  for (int i = 0; i < 100; ++i) {
    for (double a : {0.8, -0.8}) {
      rollout::Trajectory t;
      t.transitions.push_back({{0.0}, {a}, 0.0, {0.0}, true, false});
      data.push_back(std::move(t));
    }
  }
  const rollout::TransitionTable table(data);
  const policy::ActionBounds bounds{{-1.0}, {1.0}};
  policy::PolicyConfig pc;
  pc.steps_per_trajectory = 1500;
  pc.max_steps = 1500;
  pc.lr = 1e-3;
  pc.diffusion_steps = 25;
  const extraction::ExtractionSpec bc{.kind = extraction::ExtractionKind::none_il};

  pc.policy_class = policy::PolicyClass::diffusion;
  const auto diffusion = extraction::train_policy(table, nullptr, bc, pc, bounds, 4001);
  const std::vector<double> s{0.0};
  const auto samples = diffusion->sample(s, 1000, 4002);
  std::size_t pos = 0, neg = 0;
  for (double v : samples.values()) {
    pos += std::abs(v - 0.8) < 0.3;
    neg += std::abs(v + 0.8) < 0.3;
  }
  const double pos_mass = pos / 1000.0, neg_mass = neg / 1000.0;

  pc.policy_class = policy::PolicyClass::gaussian;
  const auto gaussian = extraction::train_policy(table, nullptr, bc, pc, bounds, 4001);
  const double mean = dynamic_cast<const policy::GaussianPolicy&>(*gaussian).mean(s)[0];

  r.measured = {{"diffusion_mass_plus", pos_mass},
                {"diffusion_mass_minus", neg_mass},
                {"gaussian_mean", mean},
                {"mode_mass_min", kModeMassMin},
                {"gaussian_mean_max", kGaussianMeanMax}};
  r.passed = pos_mass >= kModeMassMin && neg_mass >= kModeMassMin && std::abs(mean) <= kGaussianMeanMax;
  r.detail = "diffusion mass " + num(pos_mass) + " / " + num(neg_mass) + " in the +/-0.8 modes (min " +
             num(kModeMassMin) + "), Gaussian mean " + num(mean) + " (|mean| max " + num(kGaussianMeanMax) + ")";
  return r;
}

// 5, 6, 7 ---------------------------------------------------------------------

constexpr std::uint64_t kProtocolSeeds[] = {0, 1, 2};
const char* const kProtocolArms[] = {"recipe", "filtered_il", "awr"};

orchestrator::ExperimentConfig protocol_config(const std::string& arm, bool fast) {
  nlohmann::json doc{{"env", "TwoCorridors"}, {"iterations", 5}, {"rollouts_per_iteration", 50}};
  if (arm == "recipe") {
    doc["algorithm"] = "value_rl";
  } else if (arm == "filtered_il") {
    doc["algorithm"] = "filtered_il";
  } else {
    doc["algorithm"] = "value_rl";
    doc["extraction"] = {{"kind", "awr_explicit"}};
  }
  auto c = config_from_json(doc);
  if (fast) apply_fast_profile(c);
  c.jobs = 1;
  return c;
}

struct ArmRuns {
  std::vector<fs::path> dirs;
  std::vector<std::vector<orchestrator::IterationMetrics>> rows;  // per seed, from metrics.jsonl
  std::string error;

  double mean_at(bool final) const {
    double total = 0.0;
    for (const auto& r : rows) total += final ? r.back().return_mean : r.front().return_mean;
    return total / static_cast<double>(rows.size());
  }
};

struct Protocol {
  std::map<std::string, ArmRuns> arms;
  std::string error;  // first failure, if any
};

std::vector<orchestrator::IterationMetrics> read_metrics(const fs::path& dir) {
  std::vector<orchestrator::IterationMetrics> rows;
  std::istringstream in(read_file(dir / "metrics.jsonl"));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(parse_metrics_row(line));
  if (rows.empty()) throw FormatError(dir.string() + "/metrics.jsonl: no rows");
  return rows;
}

Protocol run_protocol(const fs::path& dir, const AcceptanceOptions& options) {
  struct Job {
    std::string arm;
    std::uint64_t seed;
    fs::path dir;
  };
  std::vector<Job> jobs;
  for (const char* arm : kProtocolArms)
    for (auto seed : kProtocolSeeds) jobs.push_back({arm, seed, dir / (std::string(arm) + "_seed" + std::to_string(seed))});
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), options.jobs, [&](std::size_t i) {
    const auto& j = jobs[i];
    try {
      fs::remove_all(j.dir);
      execute_run(protocol_config(j.arm, options.fast), j.seed, {.dir = j.dir, .run_id = j.arm, .histogram_bins = 40});
    } catch (const std::exception& e) {
      errors[i] = j.arm + " seed " + std::to_string(j.seed) + ": " + e.what();
    }
  });
  Protocol p;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& arm = p.arms[jobs[i].arm];
    arm.dirs.push_back(jobs[i].dir);
    if (!errors[i].empty()) {
      if (arm.error.empty()) arm.error = errors[i];
      if (p.error.empty()) p.error = errors[i];
      continue;
    }
    arm.rows.push_back(read_metrics(jobs[i].dir));
  }
  return p;
}

ordered_json arm_json(const ArmRuns& a) {
  ordered_json initial = ordered_json::array(), final = ordered_json::array();
  for (const auto& r : a.rows) {
    initial.push_back(r.front().return_mean);
    final.push_back(r.back().return_mean);
  }
  return {{"initial", initial}, {"final", final}, {"final_mean", a.mean_at(true)}};
}

CriterionResult recipe_improvement(const Protocol& p) {
  auto r = make(5, "recipe-improvement");
  if (!p.error.empty()) {
    r.detail = "protocol run failed: " + p.error;
    return r;
  }
  const auto& recipe = p.arms.at("recipe");
  const auto& filtered = p.arms.at("filtered_il");
  const double pi0 = recipe.mean_at(false);
  const double final = recipe.mean_at(true);
  const double filtered_final = filtered.mean_at(true);
  const bool in_band = pi0 >= kBandLow && pi0 <= kBandHigh;
  r.measured = {{"pi0_mean", pi0},
                {"recipe", arm_json(recipe)},
                {"filtered_il", arm_json(filtered)},
                {"band", {kBandLow, kBandHigh}},
                {"min_gain", kRecipeGainMin}};
  r.passed = in_band && final >= pi0 + kRecipeGainMin - kTieSlack && final >= filtered_final - kTieSlack;
  r.detail = "pi0 " + num(pi0) + (in_band ? " (in band)" : " (outside 0.30-0.65)") + ", recipe final " + num(final) +
             " (need >= " + num(pi0 + kRecipeGainMin) + "), filtered-IL final " + num(filtered_final);
  return r;
}

CriterionResult extraction_ordering(const Protocol& p) {
  auto r = make(6, "extraction-ordering");
  if (!p.error.empty()) {
    r.detail = "protocol run failed: " + p.error;
    return r;
  }
  const auto& recipe = p.arms.at("recipe");
  const auto& awr = p.arms.at("awr");
  const double implicit = recipe.mean_at(true), explicit_ = awr.mean_at(true);
  r.measured = {{"best_of_n", arm_json(recipe)}, {"awr", arm_json(awr)}, {"tolerance", kTrendTolerance}};
  r.passed = implicit >= explicit_ - kTrendTolerance - kTieSlack;
  r.detail = "best-of-64 final " + num(implicit) + " vs AWR final " + num(explicit_) + " (tolerance " +
             num(kTrendTolerance) + ")";
  return r;
}

// Success-only visitation of the rollouts (demos excluded) pooled over seeds.
orchestrator::Histogram pooled_success_histogram(const ArmRuns& arm) {
  orchestrator::Histogram pooled{40, std::vector<std::uint64_t>(40 * 40, 0)};
  for (const auto& dir : arm.dirs) {
    const auto config = load_run_config(dir);
    const auto env = env::make_environment(config.env, config.env_params, config.value.gamma);
    auto trajectories = load_run_trajectories(dir);
    std::erase_if(trajectories, [](const auto& t) { return t.provenance.source != rollout::Source::rollout; });
    const auto h = orchestrator::visitation_histogram(*env, trajectories, 40, true);
    for (std::size_t i = 0; i < h.counts.size(); ++i) pooled.counts[i] += h.counts[i];
  }
  return pooled;
}

CriterionResult diversity(const Protocol& p) {
  auto r = make(7, "success-diversity");
  if (!p.error.empty()) {
    r.detail = "protocol run failed: " + p.error;
    return r;
  }
  const auto value_rl = pooled_success_histogram(p.arms.at("recipe")).nonzero_cells();
  const auto filtered = pooled_success_histogram(p.arms.at("filtered_il")).nonzero_cells();
  const double ratio = filtered == 0 ? (value_rl == 0 ? 0.0 : INFINITY) : static_cast<double>(value_rl) / filtered;
  r.measured = {{"value_rl_nonzero_cells", value_rl},
                {"filtered_il_nonzero_cells", filtered},
                {"ratio", std::isinf(ratio) ? ordered_json("inf") : ordered_json(ratio)},
                {"min_ratio", kDiversityRatioMin}};
  r.passed = ratio >= kDiversityRatioMin;
  r.detail = "success-only 40x40 cells: value_rl " + std::to_string(value_rl) + ", filtered-IL " +
             std::to_string(filtered) + ", ratio " + num(ratio) + " (min " + num(kDiversityRatioMin) + ")";
  return r;
}

// 8 ---------------------------------------------------------------------------

CriterionResult ou_fidelity() {
  auto r = make(8, "ou-noise");
  const rollout::OuConfig c{5.0, 0.05, 0.02};
  Rng rng(8001);
  auto state = rollout::OuNoiseState::zero(1, c);
  for (int i = 0; i < 1000; ++i) rollout::ou_step(state, c.dt, rng);
  constexpr std::size_t n = 100000;
  std::vector<double> xs(n);
  for (double& x : xs) x = rollout::ou_step(state, c.dt, rng)[0];
  double mean = 0.0;
  for (double x : xs) mean += x / n;
  double var = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += (xs[i] - mean) * (xs[i] - mean) / n;
  for (std::size_t i = 1; i < n; ++i) cov += (xs[i] - mean) * (xs[i - 1] - mean) / (n - 1);
  const double rho = cov / var;
  const double want_rho = 1.0 - c.theta * c.dt;
  const double want_var = rollout::ou_stationary_variance(c.theta, c.sigma, c.dt);
  const double var_error = std::abs(var / want_var - 1.0);
  r.measured = {{"lag1_autocorrelation", rho},
                {"expected_autocorrelation", want_rho},
                {"variance", var},
                {"expected_variance", want_var}};
  r.passed = std::abs(rho - want_rho) <= kAutocorrelationTolerance && var_error <= kVarianceRelativeTolerance;
  r.detail = "lag-1 autocorrelation " + num(rho) + " (want " + num(want_rho) + " +/- 0.05), variance off by " +
             fmt("%.2f%%", 100 * var_error) + " (limit 5%)";
  return r;
}

// 9 ---------------------------------------------------------------------------

constexpr std::size_t kCandidateCounts[] = {1, 4, 16, 64};

CriterionResult best_of_n(const fs::path& dir, const AcceptanceOptions& options) {
  auto r = make(9, "best-of-n-monotone");
  auto config = config_from_json({{"env", "PointReach"}, {"algorithm", "value_rl"}, {"iterations", 2},
                                  {"rollouts_per_iteration", 50}});
  if (options.fast) apply_fast_profile(config);
  config.jobs = 1;
  const std::size_t seeds = std::size(kProtocolSeeds);
  std::vector<std::vector<double>> returns(seeds);
  parallel_for(seeds, options.jobs, [&](std::size_t i) {
    const auto run_dir = dir / ("seed" + std::to_string(kProtocolSeeds[i]));
    fs::remove_all(run_dir);
    execute_run(config, kProtocolSeeds[i], {.dir = run_dir, .run_id = "best_of_n", .checkpoints = true});
    const auto ckpt = load_checkpoint(run_dir);
    const auto env = env::make_environment(config.env, config.env_params, config.value.gamma);
    for (auto n : kCandidateCounts) {
      const rollout::Actor actor{ckpt.policy.get(), &*ckpt.heads, n};
      returns[i].push_back(rollout::evaluate(*env, actor, config.eval_episodes, 9001 + kProtocolSeeds[i], 1).mean);
    }
  });
  std::vector<double> means(std::size(kCandidateCounts), 0.0);
  for (const auto& row : returns)
    for (std::size_t k = 0; k < means.size(); ++k) means[k] += row[k] / seeds;
  bool monotone = true;
  for (std::size_t k = 1; k < means.size(); ++k) monotone &= means[k] >= means[k - 1] - kTrendTolerance - kTieSlack;
  ordered_json per_n = ordered_json::object();
  std::string listing;
  for (std::size_t k = 0; k < means.size(); ++k) {
    per_n["n" + std::to_string(kCandidateCounts[k])] = means[k];
    listing += (k ? ", " : "") + std::string("n=") + std::to_string(kCandidateCounts[k]) + " " + num(means[k]);
  }
  r.measured = {{"mean_return", per_n}, {"per_seed", returns}, {"tolerance", kTrendTolerance}};
  r.passed = monotone;
  r.detail = "mean eval return " + listing + " (tolerance " + num(kTrendTolerance) + ")";
  return r;
}

// 10 --------------------------------------------------------------------------

std::string quoted(const fs::path& p) {
  std::string out = "'";
  for (char ch : p.string()) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return out + "'";
}

CriterionResult determinism(const fs::path& dir, const AcceptanceOptions& options) {
  auto r = make(10, "cli-determinism");
  if (options.cli.empty()) {
    r.detail = "no CLI executable to spawn";
    return r;
  }
  auto config = config_from_json({{"env", "PointReach"},
                                  {"algorithm", "value_rl"},
                                  {"iterations", 2},
                                  {"rollouts_per_iteration", 10},
                                  {"demos", 4},
                                  {"eval_episodes", 10},
                                  {"policy", {{"hidden", {32, 32}}, {"diffusion_steps", 10}, {"max_steps", 400}}},
                                  {"value", {{"hidden", {32, 32}}, {"max_steps", 400}}}});
  config.jobs = std::max<std::size_t>(1, std::min<std::size_t>(options.jobs, 2));
  const auto config_path = dir / "config.json";
  write_atomic(config_path, config_to_json(config).dump(2) + "\n");
  std::vector<std::string> metrics;
  for (const char* name : {"first", "second"}) {
    const auto out = dir / name;
    fs::remove_all(out);
    const std::string command = quoted(options.cli) + " run --config " + quoted(config_path) + " --seed 7 --out " +
                                quoted(out) + " > " + quoted(dir / (std::string(name) + ".log")) + " 2>&1";
    const int status = std::system(command.c_str());
    if (status != 0) {
      r.detail = std::string(name) + " run exited with status " + std::to_string(status);
      return r;
    }
    metrics.push_back(read_file(out / "metrics.jsonl"));
  }
  r.measured = {{"bytes", metrics[0].size()}, {"sha256", {sha256_hex(metrics[0]), sha256_hex(metrics[1])}}};
  r.passed = metrics[0] == metrics[1] && !metrics[0].empty();
  r.detail = r.passed ? "metrics.jsonl identical across two runs (" + std::to_string(metrics[0].size()) + " bytes)"
                      : "metrics.jsonl differs between the two runs";
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, const CriterionObserver& observer) {
  std::vector<int> ids = options.only;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (int id : ids)
    if (id < 1 || id > kCriterionCount) throw ConfigError("only", "criterion ids are 1.." + std::to_string(kCriterionCount));

  fs::create_directories(options.work_dir);
  std::optional<Protocol> protocol;
  auto shared_protocol = [&]() -> const Protocol& {
    if (!protocol) protocol = run_protocol(options.work_dir / "protocol", options);
    return *protocol;
  };

  std::vector<CriterionResult> results;
  for (int id : ids) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      const auto dir = options.work_dir / ("criterion" + std::to_string(id));
      switch (id) {
        case 1: r = gradient_correctness(); break;
        case 2: r = expectile_limits(); break;
        case 3: r = iql_oracle(dir, options.corrupt_checkpoint); break;
        case 4: r = expressivity_gap(); break;
        case 5: r = recipe_improvement(shared_protocol()); break;
        case 6: r = extraction_ordering(shared_protocol()); break;
        case 7: r = diversity(shared_protocol()); break;
        case 8: r = ou_fidelity(); break;
        case 9: r = best_of_n(dir, options); break;
        case 10: fs::create_directories(dir); r = determinism(dir, options); break;
      }
    } catch (const std::exception& e) {
      r = make(id, "criterion-" + std::to_string(id));
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (observer) observer(r);
    results.push_back(std::move(r));
  }
  return results;
}

std::string render_acceptance_text(const std::vector<CriterionResult>& results) {
  std::string out;
  std::vector<int> failed;
  for (const auto& r : results) {
    char head[64];
    std::snprintf(head, sizeof head, "%s %2d %s: ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str());
    out += head + r.detail + "\n";
    if (!r.passed) failed.push_back(r.id);
  }
  out += std::to_string(results.size() - failed.size()) + "/" + std::to_string(results.size()) + " passed";
  if (!failed.empty()) {
    out += "; failed:";
    for (int id : failed) out += " " + std::to_string(id);
  }
  return out + "\n";
}

nlohmann::ordered_json acceptance_json(const std::vector<CriterionResult>& results) {
  ordered_json criteria = ordered_json::array();
  bool all = true;
  for (const auto& r : results) {
    criteria.push_back(
        {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"measured", r.measured}});
    all &= r.passed;
  }
  return {{"passed", all}, {"criteria", criteria}};
}

}  // namespace batchlab::lab
