#include "batchlab/lab/config_io.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/env/registry.hpp"

#include <fstream>
#include <sstream>

namespace batchlab::lab {

using nlohmann::json;
using orchestrator::ExperimentConfig;

const json& default_blocks() {
  static const json blocks = json::parse(R"({
    "global": {"batch_size": 256, "lr": 3e-4, "expectile": 0.8, "discount": 0.99, "n_samples": 64, "diffusion_steps": 100},
    "envs": {
      "PointReach":    {"demos": 3,  "demo_noise": 0.3, "ou_theta": 5.0, "ou_sigma": 0.05},
      "TwoCorridors":  {"demos": 4,  "demo_noise": 0.3, "ou_theta": 5.0, "ou_sigma": 0.05},
      "PrecisionDock": {"demos": 3,  "demo_noise": 0.1, "ou_theta": 5.0, "ou_sigma": 0.03},
      "Chain5":        {"demos": 4,  "demo_noise": 0.0, "ou_theta": 0.1, "ou_sigma": 0.03}
    }
  })");
  return blocks;
}

namespace {

json to_json(const policy::PolicyConfig& p) {
  return {{"class", policy::to_string(p.policy_class)},
          {"hidden", p.hidden},
          {"activation", nn::to_string(p.activation)},
          {"diffusion_steps", p.diffusion_steps},
          {"beta_start", p.beta_start},
          {"beta_end", p.beta_end},
          {"clip_x0", p.clip_x0},
          {"gaussian_mode", policy::to_string(p.gaussian_mode)},
          {"init_log_std", p.init_log_std},
          {"lr", p.lr},
          {"batch_size", p.batch_size},
          {"steps_per_trajectory", p.steps_per_trajectory},
          {"max_steps", p.max_steps},
          {"warm_start", p.warm_start}};
}

json to_json(const value::IqlConfig& v) {
  return {{"tau", v.tau},
          {"gamma", v.gamma},
          {"lr", v.lr},
          {"batch_size", v.batch_size},
          {"polyak", v.polyak},
          {"steps_per_trajectory", v.steps_per_trajectory},
          {"max_steps", v.max_steps},
          {"hidden", v.hidden},
          {"activation", nn::to_string(v.activation)},
          {"twin_q", v.twin_q},
          {"warm_start", v.warm_start}};
}

json to_json(const extraction::ExtractionSpec& e) {
  return {{"kind", extraction::to_string(e.kind)},
          {"beta", e.beta},
          {"n_samples", e.n_samples},
          {"weight_clip", e.weight_clip},
          {"explicit_best_of_n", e.explicit_best_of_n}};
}

json to_json(const std::optional<rollout::OuConfig>& n) {
  if (!n) return nullptr;
  return {{"theta", n->theta}, {"sigma", n->sigma}, {"dt", n->dt}, {"episode_fraction", n->episode_fraction}};
}

// Typed access to a key of a fully merged document, reporting the key path on failure.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {}

  template <typename T>
  T get(const char* key) const {
    const std::string field = path_ + key;
    if (!obj_.contains(key)) throw ConfigError(field, "is required");
    try {
      return obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field, "has the wrong type (" + std::string(obj_.at(key).type_name()) + ")");
    }
  }

  std::size_t count(const char* key) const {
    const auto v = get<double>(key);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw ConfigError(path_ + key, "must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  const std::string& path() const { return path_; }

  Reader child(const char* key) const {
    const std::string field = path_ + key;
    if (!obj_.contains(key) || !obj_.at(key).is_object()) throw ConfigError(field, "must be an object");
    return Reader(obj_.at(key), field + ".");
  }

  template <typename F>
  auto parse(const char* key, F&& f) const {
    try {
      return f(get<std::string>(key));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(path_ + key, e.what());
    }
  }

  const json& raw() const { return obj_; }

 private:
  const json& obj_;
  std::string path_;
};

std::vector<std::size_t> sizes(const Reader& r, const char* key) {
  const auto v = r.get<std::vector<double>>(key);
  std::vector<std::size_t> out;
  for (double d : v) {
    if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d)))
      throw ConfigError(r.path() + key, "layer widths must be positive integers");
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

// Every key of `doc` must exist in `base`; nested objects are checked recursively.
void reject_unknown(const json& doc, const json& base, const std::string& path) {
  for (const auto& [key, value] : doc.items()) {
    const std::string field = path + key;
    if (!base.contains(key)) throw ConfigError(field, "unknown key");
    if (key == "env_params") continue;  // checked against the environment's own key set
    if (value.is_object() && base.at(key).is_object()) reject_unknown(value, base.at(key), field + ".");
    if (value.is_object() && base.at(key).is_null() && key == "noise")
      reject_unknown(value, to_json(std::optional<rollout::OuConfig>(rollout::OuConfig{})), field + ".");
  }
}

json merge(json base, const json& doc) {
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object() && key != "env_params")
      base[key] = merge(base[key], value);
    else
      base[key] = value;
  }
  return base;
}

extraction::ExtractionKind default_kind(orchestrator::AlgorithmClass a) {
  switch (a) {
    case orchestrator::AlgorithmClass::il: return extraction::ExtractionKind::none_il;
    case orchestrator::AlgorithmClass::filtered_il: return extraction::ExtractionKind::filtered_il;
    case orchestrator::AlgorithmClass::value_rl: break;
  }
  return extraction::ExtractionKind::best_of_n_implicit;
}

ExperimentConfig parse_full(const json& doc) {
  const Reader r(doc, "");
  ExperimentConfig c;
  c.env = r.get<std::string>("env");
  c.env_params = doc.at("env_params");
  env::make_environment(c.env, c.env_params, 0.99);  // validates names and values of env_params
  c.algorithm = r.parse("algorithm", orchestrator::algorithm_class_from_string);

  const Reader e = r.child("extraction");
  c.extraction.kind = e.parse("kind", extraction::extraction_kind_from_string);
  c.extraction.beta = e.get<double>("beta");
  c.extraction.n_samples = e.count("n_samples");
  c.extraction.weight_clip = e.get<double>("weight_clip");
  c.extraction.explicit_best_of_n = e.get<bool>("explicit_best_of_n");

  const Reader p = r.child("policy");
  c.policy.policy_class = p.parse("class", policy::policy_class_from_string);
  c.policy.hidden = sizes(p, "hidden");
  c.policy.activation = p.parse("activation", nn::activation_from_string);
  c.policy.diffusion_steps = p.get<int>("diffusion_steps");
  c.policy.beta_start = p.get<double>("beta_start");
  c.policy.beta_end = p.get<double>("beta_end");
  c.policy.clip_x0 = p.get<bool>("clip_x0");
  c.policy.gaussian_mode = p.parse("gaussian_mode", policy::sample_mode_from_string);
  c.policy.init_log_std = p.get<double>("init_log_std");
  c.policy.lr = p.get<double>("lr");
  c.policy.batch_size = p.count("batch_size");
  c.policy.steps_per_trajectory = p.count("steps_per_trajectory");
  c.policy.max_steps = p.count("max_steps");
  c.policy.warm_start = p.get<bool>("warm_start");

  const Reader v = r.child("value");
  c.value.tau = v.get<double>("tau");
  c.value.gamma = v.get<double>("gamma");
  c.value.lr = v.get<double>("lr");
  c.value.batch_size = v.count("batch_size");
  c.value.polyak = v.get<double>("polyak");
  c.value.steps_per_trajectory = v.count("steps_per_trajectory");
  c.value.max_steps = v.count("max_steps");
  c.value.hidden = sizes(v, "hidden");
  c.value.activation = v.parse("activation", nn::activation_from_string);
  c.value.twin_q = v.get<bool>("twin_q");
  c.value.warm_start = v.get<bool>("warm_start");

  c.iterations = r.get<int>("iterations");
  c.rollouts_per_iteration = r.count("rollouts_per_iteration");
  c.demos = r.count("demos");
  c.demo_noise = r.get<double>("demo_noise");
  if (doc.at("noise").is_null()) {
    c.noise.reset();
  } else {
    const Reader n = r.child("noise");
    c.noise = rollout::OuConfig{n.get<double>("theta"), n.get<double>("sigma"), n.get<double>("dt"),
                                n.get<double>("episode_fraction")};
  }
  c.eval_episodes = r.count("eval_episodes");
  c.seeds.clear();
  if (!doc.at("seeds").is_array()) throw ConfigError("seeds", "must be an array of non-negative integers");
  for (const auto& s : doc.at("seeds")) {
    if (!s.is_number_unsigned()) throw ConfigError("seeds", "must be an array of non-negative integers");
    c.seeds.push_back(s.get<std::uint64_t>());
  }
  c.jobs = r.count("jobs");
  c.validate();
  return c;
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
  return {{"env", c.env},
          {"env_params", c.env_params},
          {"algorithm", orchestrator::to_string(c.algorithm)},
          {"extraction", to_json(c.extraction)},
          {"policy", to_json(c.policy)},
          {"value", to_json(c.value)},
          {"iterations", c.iterations},
          {"rollouts_per_iteration", c.rollouts_per_iteration},
          {"demos", c.demos},
          {"demo_noise", c.demo_noise},
          {"noise", to_json(c.noise)},
          {"eval_episodes", c.eval_episodes},
          {"seeds", c.seeds},
          {"jobs", c.jobs}};
}

json default_document(const std::string& env) {
  const auto& blocks = default_blocks();
  if (!blocks.at("envs").contains(env)) throw ConfigError("env", "unknown environment '" + env + "'");
  const auto& g = blocks.at("global");
  const auto& b = blocks.at("envs").at(env);
  ExperimentConfig c;
  c.env = env;
  c.policy.batch_size = c.value.batch_size = g.at("batch_size").get<std::size_t>();
  c.policy.lr = c.value.lr = g.at("lr").get<double>();
  c.value.tau = g.at("expectile").get<double>();
  c.value.gamma = g.at("discount").get<double>();
  c.extraction.n_samples = g.at("n_samples").get<std::size_t>();
  c.policy.diffusion_steps = g.at("diffusion_steps").get<int>();
  c.demos = b.at("demos").get<std::size_t>();
  c.demo_noise = b.at("demo_noise").get<double>();
  c.noise = rollout::OuConfig{};
  c.noise->theta = b.at("ou_theta").get<double>();
  c.noise->sigma = b.at("ou_sigma").get<double>();
  return config_to_json(c);
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  if (!doc.contains("env")) throw ConfigError("env", "environment name is required");
  if (!doc.at("env").is_string()) throw ConfigError("env", "must be a string");
  json base = default_document(doc.at("env").get<std::string>());
  reject_unknown(doc, base, "");
  // The extraction kind follows the algorithm class unless given explicitly.
  if (doc.contains("algorithm") && doc.at("algorithm").is_string()) {
    const auto a = orchestrator::algorithm_class_from_string(doc.at("algorithm").get<std::string>());
    base["algorithm"] = doc.at("algorithm");
    base["extraction"]["kind"] = extraction::to_string(default_kind(a));
  }
  if (doc.contains("noise") && doc.at("noise").is_object() && base.at("noise").is_null())
    base["noise"] = to_json(std::optional<rollout::OuConfig>(rollout::OuConfig{}));
  return parse_full(merge(base, doc));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config", path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

void apply_fast_profile(ExperimentConfig& c) {
  c.policy.diffusion_steps = std::min(c.policy.diffusion_steps, 25);
  c.policy.max_steps = std::min<std::size_t>(c.policy.max_steps, 8000);
  c.value.max_steps = std::min<std::size_t>(c.value.max_steps, 8000);
  c.eval_episodes = std::min<std::size_t>(c.eval_episodes, 50);
}

}  // namespace batchlab::lab
