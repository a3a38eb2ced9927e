#include "batchlab/lab/artifacts.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/env/registry.hpp"
#include "batchlab/lab/config_io.hpp"
#include "batchlab/policy/serialization.hpp"
#include "batchlab/rollout/io.hpp"
#include "batchlab/value/serialization.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace batchlab::lab {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

void write_manifest(const fs::path& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel == "MANIFEST" || rel.ends_with(".tmp")) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) out += sha256_hex(read_file(dir / f)) + "  " + f + "\n";
  write_atomic(dir / "MANIFEST", out);
}

std::vector<std::string> verify_manifest(const fs::path& dir) {
  std::istringstream in(read_file(dir / "MANIFEST"));
  std::vector<std::string> bad;
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() < 67) throw FormatError("malformed MANIFEST line: " + line);
    const std::string hash = line.substr(0, 64);
    const std::string rel = line.substr(66);
    if (!fs::exists(dir / rel) || sha256_hex(read_file(dir / rel)) != hash) bad.push_back(rel);
  }
  return bad;
}

std::string default_run_id(const orchestrator::ExperimentConfig& config, std::uint64_t seed) {
  auto doc = config_to_json(config);
  doc.erase("jobs");
  doc.erase("seeds");
  return config.env + "_" + orchestrator::to_string(config.algorithm) + "_seed" + std::to_string(seed) + "_" +
         sha256_hex(doc.dump()).substr(0, 8);
}

std::string metrics_row(const std::string& run_id, std::uint64_t seed, const orchestrator::IterationMetrics& m) {
  ordered_json j;
  j["run_id"] = run_id;
  j["seed"] = seed;
  j["iteration"] = m.iteration;
  j["return_mean"] = m.return_mean;
  j["return_stderr"] = m.return_stderr;
  j["dataset_trajectories"] = m.dataset_trajectories;
  j["dataset_transitions"] = m.dataset_transitions;
  j["new_success_fraction"] = m.new_success_fraction;
  return j.dump();
}

orchestrator::IterationMetrics parse_metrics_row(const std::string& line) {
  try {
    const auto j = json::parse(line);
    return {j.at("iteration").get<int>(), j.at("return_mean").get<double>(), j.at("return_stderr").get<double>(),
            j.at("dataset_trajectories").get<std::size_t>(), j.at("dataset_transitions").get<std::size_t>(),
            j.at("new_success_fraction").get<double>()};
  } catch (const json::exception& e) {
    throw FormatError(std::string("metrics row: ") + e.what());
  }
}

std::string histogram_csv(const orchestrator::Histogram& h) {
  std::string out;
  for (std::size_t iy = 0; iy < h.bins; ++iy) {
    for (std::size_t ix = 0; ix < h.bins; ++ix) {
      if (ix) out += ',';
      out += std::to_string(h.at(ix, iy));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string iter_tag(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "iter_%03d", i);
  return buf;
}

template <typename Writer>
std::string to_bytes(Writer&& w) {
  std::ostringstream out(std::ios::binary);
  w(out);
  return out.str();
}

}  // namespace

orchestrator::RunReport execute_run(const orchestrator::ExperimentConfig& config, std::uint64_t seed,
                                    const RunOptions& options) {
  const fs::path& dir = options.dir;
  const std::string run_id = options.run_id.empty() ? default_run_id(config, seed) : options.run_id;
  fs::create_directories(dir);
  auto doc = config_to_json(config);
  doc["seeds"] = json::array({seed});
  write_atomic(dir / "config.json", doc.dump(2) + "\n");
  write_atomic(dir / "trajectory.schema.json", rollout::trajectory_schema());

  const auto env = env::make_environment(config.env, config.env_params, config.value.gamma);
  std::string metrics;
  const auto observer = [&](const orchestrator::IterationArtifacts& a) {
    const std::string tag = iter_tag(a.metrics.iteration);
    write_atomic(dir / "trajectories" / (tag + ".jsonl"),
                 to_bytes([&](std::ostream& o) { rollout::write_trajectories(o, a.new_trajectories); }));
    if (options.checkpoints) {
      write_atomic(dir / "checkpoints" / tag / "policy.ckpt",
                   to_bytes([&](std::ostream& o) { policy::write_policy(o, a.policy); }));
      if (a.heads)
        write_atomic(dir / "checkpoints" / tag / "value.ckpt",
                     to_bytes([&](std::ostream& o) { value::write_value_heads(o, *a.heads); }));
    }
    for (bool success_only : {false, true})
      write_atomic(dir / "histograms" / (tag + (success_only ? "_success.csv" : "_all.csv")),
                   histogram_csv(orchestrator::visitation_histogram(*env, a.new_trajectories, options.histogram_bins,
                                                                    success_only)));
    metrics += metrics_row(run_id, seed, a.metrics) + "\n";
    write_atomic(dir / "metrics.jsonl", metrics);
  };

  try {
    auto report = orchestrator::run_experiment(config, seed, observer);
    for (bool success_only : {false, true})
      write_atomic(dir / "histograms" / (success_only ? "cumulative_success.csv" : "cumulative_all.csv"),
                   histogram_csv(orchestrator::visitation_histogram(*env, report.dataset.all(), options.histogram_bins,
                                                                    success_only)));
    write_manifest(dir);
    return report;
  } catch (...) {
    write_manifest(dir);
    throw;
  }
}

Checkpoint load_checkpoint(const fs::path& dir, int iteration) {
  const fs::path root = dir / "checkpoints";
  if (!fs::is_directory(root)) throw FormatError("no checkpoints directory in " + dir.string());
  fs::path chosen;
  if (iteration >= 0) {
    chosen = root / iter_tag(iteration);
  } else {
    for (const auto& e : fs::directory_iterator(root))
      if (e.is_directory() && (chosen.empty() || e.path().filename() > chosen.filename())) chosen = e.path();
  }
  if (chosen.empty() || !fs::exists(chosen / "policy.ckpt")) throw FormatError("no policy checkpoint under " + root.string());
  Checkpoint c;
  try {
    std::istringstream p(read_file(chosen / "policy.ckpt"));
    c.policy = policy::read_policy(p);
    if (fs::exists(chosen / "value.ckpt")) {
      std::istringstream v(read_file(chosen / "value.ckpt"));
      c.heads = value::read_value_heads(v);
    }
  } catch (const FormatError& e) {
    throw FormatError(chosen.string() + ": " + e.what());
  }
  return c;
}

orchestrator::ExperimentConfig load_run_config(const fs::path& dir) { return load_config(dir / "config.json"); }

std::vector<rollout::Trajectory> load_run_trajectories(const fs::path& dir) {
  const fs::path tdir = dir / "trajectories";
  if (!fs::is_directory(tdir)) throw FormatError("no trajectories directory in " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(tdir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  if (files.empty()) throw FormatError("no trajectory files in " + tdir.string());
  std::sort(files.begin(), files.end());
  std::vector<rollout::Trajectory> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    auto part = rollout::read_trajectories(in);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

}  // namespace batchlab::lab
