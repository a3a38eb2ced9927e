#include "batchlab/lab/commands.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/common/parallel.hpp"
#include "batchlab/env/registry.hpp"
#include "batchlab/lab/artifacts.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace batchlab::lab {

namespace fs = std::filesystem;

std::vector<std::size_t> parse_axis(const std::string& text) {
  const auto bad = [&](const std::string& why) { return ConfigError("axis", "'" + text + "': " + why); };
  if (!text.starts_with("M=")) throw bad("expected M=<v1>,<v2>,...");
  std::vector<std::size_t> out;
  std::string_view rest(text);
  rest.remove_prefix(2);
  if (rest.empty()) throw bad("no values");
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) throw bad("'" + std::string(item) + "' is not a count");
    if (v == 0) throw bad("M must be >= 1");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

namespace {

std::string run_name(std::size_t m, std::uint64_t seed) { return "M" + std::to_string(m) + "_seed" + std::to_string(seed); }

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<SweepRow> run_sweep(const orchestrator::ExperimentConfig& config, const std::vector<std::size_t>& m_values,
                                const fs::path& out) {
  if (m_values.empty()) throw ConfigError("axis", "no values");
  config.validate();
  std::vector<SweepRow> rows;
  for (auto m : m_values)
    for (auto s : config.seeds) rows.push_back({m, s, std::nullopt, {}});
  const std::size_t outer = std::max<std::size_t>(1, config.jobs);
  parallel_for(rows.size(), outer, [&](std::size_t i) {
    SweepRow& row = rows[i];
    auto c = config;
    c.rollouts_per_iteration = row.m;
    if (outer > 1) c.jobs = 1;
    const fs::path dir = out / "runs" / run_name(row.m, row.seed);
    try {
      execute_run(c, row.seed, {.dir = dir, .run_id = run_name(row.m, row.seed)});
      std::istringstream metrics(read_file(dir / "metrics.jsonl"));
      std::string line, last;
      while (std::getline(metrics, line))
        if (!line.empty()) last = line;
      row.final_return = parse_metrics_row(last).return_mean;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  write_atomic(out / "sweep.csv", render_sweep_csv(m_values, config.seeds, rows));
  return rows;
}

std::string render_sweep_csv(const std::vector<std::size_t>& m_values, const std::vector<std::uint64_t>& seeds,
                             const std::vector<SweepRow>& rows) {
  const auto find = [&](std::size_t m, std::uint64_t s) -> const SweepRow* {
    for (const auto& r : rows)
      if (r.m == m && r.seed == s) return &r;
    return nullptr;
  };
  std::string csv = "seed";
  for (auto m : m_values) csv += ",M=" + std::to_string(m);
  csv += '\n';
  for (auto s : seeds) {
    csv += std::to_string(s);
    for (auto m : m_values) {
      const SweepRow* r = find(m, s);
      csv += ',' + (r && r->final_return ? format_number(*r->final_return) : std::string("null"));
    }
    csv += '\n';
  }
  csv += "mean";
  for (auto m : m_values) {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto s : seeds)
      if (const SweepRow* r = find(m, s); r && r->final_return) sum += *r->final_return, ++n;
    csv += ',' + (n ? format_number(sum / n) : std::string("null"));
  }
  csv += "\nerror";
  for (auto m : m_values) {
    std::string msg;
    for (auto s : seeds)
      if (const SweepRow* r = find(m, s); r && !r->error.empty())
        msg += (msg.empty() ? "" : "; ") + ("seed " + std::to_string(s) + ": " + r->error);
    csv += ',' + (msg.empty() ? std::string() : csv_quote(msg));
  }
  csv += '\n';
  return csv;
}

std::vector<HeatmapEntry> render_heatmaps(const std::vector<fs::path>& runs, std::size_t bins, bool success_only,
                                          const fs::path& out) {
  if (bins == 0) throw ConfigError("bins", "must be >= 1");
  std::vector<HeatmapEntry> entries;
  for (const auto& run : runs) {
    const auto trajectories = load_run_trajectories(run);
    nlohmann::json cfg;
    try {
      cfg = nlohmann::json::parse(read_file(run / "config.json"));
    } catch (const std::exception& e) {
      throw FormatError("run " + run.string() + ": unreadable config.json: " + e.what());
    }
    const auto env = env::make_environment(cfg.at("env").get<std::string>(), cfg.value("env_params", nlohmann::json::object()),
                                           cfg.at("value").at("gamma").get<double>());
    auto h = orchestrator::visitation_histogram(*env, trajectories, bins, success_only);
    entries.push_back({run, h, h.nonzero_cells()});
  }
  std::string summary = "index,run,total,nonzero_cells\n";
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto base = fs::absolute(entries[k].run).lexically_normal();
    const auto leaf = (base.has_filename() ? base.filename() : base.parent_path().filename()).string();
    write_atomic(out / (std::to_string(k) + "_" + leaf + ".csv"), histogram_csv(entries[k].histogram));
    summary += std::to_string(k) + "," + csv_quote(entries[k].run.string()) + "," + std::to_string(entries[k].histogram.total()) +
               "," + std::to_string(entries[k].nonzero_cells) + "\n";
  }
  write_atomic(out / "summary.csv", summary);
  return entries;
}

}  // namespace batchlab::lab
