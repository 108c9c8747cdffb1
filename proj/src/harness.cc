// Copyright 2026 The hitl-workbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hitl/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hitl/errors.h"
#include "hitl/rng.h"

namespace hitl {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kLayoutStream = 0x4c41594fULL;
constexpr uint64_t kRunStream = 0x52554e53ULL;

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFile(const fs::path& path, const std::string& contents,
               const std::string& context) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (out) out << contents;
  if (!out) {
    throw std::runtime_error(context + ": cannot write " + path.string());
  }
}

}  // namespace

void ExperimentConfig::Validate() const {
  observer.Validate();
  for (const auto& [kind, agent] : agents) agent.Validate();
  if (agents.empty()) throw ConfigError("at least one agent kind is required");
  if (n_layouts <= 0 || n_seeds_per_layout <= 0 || n_episodes <= 0) {
    throw ConfigError("n_layouts, n_seeds_per_layout and n_episodes must be positive");
  }
  if (!env.layout_seeds.empty() &&
      static_cast<int>(env.layout_seeds.size()) < n_layouts) {
    throw ConfigError("fewer layout_seeds than n_layouts");
  }
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw ConfigError("trim_fraction must lie in [0, 0.5)");
  }
  if (workers < 0) throw ConfigError("workers must be nonnegative");
}

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg) {
  nlohmann::json env{{"kind", EnvKindName(cfg.env.kind)}};
  env["observation"] = cfg.env.kind == EnvKind::kMaze
                           ? MazeObservationName(cfg.env.maze_observation)
                           : TaxiObservationName(cfg.env.taxi_observation);
  if (!cfg.env.layout_seeds.empty()) env["layout_seeds"] = cfg.env.layout_seeds;
  nlohmann::json agents = nlohmann::json::object();
  for (const auto& [kind, agent] : cfg.agents) {
    agents[AgentKindName(kind)] = AgentConfigToJson(agent);
  }
  return {{"env", env},
          {"observer", ObserverConfigToJson(cfg.observer)},
          {"agents", agents},
          {"n_layouts", cfg.n_layouts},
          {"n_seeds_per_layout", cfg.n_seeds_per_layout},
          {"n_episodes", cfg.n_episodes},
          {"master_seed", cfg.master_seed},
          {"trim_fraction", cfg.trim_fraction},
          {"output_dir", cfg.output_dir},
          {"workers", cfg.workers}};
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "env") {
        for (const auto& [ekey, ev] : v.items()) {
          if (ekey == "kind") {
            cfg.env.kind = ParseEnvKind(ev.get<std::string>());
          } else if (ekey == "observation" || ekey == "layout_seeds") {
            continue;  // resolved once the kind is known
          } else {
            throw ConfigError("unknown env key '" + ekey + "'");
          }
        }
        if (v.contains("observation")) {
          const auto mode = v["observation"].get<std::string>();
          if (cfg.env.kind == EnvKind::kMaze) {
            cfg.env.maze_observation = ParseMazeObservation(mode);
          } else {
            cfg.env.taxi_observation = ParseTaxiObservation(mode);
          }
        }
        if (v.contains("layout_seeds")) {
          cfg.env.layout_seeds = v["layout_seeds"].get<std::vector<uint64_t>>();
        }
      } else if (key == "observer") {
        cfg.observer = ObserverConfigFromJson(v);
      } else if (key == "agents") {
        cfg.agents.clear();
        if (v.is_array()) {
          for (const auto& name : v) cfg.agents[ParseAgentKind(name.get<std::string>())] = {};
        } else {
          for (const auto& [name, agent] : v.items()) {
            cfg.agents[ParseAgentKind(name)] = AgentConfigFromJson(agent);
          }
        }
      } else if (key == "n_layouts") {
        cfg.n_layouts = v.get<int>();
      } else if (key == "n_seeds_per_layout") {
        cfg.n_seeds_per_layout = v.get<int>();
      } else if (key == "n_episodes") {
        cfg.n_episodes = v.get<int>();
      } else if (key == "master_seed") {
        cfg.master_seed = v.get<uint64_t>();
      } else if (key == "trim_fraction") {
        cfg.trim_fraction = v.get<double>();
      } else if (key == "output_dir") {
        cfg.output_dir = v.get<std::string>();
      } else if (key == "workers") {
        cfg.workers = v.get<int>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  const std::string text = ReadFile(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return ExperimentConfigFromJson(j);
}

std::string RunSpec::id() const {
  return AgentKindName(agent) + "-L" + std::to_string(layout_index) + "-S" +
         std::to_string(seed_index);
}

RunSpec RunSpec::FromId(const std::string& id) {
  const auto l = id.rfind("-L");
  const auto s = id.rfind("-S");
  if (l == std::string::npos || s == std::string::npos || s < l) {
    throw ConfigError("malformed run id '" + id + "'");
  }
  RunSpec spec;
  spec.agent = ParseAgentKind(id.substr(0, l));
  try {
    spec.layout_index = std::stoi(id.substr(l + 2, s - l - 2));
    spec.seed_index = std::stoi(id.substr(s + 2));
  } catch (const std::exception&) {
    throw ConfigError("malformed run id '" + id + "'");
  }
  return spec;
}

uint64_t LayoutSeed(const ExperimentConfig& cfg, int layout_index) {
  if (!cfg.env.layout_seeds.empty()) return cfg.env.layout_seeds.at(layout_index);
  return DeriveSeed(cfg.master_seed, {kLayoutStream, static_cast<uint64_t>(layout_index)});
}

uint64_t RunSeed(const ExperimentConfig& cfg, int layout_index, int seed_index) {
  return DeriveSeed(cfg.master_seed, {kRunStream, static_cast<uint64_t>(layout_index),
                                      static_cast<uint64_t>(seed_index)});
}

std::vector<RunSpec> EnumerateRuns(const ExperimentConfig& cfg) {
  std::vector<RunSpec> runs;
  for (const auto& [kind, agent] : cfg.agents) {
    for (int l = 0; l < cfg.n_layouts; ++l) {
      for (int s = 0; s < cfg.n_seeds_per_layout; ++s) runs.push_back({kind, l, s});
    }
  }
  return runs;
}

std::unique_ptr<Environment> MakeEnvironment(const ExperimentConfig& cfg,
                                             const RunSpec& spec) {
  if (cfg.env.kind == EnvKind::kMaze) {
    return std::make_unique<MazeEnv>(GenerateMaze(LayoutSeed(cfg, spec.layout_index)),
                                     cfg.env.maze_observation);
  }
  const uint64_t seed =
      DeriveSeed(RunSeed(cfg, spec.layout_index, spec.seed_index), {10});
  return std::make_unique<TaxiEnv>(seed, cfg.env.taxi_observation);
}

EpisodeResult RunEpisode(Agent& agent, Environment& env, FeedbackSource& feedback,
                         int episode) {
  EpisodeResult result;
  result.episode = episode;
  const FeedbackCounts before = feedback.counts();
  env.Reset();
  agent.BeginEpisode();
  while (!env.done()) {
    const StepReport report = RunAgentStep(agent, env, feedback, episode);
    result.total_return += report.transition.reward;
  }
  feedback.EndEpisode();
  result.steps = env.steps();
  result.feedback = feedback.counts() - before;
  return result;
}

RunResult RunSingle(const ExperimentConfig& cfg, const RunSpec& spec) {
  const uint64_t run_seed = RunSeed(cfg, spec.layout_index, spec.seed_index);
  auto env = MakeEnvironment(cfg, spec);
  SimulatedObserver observer(cfg.observer, cfg.env.kind, DeriveSeed(run_seed, {11}));
  Agent agent(spec.agent, cfg.agents.at(spec.agent), env->observation_size(),
              env->num_actions(), cfg.observer.p_delay_assumed,
              DeriveSeed(run_seed, {12}));
  RunResult result{spec, {}};
  result.episodes.reserve(cfg.n_episodes);
  for (int e = 0; e < cfg.n_episodes; ++e) {
    result.episodes.push_back(RunEpisode(agent, *env, observer, e));
  }
  return result;
}

std::vector<RunResult> RunExperiment(const ExperimentConfig& cfg,
                                     const RunOptions& options) {
  cfg.Validate();
  const std::vector<RunSpec> specs = EnumerateRuns(cfg);
  std::vector<RunResult> results(specs.size());
  int workers = cfg.workers > 0 ? cfg.workers
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(specs.size()));

  std::atomic<size_t> next{0};
  std::mutex mu;  // guards first_error and the completion callback
  std::exception_ptr first_error;
  auto worker = [&] {
    for (size_t i = next++; i < specs.size(); i = next++) {
      try {
        results[i] = RunSingle(cfg, specs[i]);
        if (options.write_files) {
          WriteFile(RunFilePath(cfg.output_dir, specs[i]), FormatRunCsv(results[i]),
                    "run " + specs[i].id());
        }
        if (options.on_run_complete) {
          std::lock_guard<std::mutex> lock(mu);
          options.on_run_complete(results[i]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        next = specs.size();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  if (options.write_files) EmitCurves(results, cfg, cfg.output_dir);
  return results;
}

double TrimmedMean(std::span<const double> values, double trim_fraction) {
  if (values.empty()) throw ContractViolation("trimmed mean of empty input");
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw ContractViolation("trim fraction must lie in [0, 0.5)");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  const auto k = static_cast<size_t>(std::floor(static_cast<double>(n) * trim_fraction));
  double sum = 0.0;
  for (size_t i = k; i < n - k; ++i) sum += sorted[i];
  return sum / static_cast<double>(n - 2 * k);
}

double Percentile(std::span<const double> values, double q) {
  if (values.empty()) throw ContractViolation("percentile of empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

LearningCurve ComputeCurve(const std::vector<const RunResult*>& runs, int n_episodes,
                           double trim_fraction) {
  LearningCurve curve;
  std::vector<double> column;
  for (int e = 0; e < n_episodes; ++e) {
    column.clear();
    for (const RunResult* run : runs) {
      if (e < static_cast<int>(run->episodes.size())) {
        column.push_back(run->episodes[e].total_return);
      }
    }
    if (column.empty()) {
      curve.mean_return.push_back(std::nan(""));
      curve.p25.push_back(std::nan(""));
      curve.p75.push_back(std::nan(""));
      continue;
    }
    curve.mean_return.push_back(TrimmedMean(column, trim_fraction));
    curve.p25.push_back(Percentile(column, 0.25));
    curve.p75.push_back(Percentile(column, 0.75));
  }
  return curve;
}

std::map<AgentKind, LearningCurve> ComputeCurves(const std::vector<RunResult>& results,
                                                 const ExperimentConfig& cfg) {
  std::map<AgentKind, LearningCurve> curves;
  for (const auto& [kind, agent] : cfg.agents) {
    std::vector<const RunResult*> runs;
    for (const RunResult& r : results) {
      if (r.spec.agent == kind && !r.episodes.empty()) runs.push_back(&r);
    }
    curves[kind] = ComputeCurve(runs, cfg.n_episodes, cfg.trim_fraction);
  }
  return curves;
}

std::optional<int> EpisodesToThreshold(const std::vector<double>& curve,
                                       double threshold) {
  for (int e = 0; e < static_cast<int>(curve.size()); ++e) {
    if (curve[e] >= threshold) return e;
  }
  return std::nullopt;
}

double WindowMean(const std::vector<double>& curve, int first, int last) {
  if (first < 0 || last > static_cast<int>(curve.size()) || first >= last) {
    throw ContractViolation("window outside curve");
  }
  double sum = 0.0;
  for (int e = first; e < last; ++e) sum += curve[e];
  return sum / (last - first);
}

std::string FormatRunCsv(const RunResult& run) {
  std::string out = "episode,return,steps,emitted,delivered,dropped,discarded\n";
  for (const EpisodeResult& e : run.episodes) {
    out += std::to_string(e.episode) + ',' + FormatDouble(e.total_return) + ',' +
           std::to_string(e.steps) + ',' + std::to_string(e.feedback.emitted) + ',' +
           std::to_string(e.feedback.delivered) + ',' +
           std::to_string(e.feedback.dropped) + ',' +
           std::to_string(e.feedback.discarded) + '\n';
  }
  return out;
}

RunResult ParseRunCsv(const RunSpec& spec, const std::string& text) {
  RunResult run{spec, {}};
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "episode,return,steps,emitted,delivered,dropped,discarded") {
    throw ConfigError("run " + spec.id() + ": unexpected CSV header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpisodeResult e;
    long long emitted, delivered, dropped, discarded;
    if (std::sscanf(line.c_str(), "%d,%lf,%d,%lld,%lld,%lld,%lld", &e.episode,
                    &e.total_return, &e.steps, &emitted, &delivered, &dropped,
                    &discarded) != 7) {
      throw ConfigError("run " + spec.id() + ": malformed CSV row '" + line + "'");
    }
    e.feedback = {emitted, delivered, dropped, discarded};
    run.episodes.push_back(e);
  }
  return run;
}

std::string FormatCurveCsv(const LearningCurve& curve) {
  std::string out = "episode,mean_return,p25,p75\n";
  for (size_t e = 0; e < curve.mean_return.size(); ++e) {
    out += std::to_string(e) + ',' + FormatDouble(curve.mean_return[e]) + ',' +
           FormatDouble(curve.p25[e]) + ',' + FormatDouble(curve.p75[e]) + '\n';
  }
  return out;
}

std::string RunFilePath(const std::string& out_dir, const RunSpec& spec) {
  return (fs::path(out_dir) / "runs" / (spec.id() + ".csv")).string();
}

std::string CurveFilePath(const std::string& out_dir, AgentKind kind) {
  return (fs::path(out_dir) / ("curve_" + AgentKindName(kind) + ".csv")).string();
}

std::string ManifestPath(const std::string& out_dir) {
  return (fs::path(out_dir) / "manifest.json").string();
}

nlohmann::json BuildManifest(const ExperimentConfig& cfg,
                             const std::vector<RunResult>& results) {
  nlohmann::json runs = nlohmann::json::array();
  std::vector<std::string> missing;
  for (const RunSpec& spec : EnumerateRuns(cfg)) {
    const bool complete = std::any_of(results.begin(), results.end(), [&](const RunResult& r) {
      return r.spec == spec &&
             static_cast<int>(r.episodes.size()) == cfg.n_episodes;
    });
    if (!complete) missing.push_back(spec.id());
    nlohmann::json run{{"id", spec.id()},
                       {"agent", AgentKindName(spec.agent)},
                       {"layout_index", spec.layout_index},
                       {"seed_index", spec.seed_index},
                       {"run_seed", RunSeed(cfg, spec.layout_index, spec.seed_index)},
                       {"file", "runs/" + spec.id() + ".csv"},
                       {"status", complete ? "complete" : "missing"}};
    if (cfg.env.kind == EnvKind::kMaze) {
      run["layout_seed"] = LayoutSeed(cfg, spec.layout_index);
    }
    runs.push_back(std::move(run));
  }
  nlohmann::json layouts = nlohmann::json::array();
  if (cfg.env.kind == EnvKind::kMaze) {
    for (int l = 0; l < cfg.n_layouts; ++l) {
      layouts.push_back(MazeLayoutToJson(GenerateMaze(LayoutSeed(cfg, l))));
    }
  }
  return {{"software_version", kSoftwareVersion},
          {"config", ExperimentConfigToJson(cfg)},
          {"layouts", layouts},
          {"runs", runs},
          {"missing_runs", missing}};
}

void EmitCurves(const std::vector<RunResult>& results, const ExperimentConfig& cfg,
                const std::string& out_dir) {
  for (const auto& [kind, curve] : ComputeCurves(results, cfg)) {
    WriteFile(CurveFilePath(out_dir, kind), FormatCurveCsv(curve),
              "curves for " + AgentKindName(kind));
  }
  WriteFile(ManifestPath(out_dir), BuildManifest(cfg, results).dump(2) + "\n",
            "manifest");
}

namespace {

ExperimentConfig ReadManifestConfig(const std::string& in_dir) {
  const std::string text = ReadFile(ManifestPath(in_dir));
  try {
    return ExperimentConfigFromJson(nlohmann::json::parse(text).at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(ManifestPath(in_dir) + ": " + e.what());
  }
}

}  // namespace

std::vector<RunResult> Aggregate(const std::string& in_dir) {
  const ExperimentConfig cfg = ReadManifestConfig(in_dir);
  std::vector<RunResult> results;
  for (const RunSpec& spec : EnumerateRuns(cfg)) {
    const fs::path path = RunFilePath(in_dir, spec);
    if (!fs::exists(path)) continue;
    results.push_back(ParseRunCsv(spec, ReadFile(path)));
  }
  EmitCurves(results, cfg, in_dir);
  return results;
}

ReplayReport ReplayRun(const std::string& in_dir, const std::string& run_id) {
  const ExperimentConfig cfg = ReadManifestConfig(in_dir);
  const RunSpec spec = RunSpec::FromId(run_id);
  const auto specs = EnumerateRuns(cfg);
  if (std::find(specs.begin(), specs.end(), spec) == specs.end()) {
    throw ConfigError("run " + run_id + " is not part of this experiment");
  }
  const std::string fresh = FormatRunCsv(RunSingle(cfg, spec));
  const fs::path path = RunFilePath(in_dir, spec);
  ReplayReport report;
  if (!fs::exists(path)) {
    WriteFile(path, fresh, "run " + run_id);
    report.identical = true;
    report.restored = true;
    report.detail = "run file was missing; rewritten";
    return report;
  }
  const std::string stored = ReadFile(path);
  report.identical = stored == fresh;
  if (report.identical) {
    report.detail = "identical";
    return report;
  }
  std::istringstream a(stored), b(fresh);
  std::string la, lb;
  for (int line = 1;; ++line) {
    const bool ga = static_cast<bool>(std::getline(a, la));
    const bool gb = static_cast<bool>(std::getline(b, lb));
    if (!ga && !gb) break;
    if (!ga || !gb || la != lb) {
      report.detail = "first difference at line " + std::to_string(line) +
                      ":\n  stored: " + (ga ? la : "<eof>") +
                      "\n  replay: " + (gb ? lb : "<eof>");
      break;
    }
  }
  return report;
}

}  // namespace hitl
