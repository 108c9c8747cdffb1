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

#ifndef HITL_HARNESS_H_
#define HITL_HARNESS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hitl/agents.h"
#include "hitl/maze.h"
#include "hitl/observer.h"
#include "hitl/taxi.h"

namespace hitl {

inline constexpr const char* kSoftwareVersion = "0.1.0";

struct EnvSpec {
  EnvKind kind = EnvKind::kMaze;
  MazeObservation maze_observation = MazeObservation::kMdp;
  TaxiObservation taxi_observation = TaxiObservation::kExtended;
  // Explicit maze layout seeds; derived from the master seed when empty.
  std::vector<uint64_t> layout_seeds;

  bool operator==(const EnvSpec&) const = default;
};

struct ExperimentConfig {
  EnvSpec env;
  ObserverConfig observer;
  std::map<AgentKind, AgentConfig> agents{{AgentKind::kDqnTamer, AgentConfig{}}};
  int n_layouts = 10;
  int n_seeds_per_layout = 3;
  int n_episodes = 150;
  uint64_t master_seed = 0;
  double trim_fraction = 0.1;
  std::string output_dir = "out";
  int workers = 0;  // 0: one per hardware thread

  int runs_per_agent() const { return n_layouts * n_seeds_per_layout; }
  void Validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg);
// Missing keys take defaults; unknown keys are a ConfigError.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);
ExperimentConfig LoadExperimentConfig(const std::string& path);

struct EpisodeResult {
  int episode = 0;
  double total_return = 0.0;  // undiscounted sum of environment rewards
  int steps = 0;
  FeedbackCounts feedback;

  bool operator==(const EpisodeResult&) const = default;
};

struct RunSpec {
  AgentKind agent = AgentKind::kDqnTamer;
  int layout_index = 0;
  int seed_index = 0;

  std::string id() const;
  static RunSpec FromId(const std::string& id);
  bool operator==(const RunSpec&) const = default;
};

struct RunResult {
  RunSpec spec;
  std::vector<EpisodeResult> episodes;
};

// Seeds shared by every agent kind for the same (layout, seed) pair.
uint64_t LayoutSeed(const ExperimentConfig& cfg, int layout_index);
uint64_t RunSeed(const ExperimentConfig& cfg, int layout_index, int seed_index);

std::vector<RunSpec> EnumerateRuns(const ExperimentConfig& cfg);
std::unique_ptr<Environment> MakeEnvironment(const ExperimentConfig& cfg,
                                             const RunSpec& spec);

// Plays one episode to completion and reports it.
EpisodeResult RunEpisode(Agent& agent, Environment& env, FeedbackSource& feedback,
                         int episode);
// Executes one run from scratch. Depends only on (cfg, spec).
RunResult RunSingle(const ExperimentConfig& cfg, const RunSpec& spec);

struct RunOptions {
  bool write_files = true;
  std::function<void(const RunResult&)> on_run_complete;
};

// Runs every (agent, layout, seed) combination on a worker pool. With
// write_files, per-run CSVs land in <output_dir>/runs/ as they finish and
// the manifest and curves are written at the end.
std::vector<RunResult> RunExperiment(const ExperimentConfig& cfg,
                                     const RunOptions& options = {});

// Sorts, drops floor(n * trim_fraction) values from each tail, averages the
// rest. Throws ContractViolation on empty input or trim outside [0, 0.5).
double TrimmedMean(std::span<const double> values, double trim_fraction = 0.1);
// Linear-interpolation percentile, q in [0, 1].
double Percentile(std::span<const double> values, double q);

struct LearningCurve {
  std::vector<double> mean_return;  // trimmed mean across runs
  std::vector<double> p25;
  std::vector<double> p75;
};

LearningCurve ComputeCurve(const std::vector<const RunResult*>& runs, int n_episodes,
                           double trim_fraction);
std::map<AgentKind, LearningCurve> ComputeCurves(const std::vector<RunResult>& results,
                                                 const ExperimentConfig& cfg);

// First episode whose curve value reaches `threshold`.
std::optional<int> EpisodesToThreshold(const std::vector<double>& curve,
                                       double threshold);
// Mean of curve[first, last).
double WindowMean(const std::vector<double>& curve, int first, int last);

// Per-run CSV: episode,return,steps,emitted,delivered,dropped,discarded
std::string FormatRunCsv(const RunResult& run);
RunResult ParseRunCsv(const RunSpec& spec, const std::string& text);
// Curve CSV: episode,mean_return,p25,p75
std::string FormatCurveCsv(const LearningCurve& curve);

std::string RunFilePath(const std::string& out_dir, const RunSpec& spec);
std::string CurveFilePath(const std::string& out_dir, AgentKind kind);
std::string ManifestPath(const std::string& out_dir);

nlohmann::json BuildManifest(const ExperimentConfig& cfg,
                             const std::vector<RunResult>& results);
// Writes curve CSVs and the manifest; runs absent from `results` are
// marked missing in the manifest.
void EmitCurves(const std::vector<RunResult>& results, const ExperimentConfig& cfg,
                const std::string& out_dir);

// Reads the manifest and whatever run files exist, then re-emits curves.
std::vector<RunResult> Aggregate(const std::string& in_dir);

struct ReplayReport {
  bool identical = false;
  bool restored = false;  // run file was missing and has been rewritten
  std::string detail;
};

// Re-executes one run from the manifest's config and compares it byte for
// byte with the stored run file.
ReplayReport ReplayRun(const std::string& in_dir, const std::string& run_id);

}  // namespace hitl

#endif  // HITL_HARNESS_H_
