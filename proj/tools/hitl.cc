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

// hitl: run, aggregate and replay human-in-the-loop experiments, or serve
// the live feedback session.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hitl/errors.h"
#include "hitl/harness.h"

#ifdef HITL_HAVE_LIVE
#include "hitl/live_server.h"
#endif

namespace {

int Run(const std::string& config_path, const std::optional<std::string>& agent,
        const std::optional<uint64_t>& seed, const std::optional<std::string>& out,
        const std::optional<int>& episodes, const std::optional<int>& workers,
        bool quiet) {
  hitl::ExperimentConfig cfg = config_path.empty()
                                   ? hitl::ExperimentConfig{}
                                   : hitl::LoadExperimentConfig(config_path);
  if (agent) {
    const hitl::AgentKind kind = hitl::ParseAgentKind(*agent);
    auto it = cfg.agents.find(kind);
    const hitl::AgentConfig agent_cfg =
        it == cfg.agents.end() ? hitl::AgentConfig{} : it->second;
    cfg.agents = {{kind, agent_cfg}};
  }
  if (seed) cfg.master_seed = *seed;
  if (out) cfg.output_dir = *out;
  if (episodes) cfg.n_episodes = *episodes;
  if (workers) cfg.workers = *workers;
  cfg.Validate();

  const auto start = std::chrono::steady_clock::now();
  const size_t total = hitl::EnumerateRuns(cfg).size();
  size_t done = 0;
  hitl::RunOptions options;
  options.on_run_complete = [&](const hitl::RunResult& r) {
    ++done;
    if (!quiet) {
      std::cerr << "[" << done << "/" << total << "] " << r.spec.id() << " final return "
                << r.episodes.back().total_return << "\n";
    }
  };
  const auto results = hitl::RunExperiment(cfg, options);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const auto& [kind, curve] : hitl::ComputeCurves(results, cfg)) {
    const auto reach = hitl::EpisodesToThreshold(curve.mean_return, 0.8);
    std::cout << hitl::AgentKindName(kind) << ": episodes to 0.8 = "
              << (reach ? std::to_string(*reach) : std::string("not reached"))
              << ", final trimmed mean = " << curve.mean_return.back() << "\n";
  }
  std::cout << "wrote " << cfg.output_dir << " (" << results.size() << " runs, " << secs
            << " s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-in-the-loop reinforcement learning workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> agent;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> episodes;
  std::optional<int> workers;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run an experiment grid");
  run->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  run->add_option("--agent", agent, "Restrict to one agent kind")
      ->check(CLI::IsMember({"dqn", "dqn-shaping", "deep-tamer", "dqn-tamer"}));
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out, "Output directory");
  run->add_option("--episodes", episodes, "Episodes per run");
  run->add_option("--workers", workers, "Concurrent runs");
  run->add_flag("--quiet", quiet, "No per-run progress");

  std::string in_dir;
  auto* aggregate = app.add_subcommand("aggregate", "Recompute curves from run files");
  aggregate->add_option("--in", in_dir, "Experiment directory")->required();

  std::string run_id;
  auto* replay = app.add_subcommand("replay", "Re-execute one run and diff it");
  replay->add_option("--run-id", run_id, "Run id, e.g. dqn-tamer-L3-S1")->required();
  replay->add_option("--in", in_dir, "Experiment directory")->default_val("out");

#ifdef HITL_HAVE_LIVE
  hitl::ServerOptions server_options;
  auto* serve = app.add_subcommand("serve", "Serve the live feedback session");
  serve->add_option("--port", server_options.port, "TCP port")->default_val(8080);
  serve->add_option("--static", server_options.static_dir, "UI bundle directory");
  serve->add_option("--tick-ms", server_options.session.tick_ms, "Tick period")
      ->default_val(500);
  serve->add_option("--seed", server_options.session.seed, "Session seed");
  serve->add_option("--address", server_options.address, "Bind address")
      ->default_val("127.0.0.1");
  serve->add_flag("--autostart", server_options.session.autostart,
                  "Start ticking without waiting for a start command");
  serve->add_flag("--multi-session", server_options.multi_session,
                  "Allow more than one session id");
#endif

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return Run(config_path, agent, seed, out, episodes, workers, quiet);
    if (*aggregate) {
      const auto results = hitl::Aggregate(in_dir);
      std::cout << "aggregated " << results.size() << " runs in " << in_dir << "\n";
      return 0;
    }
    if (*replay) {
      const hitl::ReplayReport report = hitl::ReplayRun(in_dir, run_id);
      std::cout << run_id << ": " << report.detail << "\n";
      return report.identical ? 0 : 3;
    }
#ifdef HITL_HAVE_LIVE
    if (*serve) {
      hitl::LiveServer server(server_options);
      std::cout << "listening on " << server_options.address << ":" << server.port()
                << std::endl;
      server.Run();
      return 0;
    }
#endif
  } catch (const hitl::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const hitl::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
