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

// JSON-typed values cross the boundary as strings; the Python package wraps
// them with json.loads/json.dumps.

#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hitl/agents.h"
#include "hitl/errors.h"
#include "hitl/harness.h"
#include "hitl/live_session.h"
#include "hitl/maze.h"
#include "hitl/nn.h"
#include "hitl/rng.h"
#include "hitl/taxi.h"

namespace py = pybind11;

namespace hitl {
namespace {

nlohmann::json RunToJson(const RunResult& run) {
  nlohmann::json episodes = nlohmann::json::array();
  for (const EpisodeResult& e : run.episodes) {
    episodes.push_back({{"episode", e.episode},
                        {"return", e.total_return},
                        {"steps", e.steps},
                        {"feedback_emitted", e.feedback.emitted},
                        {"feedback_delivered", e.feedback.delivered},
                        {"feedback_dropped", e.feedback.dropped},
                        {"feedback_discarded", e.feedback.discarded}});
  }
  return {{"id", run.spec.id()},
          {"agent", AgentKindName(run.spec.agent)},
          {"layout_index", run.spec.layout_index},
          {"seed_index", run.spec.seed_index},
          {"episodes", episodes}};
}

std::string RunsToJson(const std::vector<RunResult>& runs) {
  nlohmann::json out = nlohmann::json::array();
  for (const RunResult& run : runs) out.push_back(RunToJson(run));
  return out.dump();
}

std::string RunExperimentJson(const std::string& config_json, bool write_files) {
  const ExperimentConfig cfg = ExperimentConfigFromJson(nlohmann::json::parse(config_json));
  std::vector<RunResult> runs;
  {
    py::gil_scoped_release release;
    RunOptions options;
    options.write_files = write_files;
    runs = RunExperiment(cfg, options);
  }
  return RunsToJson(runs);
}

std::string CurvesJson(const std::string& runs_dir) {
  const std::vector<RunResult> runs = Aggregate(runs_dir);
  std::ifstream manifest(ManifestPath(runs_dir));
  const ExperimentConfig cfg = ExperimentConfigFromJson(nlohmann::json::parse(manifest).at("config"));
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [kind, curve] : ComputeCurves(runs, cfg)) {
    out[AgentKindName(kind)] = {
        {"mean_return", curve.mean_return}, {"p25", curve.p25}, {"p75", curve.p75}};
  }
  return out.dump();
}

SessionConfig SessionConfigFromJson(const std::string& text) {
  const nlohmann::json j = text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text);
  SessionConfig cfg;
  cfg.tick_ms = j.value("tick_ms", cfg.tick_ms);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.autostart = j.value("autostart", cfg.autostart);
  cfg.max_episodes = j.value("max_episodes", cfg.max_episodes);
  cfg.p_delay_assumed = j.value("p_delay_assumed", cfg.p_delay_assumed);
  if (j.contains("observation")) cfg.observation = ParseMazeObservation(j["observation"]);
  if (j.contains("agent")) cfg.agent = AgentConfigFromJson(j["agent"]);
  return cfg;
}

py::tuple StepTuple(const StepOutcome& out) {
  return py::make_tuple(out.observation, out.reward, out.done);
}

}  // namespace
}  // namespace hitl

PYBIND11_MODULE(_core, m) {
  using namespace hitl;
  m.doc() = "Native core of hitl_workbench.";
  m.attr("__version__") = kSoftwareVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);
  py::register_exception<GenerationError>(m, "GenerationError", PyExc_RuntimeError);

  m.def("derive_seed", [](uint64_t base, const std::vector<uint64_t>& path) {
    return DeriveSeed(base, std::span<const uint64_t>(path));
  }, py::arg("base"), py::arg("path"));

  m.def("generate_maze_json", [](uint64_t seed) { return MazeLayoutToJson(GenerateMaze(seed)).dump(); },
        py::arg("layout_seed"));

  py::class_<MazeEnv>(m, "MazeEnv")
      .def(py::init([](uint64_t layout_seed, const std::string& observation) {
             return MazeEnv(GenerateMaze(layout_seed), ParseMazeObservation(observation));
           }),
           py::arg("layout_seed"), py::arg("observation") = "mdp")
      .def_property_readonly("num_actions", &MazeEnv::num_actions)
      .def_property_readonly("observation_size", &MazeEnv::observation_size)
      .def_property_readonly("done", &MazeEnv::done)
      .def_property_readonly("steps", &MazeEnv::steps)
      .def_property_readonly("agent_cell",
                             [](const MazeEnv& env) {
                               return py::make_tuple(env.agent_cell().col, env.agent_cell().row);
                             })
      .def("layout_json", [](const MazeEnv& env) { return MazeLayoutToJson(env.layout()).dump(); })
      .def("reset", &MazeEnv::Reset)
      .def("step", [](MazeEnv& env, int action) { return StepTuple(env.Step(action)); },
           py::arg("action"))
      .def("observe", &MazeEnv::Observe)
      .def("render", &MazeEnv::Render);

  py::class_<TaxiEnv>(m, "TaxiEnv")
      .def(py::init([](uint64_t seed, const std::string& observation) {
             return TaxiEnv(seed, ParseTaxiObservation(observation));
           }),
           py::arg("seed"), py::arg("observation") = "extended")
      .def_property_readonly("num_actions", &TaxiEnv::num_actions)
      .def_property_readonly("observation_size", &TaxiEnv::observation_size)
      .def_property_readonly("done", &TaxiEnv::done)
      .def_property_readonly("steps", &TaxiEnv::steps)
      .def("reset", &TaxiEnv::Reset)
      .def("step", [](TaxiEnv& env, int action) { return StepTuple(env.Step(action)); },
           py::arg("action"))
      .def("observe", &TaxiEnv::Observe)
      .def("render", &TaxiEnv::Render);

  m.def("run_experiment_json", &RunExperimentJson, py::arg("config_json"),
        py::arg("write_files") = true);
  m.def("aggregate_json", [](const std::string& in_dir) { return RunsToJson(Aggregate(in_dir)); },
        py::arg("in_dir"));
  m.def("curves_json", &CurvesJson, py::arg("in_dir"));
  m.def("replay", [](const std::string& in_dir, const std::string& run_id) {
    const ReplayReport r = ReplayRun(in_dir, run_id);
    py::dict out;
    out["identical"] = r.identical;
    out["restored"] = r.restored;
    out["detail"] = r.detail;
    return out;
  }, py::arg("in_dir"), py::arg("run_id"));
  m.def("episodes_to_threshold", &EpisodesToThreshold, py::arg("curve"), py::arg("threshold"));
  m.def("trimmed_mean", [](const std::vector<double>& values, double trim) {
    return TrimmedMean(values, trim);
  }, py::arg("values"), py::arg("trim_fraction") = 0.1);

  py::class_<Session>(m, "Session")
      .def(py::init([](const std::string& id, const std::string& config_json) {
             return std::make_unique<Session>(id, SessionConfigFromJson(config_json));
           }),
           py::arg("session_id"), py::arg("config_json") = "")
      .def("tick", [](Session& s) -> std::optional<std::string> {
        auto snap = s.Tick();
        if (!snap) return std::nullopt;
        return snap->dump();
      })
      .def("handle_message", [](Session& s, const std::string& text) {
        return s.HandleMessage(text).dump();
      }, py::arg("text"))
      .def("latest_snapshot", [](const Session& s) { return s.LatestSnapshot().dump(); })
      .def_property_readonly("tick_ms", &Session::tick_ms)
      .def_property_readonly("feedback_replay_size", &Session::feedback_replay_size);
}
