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

#include "hitl/live_session.h"

#include "hitl/errors.h"
#include "hitl/rng.h"

namespace hitl {
namespace {

nlohmann::json Error(const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

nlohmann::json CellJson(Cell c) { return nlohmann::json::array({c.col, c.row}); }

}  // namespace

std::string RunStatusName(RunStatus status) {
  switch (status) {
    case RunStatus::kRunning: return "running";
    case RunStatus::kPaused: return "paused";
    case RunStatus::kFinished: return "finished";
  }
  return "unknown";
}

Session::Session(std::string id, SessionConfig cfg)
    : id_(std::move(id)),
      cfg_(std::move(cfg)),
      env_(GenerateMaze(DeriveSeed(cfg_.seed, {1})), cfg_.observation),
      agent_(AgentKind::kDqnTamer, cfg_.agent, env_.observation_size(), env_.num_actions(),
             cfg_.p_delay_assumed, DeriveSeed(cfg_.seed, {2})),
      status_(cfg_.autostart ? RunStatus::kRunning : RunStatus::kPaused) {
  if (cfg_.tick_ms < kMinTickMs || cfg_.tick_ms > kMaxTickMs) {
    throw ConfigError("tick_ms must lie in [10, 10000]");
  }
  env_.Reset();
  agent_.BeginEpisode();
  latest_ = BuildSnapshot(nullptr);
}

int Session::tick_ms() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cfg_.tick_ms;
}

RunStatus Session::status() const {
  std::lock_guard<std::mutex> lock(mu_);
  return status_;
}

int64_t Session::feedback_replay_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return agent_.feedback_replay().size();
}

nlohmann::json Session::LatestSnapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return latest_;
}

std::pair<int, int> Session::NextStepLocked() const {
  if (env_.done()) return {episode_ + 1, 0};
  return {episode_, env_.steps()};
}

std::optional<nlohmann::json> Session::Tick() {
  std::lock_guard<std::mutex> lock(mu_);
  if (status_ != RunStatus::kRunning) return std::nullopt;
  if (env_.done()) {
    feedback_.EndEpisode();
    ++episode_;
    episode_return_ = 0.0;
    env_.Reset();
    agent_.BeginEpisode();
  }
  const StepReport report = RunAgentStep(agent_, env_, feedback_, episode_);
  episode_return_ += report.transition.reward;
  last_action_ = report.transition.action;
  last_reward_ = report.transition.reward;
  if (env_.done() && cfg_.max_episodes > 0 && episode_ + 1 >= cfg_.max_episodes) {
    status_ = RunStatus::kFinished;
  }
  ++seq_;
  latest_ = BuildSnapshot(&report);
  return latest_;
}

nlohmann::json Session::BuildSnapshot(const StepReport* report) {
  const MazeLayout& layout = env_.layout();
  nlohmann::json grid = nlohmann::json::array();
  for (int row = 0; row < kMazeSize; ++row) {
    std::string line;
    for (int col = 0; col < kMazeSize; ++col) line += layout.IsWall({col, row}) ? '#' : '.';
    grid.push_back(line);
  }
  nlohmann::json acks = nlohmann::json::array();
  if (report) {
    for (const FeedbackEvent& e : report->events) {
      acks.push_back({{"feedback_id", e.sequence},
                      {"polarity", e.polarity},
                      {"episode", e.episode},
                      {"step", e.arrival_step}});
    }
  }
  const Vector values = agent_.PolicyValues(env_.Observe());
  return {{"type", "snapshot"},
          {"session", id_},
          {"seq", seq_},
          {"status", RunStatusName(status_)},
          {"episode", episode_},
          {"step", env_.steps()},
          {"done", env_.done()},
          {"grid", grid},
          {"agent", CellJson(env_.agent_cell())},
          {"start", CellJson(layout.start)},
          {"goal", CellJson(layout.goal)},
          {"last_action", last_action_ ? nlohmann::json(*last_action_) : nlohmann::json()},
          {"last_reward", last_reward_},
          {"return", episode_return_},
          {"alpha_h", agent_.schedules().alpha_h},
          {"epsilon", agent_.schedules().epsilon},
          {"policy_values", std::vector<double>(values.data(), values.data() + values.size())},
          {"d_global_size", agent_.feedback_replay().size()},
          {"triples_added", report ? report->triples_added : 0},
          {"acks", acks},
          {"tick_ms", cfg_.tick_ms}};
}

nlohmann::json Session::HandleMessage(const std::string& text) {
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return Error("bad_json", "message is not valid JSON");
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return Error("bad_message", "message needs a string 'type' field");
  }
  const std::string type = msg["type"];
  if (type == "feedback") return HandleFeedback(msg);
  if (type == "control") return HandleControl(msg);
  return Error("unknown_type", "unsupported message type '" + type + "'");
}

nlohmann::json Session::HandleFeedback(const nlohmann::json& msg) {
  const auto it = msg.find("polarity");
  if (it == msg.end() || !it->is_number_integer() ||
      (it->get<int64_t>() != 1 && it->get<int64_t>() != -1)) {
    return Error("bad_polarity", "polarity must be the integer 1 or -1");
  }
  const int polarity = it->get<int>();
  std::lock_guard<std::mutex> lock(mu_);
  feedback_.Submit(polarity);
  const int64_t feedback_id = next_feedback_id_++;
  const auto [episode, step] = NextStepLocked();
  nlohmann::json ack{{"type", "ack"},     {"for", "feedback"}, {"feedback_id", feedback_id},
                     {"polarity", polarity}, {"episode", episode}, {"step", step}};
  if (msg.contains("client_ts")) ack["client_ts"] = msg["client_ts"];
  return ack;
}

nlohmann::json Session::HandleControl(const nlohmann::json& msg) {
  const auto it = msg.find("command");
  if (it == msg.end() || !it->is_string()) {
    return Error("bad_message", "control needs a string 'command' field");
  }
  const std::string command = *it;
  std::lock_guard<std::mutex> lock(mu_);
  if (command == "start") {
    if (status_ == RunStatus::kFinished) {
      return Error("finished", "session has finished; reset it first");
    }
    status_ = RunStatus::kRunning;
  } else if (command == "pause") {
    if (status_ == RunStatus::kRunning) status_ = RunStatus::kPaused;
  } else if (command == "reset") {
    const auto keep = msg.find("keep_networks");
    if (keep != msg.end() && !keep->is_boolean()) {
      return Error("bad_argument", "keep_networks must be a boolean");
    }
    agent_.ResetLearning(keep != msg.end() && keep->get<bool>());
    if (env_.steps() > 0) ++episode_;
    episode_return_ = 0.0;
    last_action_.reset();
    last_reward_ = 0.0;
    feedback_.EndEpisode();
    env_.Reset();
    agent_.BeginEpisode();
    if (status_ == RunStatus::kFinished) status_ = RunStatus::kPaused;
  } else if (command == "set_speed") {
    const auto ms = msg.find("tick_ms");
    if (ms == msg.end() || !ms->is_number_integer() || ms->get<int64_t>() < kMinTickMs ||
        ms->get<int64_t>() > kMaxTickMs) {
      return Error("bad_argument", "tick_ms must be an integer in [10, 10000]");
    }
    cfg_.tick_ms = ms->get<int>();
  } else {
    return Error("unknown_command", "unknown control command '" + command + "'");
  }
  return {{"type", "ack"},
          {"for", "control"},
          {"command", command},
          {"status", RunStatusName(status_)},
          {"tick_ms", cfg_.tick_ms}};
}

}  // namespace hitl
