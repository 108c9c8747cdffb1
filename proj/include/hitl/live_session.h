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

// A live training session: one DQN-TAMER agent stepping a maze at wall-clock
// ticks while a human sends binary feedback. Transport-free; the server in
// live_server.h wires it to WebSockets. Message formats are in
// docs/protocol.md.

#ifndef HITL_LIVE_SESSION_H_
#define HITL_LIVE_SESSION_H_

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hitl/agents.h"
#include "hitl/maze.h"
#include "hitl/observer.h"

namespace hitl {

inline constexpr int kMinTickMs = 10;
inline constexpr int kMaxTickMs = 10000;

struct SessionConfig {
  int tick_ms = 500;
  uint64_t seed = 0;  // layout and agent streams derive from it
  AgentConfig agent;
  std::vector<double> p_delay_assumed{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  MazeObservation observation = MazeObservation::kMdp;
  bool autostart = false;
  int max_episodes = 0;  // 0: unlimited
};

enum class RunStatus { kRunning, kPaused, kFinished };

std::string RunStatusName(RunStatus status);

class Session {
 public:
  Session(std::string id, SessionConfig cfg);

  // Runs one agent step when running and returns the snapshot to broadcast;
  // nullopt otherwise.
  std::optional<nlohmann::json> Tick();

  // Parses one client message and returns the direct reply (ack or error).
  nlohmann::json HandleMessage(const std::string& text);
  nlohmann::json HandleFeedback(const nlohmann::json& msg);
  nlohmann::json HandleControl(const nlohmann::json& msg);

  // Most recent snapshot, as sent to newly connected clients.
  nlohmann::json LatestSnapshot() const;

  const std::string& id() const { return id_; }
  int tick_ms() const;
  RunStatus status() const;
  int64_t feedback_replay_size() const;

 private:
  nlohmann::json BuildSnapshot(const StepReport* report);
  // (episode, step) the next tick will execute.
  std::pair<int, int> NextStepLocked() const;

  const std::string id_;
  SessionConfig cfg_;
  mutable std::mutex mu_;
  MazeEnv env_;
  Agent agent_;
  LiveFeedbackSource feedback_;
  RunStatus status_;
  int episode_ = 0;
  double episode_return_ = 0.0;
  std::optional<int> last_action_;
  double last_reward_ = 0.0;
  int64_t seq_ = 0;
  int64_t next_feedback_id_ = 0;
  nlohmann::json latest_;
};

}  // namespace hitl

#endif  // HITL_LIVE_SESSION_H_
