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

#ifndef HITL_AGENTS_H_
#define HITL_AGENTS_H_

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hitl/environment.h"
#include "hitl/nn.h"
#include "hitl/observer.h"
#include "hitl/rng.h"

namespace hitl {

enum class AgentKind { kDqn, kDqnShaping, kDeepTamer, kDqnTamer };

// "dqn", "dqn-shaping", "deep-tamer", "dqn-tamer".
std::string AgentKindName(AgentKind kind);
AgentKind ParseAgentKind(const std::string& name);
bool UsesQ(AgentKind kind);
bool UsesH(AgentKind kind);

struct AgentConfig {
  double gamma = 0.95;
  double alpha_q = 1.0;
  double alpha_h = 1.0;
  double alpha_h_decay = 0.9999;
  double epsilon_start = 0.3;
  double epsilon_decrement = 0.001;
  double epsilon_floor = 0.1;
  int update_interval = 4;
  int batch_size = 32;
  int replay_capacity = 10000;
  int target_sync_interval = 100;
  double shaping_weight = 1.0;
  int hidden_dim = 100;
  double learning_rate = 1e-3;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  // Weight each credited pair by its assumed delay probability instead of
  // counting every pair in the window once.
  bool weighted_credit = false;

  void Validate() const;
  RmsPropConfig rmsprop() const {
    return {learning_rate, rmsprop_decay, rmsprop_epsilon};
  }
  bool operator==(const AgentConfig&) const = default;
};

nlohmann::json AgentConfigToJson(const AgentConfig& cfg);
// Missing keys keep the values in `base`; unknown keys are a ConfigError.
AgentConfig AgentConfigFromJson(const nlohmann::json& j, AgentConfig base = {});

struct Transition {
  Vector state;
  int action = 0;
  double reward = 0.0;
  Vector next_state;
  bool done = false;

  bool operator==(const Transition&) const = default;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void Add(Transition t);
  // min(batch_size, size()) indices drawn uniformly with replacement.
  std::vector<int> SampleIndices(int batch_size, Rng& rng) const;

  const Transition& at(int i) const { return items_[i]; }
  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  int64_t insertions() const { return insertions_; }

 private:
  int capacity_;
  std::vector<Transition> items_;
  int64_t insertions_ = 0;
};

struct FeedbackTriple {
  Vector state;
  int action = 0;
  double feedback = 0.0;
  double weight = 1.0;
  int step = 0;  // step the pair was taken at

  bool operator==(const FeedbackTriple&) const = default;
};

using LocalFeedback = std::vector<FeedbackTriple>;

// Append-only union of every LocalFeedback set.
class FeedbackReplay {
 public:
  void Append(const LocalFeedback& local);
  std::vector<int> SampleIndices(int batch_size, Rng& rng) const;

  const FeedbackTriple& at(int i) const { return items_[i]; }
  int size() const { return static_cast<int>(items_.size()); }
  bool empty() const { return items_.empty(); }

 private:
  std::vector<FeedbackTriple> items_;
};

// The last `capacity` (state, action, step) pairs of the current episode.
class CreditWindow {
 public:
  struct Entry {
    Vector state;
    int action = 0;
    int step = 0;
  };

  explicit CreditWindow(int capacity);
  // Window large enough for every delay in the support of `p_delay_assumed`.
  static CreditWindow ForDelays(const std::vector<double>& p_delay_assumed);

  // Steps must be strictly increasing within an episode.
  void Push(Vector state, int action, int step);
  void Clear() { entries_.clear(); }

  const std::deque<Entry>& entries() const { return entries_; }
  int capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }

 private:
  int capacity_;
  std::deque<Entry> entries_;
};

// Greedy action with ties broken toward the lowest index.
int ArgMax(const Vector& values);

// One uniform draw decides exploration; exploring draws a second uniform
// action index. Every selector below consumes the stream identically.
int EpsilonGreedy(const Vector& values, double epsilon, Rng& rng);

int SelectActionDqn(const Network& qnet, const Vector& obs, double epsilon, Rng& rng);
int SelectActionTamer(const Network& hnet, const Vector& obs, double epsilon, Rng& rng);
int SelectActionDqnTamer(const Network& qnet, const Network& hnet, const Vector& obs,
                         double alpha_q, double alpha_h, double epsilon, Rng& rng);

double DqnTdTarget(const Transition& t, const Network& target_qnet, double gamma);

// One RMSProp step on the batch-mean squared TD error; syncs the target
// network every `target_sync_interval` updates. Returns the batch-mean loss
// before the step, or nullopt when the buffer is empty.
std::optional<double> DqnUpdate(Network* qnet, Network* target_qnet, RmsProp* opt,
                                const ReplayBuffer& buffer, const AgentConfig& cfg,
                                Rng& rng, int64_t* update_count);

double ShapedReward(double env_reward, double feedback_sum, double shaping_weight);

// Pairs taken at arrival_step - d for each d with p_delay_assumed[d] > 0,
// restricted to what the window still holds.
LocalFeedback TamerCreditAssign(const CreditWindow& window, const FeedbackEvent& event,
                                const std::vector<double>& p_delay_assumed,
                                bool weighted = false);

// Gradient of sum(weight * (H(s,a) - f)^2) over `local`.
Gradient TamerLocalGradient(const Network& hnet, const LocalFeedback& local);
void TamerUpdateLocal(Network* hnet, RmsProp* opt, const LocalFeedback& local);
// Returns false (and leaves the network alone) when `replay` is empty.
bool TamerUpdateGlobal(Network* hnet, RmsProp* opt, const FeedbackReplay& replay,
                       int batch_size, Rng& rng);

struct Schedules {
  double epsilon = 0.3;
  double alpha_h = 1.0;

  static Schedules Initial(const AgentConfig& cfg) {
    return {cfg.epsilon_start, cfg.alpha_h};
  }
  // One environment step's worth of decay.
  void Decay(const AgentConfig& cfg);
};

struct StepReport {
  Transition transition;    // reward is the environment reward
  double learning_reward = 0.0;  // what went into replay (shaped for dqn-shaping)
  int feedback_delivered = 0;
  int triples_added = 0;
  std::vector<FeedbackEvent> events;
  bool q_updated = false;
  bool h_global_updated = false;
  StepInfo info;
};

// Owns the networks, buffers and schedules of one learning run.
class Agent {
 public:
  // All random streams derive from `seed` independently of `kind`, so agents
  // of different kinds built from the same seed start from identical networks
  // and exploration streams.
  Agent(AgentKind kind, AgentConfig cfg, int observation_size, int num_actions,
        std::vector<double> p_delay_assumed, uint64_t seed);

  AgentKind kind() const { return kind_; }
  const AgentConfig& config() const { return cfg_; }
  int num_actions() const { return num_actions_; }

  int SelectAction(const Vector& obs);
  // Per-action values the policy maximizes.
  Vector PolicyValues(const Vector& obs) const;
  void BeginEpisode() { window_.Clear(); }

  // Reinitializes schedules (and optionally networks and buffers).
  void ResetLearning(bool keep_networks);

  const Network& qnet() const { return qnet_; }
  const Network& target_qnet() const { return target_qnet_; }
  const Network& hnet() const { return hnet_; }
  const ReplayBuffer& replay() const { return replay_; }
  const FeedbackReplay& feedback_replay() const { return feedback_replay_; }
  const CreditWindow& window() const { return window_; }
  const Schedules& schedules() const { return schedules_; }
  int64_t total_steps() const { return total_steps_; }
  int64_t q_updates() const { return q_updates_; }
  int64_t h_local_updates() const { return h_local_updates_; }
  int64_t h_global_updates() const { return h_global_updates_; }

  nlohmann::json Checkpoint(bool include_buffers = false) const;

 private:
  friend StepReport RunAgentStep(Agent& agent, Environment& env,
                                 FeedbackSource& feedback, int episode);

  void ApplyFeedback(const std::vector<FeedbackEvent>& events, StepReport* report);
  void Learn(StepReport* report);

  AgentKind kind_;
  AgentConfig cfg_;
  int observation_size_;
  int num_actions_;
  std::vector<double> p_delay_assumed_;
  uint64_t seed_;

  Network qnet_;
  Network target_qnet_;
  Network hnet_;
  RmsProp q_opt_;
  RmsProp h_opt_;
  ReplayBuffer replay_;
  FeedbackReplay feedback_replay_;
  CreditWindow window_;
  Schedules schedules_;

  Rng action_rng_;
  Rng q_sample_rng_;
  Rng h_sample_rng_;

  int64_t total_steps_ = 0;
  int64_t q_updates_ = 0;
  int64_t h_local_updates_ = 0;
  int64_t h_global_updates_ = 0;
};

// observe -> act -> decay schedules -> env step -> notify feedback source ->
// poll due feedback -> credit assignment and local H update -> replay ->
// every update_interval steps, Q update and global H update.
StepReport RunAgentStep(Agent& agent, Environment& env, FeedbackSource& feedback,
                        int episode);

}  // namespace hitl

#endif  // HITL_AGENTS_H_
