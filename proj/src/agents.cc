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

#include "hitl/agents.h"

#include <algorithm>
#include <cmath>

#include "hitl/errors.h"

namespace hitl {

std::string AgentKindName(AgentKind kind) {
  switch (kind) {
    case AgentKind::kDqn: return "dqn";
    case AgentKind::kDqnShaping: return "dqn-shaping";
    case AgentKind::kDeepTamer: return "deep-tamer";
    case AgentKind::kDqnTamer: return "dqn-tamer";
  }
  return "unknown";
}

AgentKind ParseAgentKind(const std::string& name) {
  if (name == "dqn") return AgentKind::kDqn;
  if (name == "dqn-shaping") return AgentKind::kDqnShaping;
  if (name == "deep-tamer") return AgentKind::kDeepTamer;
  if (name == "dqn-tamer") return AgentKind::kDqnTamer;
  throw ConfigError("unknown agent kind '" + name + "'");
}

bool UsesQ(AgentKind kind) { return kind != AgentKind::kDeepTamer; }

bool UsesH(AgentKind kind) {
  return kind == AgentKind::kDeepTamer || kind == AgentKind::kDqnTamer;
}

void AgentConfig::Validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(alpha_q >= 0.0) || !(alpha_h >= 0.0)) {
    throw ConfigError("alpha_q and alpha_h must be nonnegative");
  }
  if (!(alpha_h_decay > 0.0 && alpha_h_decay <= 1.0)) {
    throw ConfigError("alpha_h_decay must lie in (0, 1]");
  }
  if (!(epsilon_floor >= 0.0 && epsilon_floor <= epsilon_start && epsilon_start <= 1.0)) {
    throw ConfigError("need 0 <= epsilon_floor <= epsilon_start <= 1");
  }
  if (!(epsilon_decrement >= 0.0)) throw ConfigError("epsilon_decrement must be nonnegative");
  if (update_interval <= 0 || batch_size <= 0 || replay_capacity <= 0 ||
      target_sync_interval <= 0 || hidden_dim <= 0) {
    throw ConfigError("intervals, sizes and capacities must be positive");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) {
    throw ConfigError("rmsprop_decay must lie in (0, 1)");
  }
  if (!(rmsprop_epsilon > 0.0)) throw ConfigError("rmsprop_epsilon must be positive");
}

nlohmann::json AgentConfigToJson(const AgentConfig& c) {
  return {{"gamma", c.gamma},
          {"alpha_q", c.alpha_q},
          {"alpha_h", c.alpha_h},
          {"alpha_h_decay", c.alpha_h_decay},
          {"epsilon_start", c.epsilon_start},
          {"epsilon_decrement", c.epsilon_decrement},
          {"epsilon_floor", c.epsilon_floor},
          {"update_interval", c.update_interval},
          {"batch_size", c.batch_size},
          {"replay_capacity", c.replay_capacity},
          {"target_sync_interval", c.target_sync_interval},
          {"shaping_weight", c.shaping_weight},
          {"hidden_dim", c.hidden_dim},
          {"learning_rate", c.learning_rate},
          {"rmsprop_decay", c.rmsprop_decay},
          {"rmsprop_epsilon", c.rmsprop_epsilon},
          {"weighted_credit", c.weighted_credit}};
}

AgentConfig AgentConfigFromJson(const nlohmann::json& j, AgentConfig c) {
  for (const auto& [key, v] : j.items()) {
    if (key == "gamma") c.gamma = v.get<double>();
    else if (key == "alpha_q") c.alpha_q = v.get<double>();
    else if (key == "alpha_h") c.alpha_h = v.get<double>();
    else if (key == "alpha_h_decay") c.alpha_h_decay = v.get<double>();
    else if (key == "epsilon_start") c.epsilon_start = v.get<double>();
    else if (key == "epsilon_decrement") c.epsilon_decrement = v.get<double>();
    else if (key == "epsilon_floor") c.epsilon_floor = v.get<double>();
    else if (key == "update_interval") c.update_interval = v.get<int>();
    else if (key == "batch_size") c.batch_size = v.get<int>();
    else if (key == "replay_capacity") c.replay_capacity = v.get<int>();
    else if (key == "target_sync_interval") c.target_sync_interval = v.get<int>();
    else if (key == "shaping_weight") c.shaping_weight = v.get<double>();
    else if (key == "hidden_dim") c.hidden_dim = v.get<int>();
    else if (key == "learning_rate") c.learning_rate = v.get<double>();
    else if (key == "rmsprop_decay") c.rmsprop_decay = v.get<double>();
    else if (key == "rmsprop_epsilon") c.rmsprop_epsilon = v.get<double>();
    else if (key == "weighted_credit") c.weighted_credit = v.get<bool>();
    else throw ConfigError("unknown agent key '" + key + "'");
  }
  c.Validate();
  return c;
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw ConfigError("replay capacity must be positive");
  items_.reserve(std::min(capacity, 1 << 14));
}

void ReplayBuffer::Add(Transition t) {
  if (size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[insertions_ % capacity_] = std::move(t);
  }
  ++insertions_;
}

namespace {

std::vector<int> SampleWithReplacement(int size, int batch_size, Rng& rng) {
  std::vector<int> idx(std::min(batch_size, size));
  for (int& i : idx) i = UniformIndex(rng, size);
  return idx;
}

}  // namespace

std::vector<int> ReplayBuffer::SampleIndices(int batch_size, Rng& rng) const {
  return SampleWithReplacement(size(), batch_size, rng);
}

void FeedbackReplay::Append(const LocalFeedback& local) {
  items_.insert(items_.end(), local.begin(), local.end());
}

std::vector<int> FeedbackReplay::SampleIndices(int batch_size, Rng& rng) const {
  return SampleWithReplacement(size(), batch_size, rng);
}

CreditWindow::CreditWindow(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw ConfigError("credit window capacity must be positive");
}

CreditWindow CreditWindow::ForDelays(const std::vector<double>& p_delay_assumed) {
  int max_delay = 0;
  for (int d = 0; d < static_cast<int>(p_delay_assumed.size()); ++d) {
    if (p_delay_assumed[d] > 0.0) max_delay = d;
  }
  return CreditWindow(max_delay + 1);
}

void CreditWindow::Push(Vector state, int action, int step) {
  if (!entries_.empty() && step <= entries_.back().step) {
    throw ContractViolation("credit window steps must increase");
  }
  entries_.push_back({std::move(state), action, step});
  while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
}

int ArgMax(const Vector& values) {
  int best = 0;
  for (int a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

int EpsilonGreedy(const Vector& values, double epsilon, Rng& rng) {
  if (Uniform01(rng) < epsilon) {
    return UniformIndex(rng, static_cast<int>(values.size()));
  }
  return ArgMax(values);
}

int SelectActionDqn(const Network& qnet, const Vector& obs, double epsilon, Rng& rng) {
  return EpsilonGreedy(Forward(qnet, obs), epsilon, rng);
}

int SelectActionTamer(const Network& hnet, const Vector& obs, double epsilon, Rng& rng) {
  return EpsilonGreedy(Forward(hnet, obs), epsilon, rng);
}

int SelectActionDqnTamer(const Network& qnet, const Network& hnet, const Vector& obs,
                         double alpha_q, double alpha_h, double epsilon, Rng& rng) {
  if (!(alpha_q >= 0.0) || !(alpha_h >= 0.0)) {
    throw ContractViolation("policy weights must be nonnegative");
  }
  const Vector combined = alpha_q * Forward(qnet, obs) + alpha_h * Forward(hnet, obs);
  return EpsilonGreedy(combined, epsilon, rng);
}

double DqnTdTarget(const Transition& t, const Network& target_qnet, double gamma) {
  if (t.done) return t.reward;
  return t.reward + gamma * Forward(target_qnet, t.next_state).maxCoeff();
}

std::optional<double> DqnUpdate(Network* qnet, Network* target_qnet, RmsProp* opt,
                                const ReplayBuffer& buffer, const AgentConfig& cfg,
                                Rng& rng, int64_t* update_count) {
  if (buffer.empty()) return std::nullopt;
  const std::vector<int> batch = buffer.SampleIndices(cfg.batch_size, rng);
  const double scale = 1.0 / static_cast<double>(batch.size());
  Gradient grad = ParameterSet::Zeros(qnet->input_dim(), qnet->hidden_dim(),
                                      qnet->output_dim());
  double loss = 0.0;
  for (int i : batch) {
    const Transition& t = buffer.at(i);
    const double target = DqnTdTarget(t, *target_qnet, cfg.gamma);
    const double residual =
        AccumulateGradSquaredError(*qnet, t.state, t.action, target, scale, &grad);
    loss += scale * residual * residual;
  }
  opt->Step(grad, qnet);
  ++*update_count;
  if (*update_count % cfg.target_sync_interval == 0) *target_qnet = *qnet;
  return loss;
}

double ShapedReward(double env_reward, double feedback_sum, double shaping_weight) {
  return env_reward + shaping_weight * feedback_sum;
}

LocalFeedback TamerCreditAssign(const CreditWindow& window, const FeedbackEvent& event,
                                const std::vector<double>& p_delay_assumed,
                                bool weighted) {
  LocalFeedback local;
  for (int d = 0; d < static_cast<int>(p_delay_assumed.size()); ++d) {
    if (!(p_delay_assumed[d] > 0.0)) continue;
    const int step = event.arrival_step - d;
    for (const auto& e : window.entries()) {
      if (e.step != step) continue;
      local.push_back({e.state, e.action, static_cast<double>(event.polarity),
                       weighted ? p_delay_assumed[d] : 1.0, e.step});
      break;
    }
  }
  // Oldest pair first.
  std::reverse(local.begin(), local.end());
  return local;
}

Gradient TamerLocalGradient(const Network& hnet, const LocalFeedback& local) {
  Gradient grad = ParameterSet::Zeros(hnet.input_dim(), hnet.hidden_dim(),
                                      hnet.output_dim());
  for (const auto& t : local) {
    AccumulateGradSquaredError(hnet, t.state, t.action, t.feedback, t.weight, &grad);
  }
  return grad;
}

void TamerUpdateLocal(Network* hnet, RmsProp* opt, const LocalFeedback& local) {
  if (local.empty()) return;
  opt->Step(TamerLocalGradient(*hnet, local), hnet);
}

bool TamerUpdateGlobal(Network* hnet, RmsProp* opt, const FeedbackReplay& replay,
                       int batch_size, Rng& rng) {
  if (replay.empty()) return false;
  const std::vector<int> batch = replay.SampleIndices(batch_size, rng);
  const double scale = 1.0 / static_cast<double>(batch.size());
  Gradient grad = ParameterSet::Zeros(hnet->input_dim(), hnet->hidden_dim(),
                                      hnet->output_dim());
  for (int i : batch) {
    const FeedbackTriple& t = replay.at(i);
    AccumulateGradSquaredError(*hnet, t.state, t.action, t.feedback,
                               scale * t.weight, &grad);
  }
  opt->Step(grad, hnet);
  return true;
}

void Schedules::Decay(const AgentConfig& cfg) {
  epsilon = std::max(cfg.epsilon_floor, epsilon - cfg.epsilon_decrement);
  alpha_h *= cfg.alpha_h_decay;
}

Agent::Agent(AgentKind kind, AgentConfig cfg, int observation_size, int num_actions,
             std::vector<double> p_delay_assumed, uint64_t seed)
    : kind_(kind),
      cfg_(cfg),
      observation_size_(observation_size),
      num_actions_(num_actions),
      p_delay_assumed_(std::move(p_delay_assumed)),
      seed_(seed),
      qnet_(InitNetwork(observation_size, cfg.hidden_dim, num_actions,
                        DeriveSeed(seed, {1}))),
      target_qnet_(qnet_),
      hnet_(InitNetwork(observation_size, cfg.hidden_dim, num_actions,
                        DeriveSeed(seed, {2}))),
      q_opt_(qnet_, cfg.rmsprop()),
      h_opt_(hnet_, cfg.rmsprop()),
      replay_(cfg.replay_capacity),
      window_(CreditWindow::ForDelays(p_delay_assumed_)),
      schedules_(Schedules::Initial(cfg)),
      action_rng_(DeriveSeed(seed, {3})),
      q_sample_rng_(DeriveSeed(seed, {4})),
      h_sample_rng_(DeriveSeed(seed, {5})) {
  cfg_.Validate();
}

Vector Agent::PolicyValues(const Vector& obs) const {
  switch (kind_) {
    case AgentKind::kDqn:
    case AgentKind::kDqnShaping:
      return Forward(qnet_, obs);
    case AgentKind::kDeepTamer:
      return Forward(hnet_, obs);
    case AgentKind::kDqnTamer:
      return cfg_.alpha_q * Forward(qnet_, obs) + schedules_.alpha_h * Forward(hnet_, obs);
  }
  return {};
}

int Agent::SelectAction(const Vector& obs) {
  switch (kind_) {
    case AgentKind::kDqn:
    case AgentKind::kDqnShaping:
      return SelectActionDqn(qnet_, obs, schedules_.epsilon, action_rng_);
    case AgentKind::kDeepTamer:
      return SelectActionTamer(hnet_, obs, schedules_.epsilon, action_rng_);
    case AgentKind::kDqnTamer:
      return SelectActionDqnTamer(qnet_, hnet_, obs, cfg_.alpha_q, schedules_.alpha_h,
                                  schedules_.epsilon, action_rng_);
  }
  return 0;
}

void Agent::ResetLearning(bool keep_networks) {
  if (!keep_networks) {
    qnet_ = InitNetwork(observation_size_, cfg_.hidden_dim, num_actions_,
                        DeriveSeed(seed_, {1}));
    target_qnet_ = qnet_;
    hnet_ = InitNetwork(observation_size_, cfg_.hidden_dim, num_actions_,
                        DeriveSeed(seed_, {2}));
    q_opt_ = RmsProp(qnet_, cfg_.rmsprop());
    h_opt_ = RmsProp(hnet_, cfg_.rmsprop());
    replay_ = ReplayBuffer(cfg_.replay_capacity);
    feedback_replay_ = FeedbackReplay();
    schedules_ = Schedules::Initial(cfg_);
    total_steps_ = 0;
    q_updates_ = h_local_updates_ = h_global_updates_ = 0;
  }
  window_.Clear();
}

void Agent::ApplyFeedback(const std::vector<FeedbackEvent>& events, StepReport* report) {
  for (const FeedbackEvent& e : events) {
    LocalFeedback local =
        TamerCreditAssign(window_, e, p_delay_assumed_, cfg_.weighted_credit);
    if (local.empty()) continue;
    feedback_replay_.Append(local);
    TamerUpdateLocal(&hnet_, &h_opt_, local);
    ++h_local_updates_;
    report->triples_added += static_cast<int>(local.size());
  }
}

void Agent::Learn(StepReport* report) {
  if (UsesH(kind_)) ApplyFeedback(report->events, report);
  if (UsesQ(kind_)) {
    Transition stored = report->transition;
    stored.reward = report->learning_reward;
    replay_.Add(std::move(stored));
  }
  ++total_steps_;
  if (total_steps_ % cfg_.update_interval != 0) return;
  if (UsesQ(kind_)) {
    report->q_updated = DqnUpdate(&qnet_, &target_qnet_, &q_opt_, replay_, cfg_,
                                  q_sample_rng_, &q_updates_)
                            .has_value();
  }
  if (UsesH(kind_)) {
    report->h_global_updated =
        TamerUpdateGlobal(&hnet_, &h_opt_, feedback_replay_, cfg_.batch_size,
                          h_sample_rng_);
    if (report->h_global_updated) ++h_global_updates_;
  }
}

StepReport RunAgentStep(Agent& agent, Environment& env, FeedbackSource& feedback,
                        int episode) {
  if (env.done()) throw ContractViolation("agent step on a finished episode");
  StepReport report;
  const int step = env.steps();
  Vector obs = env.Observe();
  const int action = agent.SelectAction(obs);
  if (UsesH(agent.kind())) agent.window_.Push(obs, action, step);
  agent.schedules_.Decay(agent.cfg_);

  StepOutcome out = env.Step(action);
  feedback.Notify({obs, action, out.info, step, episode});
  report.events = feedback.Poll(step, episode);
  report.feedback_delivered = static_cast<int>(report.events.size());

  double feedback_sum = 0.0;
  for (const auto& e : report.events) feedback_sum += e.polarity;
  report.learning_reward =
      agent.kind() == AgentKind::kDqnShaping
          ? ShapedReward(out.reward, feedback_sum, agent.cfg_.shaping_weight)
          : out.reward;
  report.info = out.info;
  report.transition = {std::move(obs), action, out.reward, std::move(out.observation),
                       out.done};
  agent.Learn(&report);
  return report;
}

nlohmann::json Agent::Checkpoint(bool include_buffers) const {
  nlohmann::json j{{"kind", AgentKindName(kind_)},
                   {"config", AgentConfigToJson(cfg_)},
                   {"epsilon", schedules_.epsilon},
                   {"alpha_h", schedules_.alpha_h},
                   {"total_steps", total_steps_},
                   {"q_updates", q_updates_},
                   {"q", NetworkToJson(qnet_)},
                   {"q_target", NetworkToJson(target_qnet_)},
                   {"h", NetworkToJson(hnet_)}};
  if (include_buffers) {
    auto vec = [](const Vector& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    nlohmann::json replay = nlohmann::json::array();
    for (int i = 0; i < replay_.size(); ++i) {
      const Transition& t = replay_.at(i);
      replay.push_back({{"s", vec(t.state)}, {"a", t.action}, {"r", t.reward},
                        {"s2", vec(t.next_state)}, {"done", t.done}});
    }
    nlohmann::json global = nlohmann::json::array();
    for (int i = 0; i < feedback_replay_.size(); ++i) {
      const FeedbackTriple& t = feedback_replay_.at(i);
      global.push_back({{"s", vec(t.state)}, {"a", t.action}, {"f", t.feedback},
                        {"w", t.weight}});
    }
    j["replay"] = std::move(replay);
    j["feedback_replay"] = std::move(global);
  }
  return j;
}

}  // namespace hitl
