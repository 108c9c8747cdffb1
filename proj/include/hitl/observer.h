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

#ifndef HITL_OBSERVER_H_
#define HITL_OBSERVER_H_

#include <cstdint>
#include <deque>
#include <limits>
#include <mutex>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hitl/environment.h"
#include "hitl/rng.h"

namespace hitl {

// Unit in which t_stop is measured.
enum class StopUnit { kEpisodes, kSteps };

inline constexpr int64_t kNeverStop = std::numeric_limits<int64_t>::max();

// Parameters of the simulated human. Delay vectors are indexed by delay in
// steps: p_delay_true[d] is the probability that feedback arrives d steps
// after the judged transition.
struct ObserverConfig {
  std::vector<double> p_delay_true{0.3, 0.6, 0.1};
  // What the learning agent believes; sizes its credit window.
  std::vector<double> p_delay_assumed{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double p_feedback = 1.0;
  int64_t t_stop = kNeverStop;
  StopUnit stop_unit = StopUnit::kEpisodes;
  double p_flip = 0.0;

  // Throws ConfigError on bad probabilities.
  void Validate() const;
  bool operator==(const ObserverConfig&) const = default;
};

nlohmann::json ObserverConfigToJson(const ObserverConfig& cfg);
// Missing keys keep their defaults. "t_stop": null means never.
ObserverConfig ObserverConfigFromJson(const nlohmann::json& j,
                                      ObserverConfig base = {});

struct FeedbackEvent {
  int polarity = 1;  // exactly -1 or +1
  int generated_at_step = 0;
  int arrival_step = 0;
  int episode = 0;
  int64_t sequence = 0;  // generation order, breaks arrival ties

  bool operator==(const FeedbackEvent&) const = default;
};

// +1 iff the transition made progress toward the current target. Taxi
// pickup/drop actions are judged on correctness.
int Judge(const StepInfo& info, EnvKind kind);

bool FeedbackStopped(const ObserverConfig& cfg, int episode, int64_t global_step);

// Applies drop, stop, flip and delay to one judgment, in that order.
// `global_step` only matters for StopUnit::kSteps.
std::optional<FeedbackEvent> Emit(int polarity, int step, int episode,
                                  const ObserverConfig& cfg, Rng& rng,
                                  int64_t global_step = 0);

// Events waiting for their arrival step.
class PendingFeedback {
 public:
  void Push(FeedbackEvent event) { pending_.push_back(event); }
  // Removes and returns every event with arrival_step <= current_step,
  // ordered by arrival step then generation order.
  std::vector<FeedbackEvent> Poll(int current_step);
  // Drops everything; returns how many events were discarded.
  int64_t Clear();
  size_t size() const { return pending_.size(); }
  bool empty() const { return pending_.empty(); }

 private:
  std::vector<FeedbackEvent> pending_;
};

struct FeedbackCounts {
  int64_t emitted = 0;    // judgments made
  int64_t delivered = 0;
  int64_t dropped = 0;    // lost to stochasticity or after t_stop
  int64_t discarded = 0;  // still in flight when the episode ended

  FeedbackCounts operator-(const FeedbackCounts& o) const {
    return {emitted - o.emitted, delivered - o.delivered, dropped - o.dropped,
            discarded - o.discarded};
  }
  bool operator==(const FeedbackCounts&) const = default;
};

struct TransitionView {
  const Vector& state;
  int action;
  const StepInfo& info;
  int step;
  int episode;
};

// Anything that supplies human feedback: the simulated observer or a live
// person. Notified of every transition, polled once per step.
class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  virtual void Notify(const TransitionView& transition) = 0;
  // Due events, each delivered exactly once, in arrival order.
  virtual std::vector<FeedbackEvent> Poll(int current_step, int episode) = 0;
  // Called once after each episode's last Poll.
  virtual void EndEpisode() = 0;
  virtual FeedbackCounts counts() const = 0;
};

class SimulatedObserver : public FeedbackSource {
 public:
  SimulatedObserver(ObserverConfig cfg, EnvKind env_kind, uint64_t seed);

  void Notify(const TransitionView& transition) override;
  std::vector<FeedbackEvent> Poll(int current_step, int episode) override;
  void EndEpisode() override;
  FeedbackCounts counts() const override { return counts_; }

  const ObserverConfig& config() const { return cfg_; }
  const PendingFeedback& pending() const { return pending_; }

 private:
  ObserverConfig cfg_;
  EnvKind env_kind_;
  Rng rng_;
  PendingFeedback pending_;
  FeedbackCounts counts_;
  int64_t global_step_ = 0;
  int64_t next_sequence_ = 0;
};

// Feedback pushed asynchronously by a live person. One producer thread
// submits, the agent loop polls; each submission arrives at the first poll
// after it was made.
class LiveFeedbackSource : public FeedbackSource {
 public:
  void Submit(int polarity);

  void Notify(const TransitionView&) override {}
  std::vector<FeedbackEvent> Poll(int current_step, int episode) override;
  void EndEpisode() override {}
  FeedbackCounts counts() const override;
  size_t queued() const;

 private:
  mutable std::mutex mu_;
  std::deque<int> queue_;
  FeedbackCounts counts_;
  int64_t next_sequence_ = 0;
};

}  // namespace hitl

#endif  // HITL_OBSERVER_H_
