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

#include "hitl/observer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hitl/errors.h"

namespace hitl {
namespace {

void ValidateDistribution(const std::vector<double>& p, const char* name) {
  if (p.empty()) throw ConfigError(std::string(name) + " must not be empty");
  for (double v : p) {
    if (!(v >= 0.0)) throw ConfigError(std::string(name) + " has a negative entry");
  }
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError(std::string(name) + " must sum to 1");
  }
}

void ValidateProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

void ObserverConfig::Validate() const {
  ValidateDistribution(p_delay_true, "p_delay_true");
  ValidateDistribution(p_delay_assumed, "p_delay_assumed");
  ValidateProbability(p_feedback, "p_feedback");
  ValidateProbability(p_flip, "p_flip");
  if (t_stop < 0) throw ConfigError("t_stop must be nonnegative");
}

nlohmann::json ObserverConfigToJson(const ObserverConfig& cfg) {
  nlohmann::json j{{"p_delay_true", cfg.p_delay_true},
                   {"p_delay_assumed", cfg.p_delay_assumed},
                   {"p_feedback", cfg.p_feedback},
                   {"stop_unit", cfg.stop_unit == StopUnit::kEpisodes ? "episodes" : "steps"},
                   {"p_flip", cfg.p_flip}};
  j["t_stop"] = cfg.t_stop == kNeverStop ? nlohmann::json(nullptr)
                                         : nlohmann::json(cfg.t_stop);
  return j;
}

ObserverConfig ObserverConfigFromJson(const nlohmann::json& j, ObserverConfig cfg) {
  for (const auto& [key, value] : j.items()) {
    if (key == "p_delay_true") {
      cfg.p_delay_true = value.get<std::vector<double>>();
    } else if (key == "p_delay_assumed") {
      cfg.p_delay_assumed = value.get<std::vector<double>>();
    } else if (key == "p_feedback") {
      cfg.p_feedback = value.get<double>();
    } else if (key == "t_stop") {
      cfg.t_stop = value.is_null() ? kNeverStop : value.get<int64_t>();
    } else if (key == "stop_unit") {
      const auto unit = value.get<std::string>();
      if (unit == "episodes") {
        cfg.stop_unit = StopUnit::kEpisodes;
      } else if (unit == "steps") {
        cfg.stop_unit = StopUnit::kSteps;
      } else {
        throw ConfigError("stop_unit must be 'episodes' or 'steps'");
      }
    } else if (key == "p_flip") {
      cfg.p_flip = value.get<double>();
    } else {
      throw ConfigError("unknown observer key '" + key + "'");
    }
  }
  cfg.Validate();
  return cfg;
}

int Judge(const StepInfo& info, EnvKind kind) {
  if (kind == EnvKind::kTaxi) {
    switch (info.event) {
      case TaskEvent::kCorrectPickup:
      case TaskEvent::kCorrectDrop:
        return +1;
      case TaskEvent::kWrongPickup:
      case TaskEvent::kWrongDrop:
        return -1;
      case TaskEvent::kMove:
        break;
    }
  }
  return info.distance_after < info.distance_before ? +1 : -1;
}

bool FeedbackStopped(const ObserverConfig& cfg, int episode, int64_t global_step) {
  const int64_t t = cfg.stop_unit == StopUnit::kEpisodes ? episode : global_step;
  return t >= cfg.t_stop;
}

std::optional<FeedbackEvent> Emit(int polarity, int step, int episode,
                                  const ObserverConfig& cfg, Rng& rng,
                                  int64_t global_step) {
  if (polarity != 1 && polarity != -1) {
    throw ContractViolation("feedback polarity must be +1 or -1");
  }
  if (FeedbackStopped(cfg, episode, global_step)) return std::nullopt;
  if (!(Uniform01(rng) < cfg.p_feedback)) return std::nullopt;
  if (Uniform01(rng) < cfg.p_flip) polarity = -polarity;
  std::discrete_distribution<int> delay(cfg.p_delay_true.begin(),
                                        cfg.p_delay_true.end());
  const int d = delay(rng);
  return FeedbackEvent{polarity, step, step + d, episode, 0};
}

std::vector<FeedbackEvent> PendingFeedback::Poll(int current_step) {
  auto due_end = std::stable_partition(
      pending_.begin(), pending_.end(),
      [current_step](const FeedbackEvent& e) { return e.arrival_step <= current_step; });
  std::vector<FeedbackEvent> due(pending_.begin(), due_end);
  pending_.erase(pending_.begin(), due_end);
  std::sort(due.begin(), due.end(), [](const FeedbackEvent& a, const FeedbackEvent& b) {
    if (a.arrival_step != b.arrival_step) return a.arrival_step < b.arrival_step;
    return a.sequence < b.sequence;
  });
  return due;
}

int64_t PendingFeedback::Clear() {
  const auto n = static_cast<int64_t>(pending_.size());
  pending_.clear();
  return n;
}

SimulatedObserver::SimulatedObserver(ObserverConfig cfg, EnvKind env_kind,
                                     uint64_t seed)
    : cfg_(std::move(cfg)), env_kind_(env_kind), rng_(seed) {
  cfg_.Validate();
}

void SimulatedObserver::Notify(const TransitionView& t) {
  ++counts_.emitted;
  auto event = Emit(Judge(t.info, env_kind_), t.step, t.episode, cfg_, rng_,
                    global_step_);
  ++global_step_;
  if (!event) {
    ++counts_.dropped;
    return;
  }
  event->sequence = next_sequence_++;
  pending_.Push(*event);
}

std::vector<FeedbackEvent> SimulatedObserver::Poll(int current_step, int) {
  auto due = pending_.Poll(current_step);
  counts_.delivered += static_cast<int64_t>(due.size());
  return due;
}

void SimulatedObserver::EndEpisode() { counts_.discarded += pending_.Clear(); }

void LiveFeedbackSource::Submit(int polarity) {
  if (polarity != 1 && polarity != -1) {
    throw ContractViolation("feedback polarity must be +1 or -1");
  }
  std::lock_guard<std::mutex> lock(mu_);
  queue_.push_back(polarity);
  ++counts_.emitted;
}

std::vector<FeedbackEvent> LiveFeedbackSource::Poll(int current_step, int episode) {
  std::deque<int> taken;
  {
    std::lock_guard<std::mutex> lock(mu_);
    taken.swap(queue_);
    counts_.delivered += static_cast<int64_t>(taken.size());
  }
  std::vector<FeedbackEvent> due;
  due.reserve(taken.size());
  for (int polarity : taken) {
    due.push_back({polarity, current_step, current_step, episode, next_sequence_++});
  }
  return due;
}

FeedbackCounts LiveFeedbackSource::counts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return counts_;
}

size_t LiveFeedbackSource::queued() const {
  std::lock_guard<std::mutex> lock(mu_);
  return queue_.size();
}

}  // namespace hitl
