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

#ifndef HITL_TAXI_H_
#define HITL_TAXI_H_

#include <array>
#include <cstdint>
#include <string>

#include "hitl/environment.h"
#include "hitl/rng.h"

namespace hitl {

// Dietterich's 5x5 taxi domain:
//
//   +---------+
//   |R: | : :G|
//   | : | : : |
//   | : : : : |
//   | | : | : |
//   |Y| : |B: |
//   +---------+
inline constexpr int kTaxiSize = 5;
inline constexpr int kNumLandmarks = 4;
inline constexpr int kInTaxi = kNumLandmarks;
inline constexpr double kTaxiStepReward = -1.0;
inline constexpr double kTaxiDeliverReward = 20.0;
inline constexpr double kTaxiIllegalReward = -10.0;

// Landmark order R, G, B, Y.
inline constexpr std::array<Cell, kNumLandmarks> kTaxiLandmarks{{
    {0, 0}, {4, 0}, {3, 4}, {0, 4}}};

enum class TaxiObservation { kCompact, kExtended };

std::string TaxiObservationName(TaxiObservation mode);
TaxiObservation ParseTaxiObservation(const std::string& name);

struct TaxiState {
  Cell taxi;
  int passenger = 0;    // landmark index, or kInTaxi
  int destination = 1;  // landmark index
  int steps = 0;
  bool done = false;

  bool operator==(const TaxiState&) const = default;
};

// True when a compass move from `from` leaves the grid or crosses a wall.
bool TaxiMoveBlocked(Cell from, int action);

TaxiState TaxiReset(Rng& rng);
TaxiState TaxiReset(uint64_t seed);
StepOutcome TaxiStep(TaxiState* state, int action, TaxiObservation mode);
Vector TaxiObserve(const TaxiState& state, TaxiObservation mode);
int TaxiObservationSize(TaxiObservation mode);
std::string RenderTaxi(const TaxiState& state);

class TaxiEnv : public Environment {
 public:
  TaxiEnv(uint64_t seed, TaxiObservation mode);

  EnvKind kind() const override { return EnvKind::kTaxi; }
  int num_actions() const override { return 6; }
  int observation_size() const override { return TaxiObservationSize(mode_); }
  Vector Reset() override;
  StepOutcome Step(int action) override;
  Vector Observe() const override { return TaxiObserve(state_, mode_); }
  bool done() const override { return state_.done; }
  int steps() const override { return state_.steps; }
  Cell agent_cell() const override { return state_.taxi; }
  std::string Render() const override { return RenderTaxi(state_); }

  const TaxiState& state() const { return state_; }

 private:
  Rng rng_;
  TaxiObservation mode_;
  TaxiState state_;
};

}  // namespace hitl

#endif  // HITL_TAXI_H_
