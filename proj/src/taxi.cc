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

#include "hitl/taxi.h"

#include <sstream>

#include "hitl/errors.h"

namespace hitl {
namespace {

// Vertical wall segments, as (row, col) of the cell on the west side.
constexpr std::array<std::array<int, 2>, 6> kWallWestOf{{
    {0, 1}, {1, 1}, {3, 0}, {4, 0}, {3, 2}, {4, 2}}};

bool WallEastOf(int row, int col) {
  for (const auto& w : kWallWestOf) {
    if (w[0] == row && w[1] == col) return true;
  }
  return false;
}

Cell TargetOf(const TaxiState& s) {
  return s.passenger == kInTaxi ? kTaxiLandmarks[s.destination]
                                : kTaxiLandmarks[s.passenger];
}

}  // namespace

std::string TaxiObservationName(TaxiObservation mode) {
  return mode == TaxiObservation::kCompact ? "compact" : "extended";
}

TaxiObservation ParseTaxiObservation(const std::string& name) {
  if (name == "compact") return TaxiObservation::kCompact;
  if (name == "extended") return TaxiObservation::kExtended;
  throw ConfigError("unknown taxi observation mode '" + name + "'");
}

bool TaxiMoveBlocked(Cell from, int action) {
  const Cell to = Neighbor(from, action);
  if (to.col < 0 || to.col >= kTaxiSize || to.row < 0 || to.row >= kTaxiSize) {
    return true;
  }
  if (action == kEast) return WallEastOf(from.row, from.col);
  if (action == kWest) return WallEastOf(from.row, to.col);
  return false;
}

TaxiState TaxiReset(Rng& rng) {
  TaxiState s;
  const int cell = UniformIndex(rng, kTaxiSize * kTaxiSize);
  s.taxi = {cell % kTaxiSize, cell / kTaxiSize};
  s.passenger = UniformIndex(rng, kNumLandmarks);
  const int offset = 1 + UniformIndex(rng, kNumLandmarks - 1);
  s.destination = (s.passenger + offset) % kNumLandmarks;
  return s;
}

TaxiState TaxiReset(uint64_t seed) {
  Rng rng(seed);
  return TaxiReset(rng);
}

int TaxiObservationSize(TaxiObservation mode) {
  const int literal = kTaxiSize * kTaxiSize + 1;
  return mode == TaxiObservation::kCompact
             ? literal
             : literal + kNumLandmarks + 1 + kNumLandmarks;
}

Vector TaxiObserve(const TaxiState& s, TaxiObservation mode) {
  Vector obs = Vector::Zero(TaxiObservationSize(mode));
  obs[s.taxi.row * kTaxiSize + s.taxi.col] = 1.0;
  const int bit = kTaxiSize * kTaxiSize;
  obs[bit] = s.passenger == kInTaxi ? 1.0 : 0.0;
  if (mode == TaxiObservation::kExtended) {
    obs[bit + 1 + s.passenger] = 1.0;
    obs[bit + 1 + kNumLandmarks + 1 + s.destination] = 1.0;
  }
  return obs;
}

StepOutcome TaxiStep(TaxiState* s, int action, TaxiObservation mode) {
  if (s->done) throw ContractViolation("taxi step after episode end");
  if (action < kNorth || action > kDrop) {
    throw ContractViolation("invalid taxi action " + std::to_string(action));
  }
  StepOutcome out;
  out.info.distance_before = ManhattanDistance(s->taxi, TargetOf(*s));
  out.reward = kTaxiStepReward;
  if (action == kPickup) {
    if (s->passenger != kInTaxi && s->taxi == kTaxiLandmarks[s->passenger]) {
      s->passenger = kInTaxi;
      out.info.event = TaskEvent::kCorrectPickup;
    } else {
      out.reward += kTaxiIllegalReward;
      out.info.event = TaskEvent::kWrongPickup;
    }
  } else if (action == kDrop) {
    if (s->passenger == kInTaxi && s->taxi == kTaxiLandmarks[s->destination]) {
      s->passenger = s->destination;
      out.reward += kTaxiDeliverReward;
      s->done = true;
      out.info.event = TaskEvent::kCorrectDrop;
    } else {
      out.reward += kTaxiIllegalReward;
      out.info.event = TaskEvent::kWrongDrop;
    }
  } else if (!TaxiMoveBlocked(s->taxi, action)) {
    s->taxi = Neighbor(s->taxi, action);
  }
  ++s->steps;
  if (s->steps >= kMaxEpisodeSteps) s->done = true;
  out.done = s->done;
  out.info.distance_after = ManhattanDistance(s->taxi, TargetOf(*s));
  out.observation = TaxiObserve(*s, mode);
  return out;
}

std::string RenderTaxi(const TaxiState& s) {
  static constexpr char kNames[] = {'R', 'G', 'B', 'Y'};
  std::ostringstream os;
  os << "+---------+\n";
  for (int row = 0; row < kTaxiSize; ++row) {
    os << '|';
    for (int col = 0; col < kTaxiSize; ++col) {
      const Cell c{col, row};
      char ch = ' ';
      for (int l = 0; l < kNumLandmarks; ++l) {
        if (kTaxiLandmarks[l] == c) ch = kNames[l];
      }
      if (c == s.taxi) ch = s.passenger == kInTaxi ? 'T' : 't';
      os << ch;
      if (col + 1 < kTaxiSize) os << (WallEastOf(row, col) ? '|' : ':');
    }
    os << "|\n";
  }
  os << "+---------+\n";
  os << "passenger: "
     << (s.passenger == kInTaxi ? std::string("in taxi")
                                : std::string(1, kNames[s.passenger]))
     << "  destination: " << kNames[s.destination] << '\n';
  return os.str();
}

TaxiEnv::TaxiEnv(uint64_t seed, TaxiObservation mode)
    : rng_(seed), mode_(mode), state_(TaxiReset(rng_)) {}

Vector TaxiEnv::Reset() {
  state_ = TaxiReset(rng_);
  return Observe();
}

StepOutcome TaxiEnv::Step(int action) {
  return TaxiStep(&state_, action, mode_);
}

}  // namespace hitl
