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

#ifndef HITL_MAZE_H_
#define HITL_MAZE_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hitl/environment.h"

namespace hitl {

inline constexpr int kMazeSize = 8;
inline constexpr int kMazeStartDistance = 5;
inline constexpr double kMazeWallProbability = 0.2;
inline constexpr int kMazeGenerationRetries = 10000;
inline constexpr double kMazeStepReward = -0.01;
inline constexpr double kMazeGoalReward = 1.0;

enum class MazeObservation { kMdp, kPomdp };

std::string MazeObservationName(MazeObservation mode);
MazeObservation ParseMazeObservation(const std::string& name);

struct MazeLayout {
  std::vector<bool> walls;  // row-major, kMazeSize * kMazeSize
  Cell start;
  Cell goal;
  uint64_t seed = 0;

  bool InBounds(Cell c) const {
    return c.col >= 0 && c.col < kMazeSize && c.row >= 0 && c.row < kMazeSize;
  }
  bool IsWall(Cell c) const { return walls[c.row * kMazeSize + c.col]; }
  // Out-of-bounds cells count as blocked.
  bool IsBlocked(Cell c) const { return !InBounds(c) || IsWall(c); }

  bool operator==(const MazeLayout&) const = default;
};

// Layout with no walls, for tests and hand-built scenarios.
MazeLayout EmptyMazeLayout(Cell start, Cell goal);

// Every interior cell is a wall with probability 0.2 (the outer ring stays
// open); goal uniform among spaces; start uniform among spaces at Manhattan
// distance 5 from the goal; resampled until the start reaches the goal.
// Throws GenerationError after kMazeGenerationRetries failed attempts.
MazeLayout GenerateMaze(uint64_t layout_seed);

// Length of the shortest wall-avoiding path, or -1 when unreachable.
int ShortestPathLength(const MazeLayout& layout, Cell from, Cell to);

struct MazeState {
  Cell agent;
  int steps = 0;
  bool done = false;
};

MazeState MazeReset(const MazeLayout& layout);
StepOutcome MazeStep(const MazeLayout& layout, MazeState* state, int action,
                     MazeObservation mode);
Vector MazeObserve(const MazeLayout& layout, const MazeState& state,
                   MazeObservation mode);
int MazeObservationSize(MazeObservation mode);
std::string RenderMaze(const MazeLayout& layout, const MazeState& state);

nlohmann::json MazeLayoutToJson(const MazeLayout& layout);
MazeLayout MazeLayoutFromJson(const nlohmann::json& j);

class MazeEnv : public Environment {
 public:
  MazeEnv(MazeLayout layout, MazeObservation mode);

  EnvKind kind() const override { return EnvKind::kMaze; }
  int num_actions() const override { return 4; }
  int observation_size() const override { return MazeObservationSize(mode_); }
  Vector Reset() override;
  StepOutcome Step(int action) override;
  Vector Observe() const override { return MazeObserve(layout_, state_, mode_); }
  bool done() const override { return state_.done; }
  int steps() const override { return state_.steps; }
  Cell agent_cell() const override { return state_.agent; }
  std::string Render() const override { return RenderMaze(layout_, state_); }

  const MazeLayout& layout() const { return layout_; }
  const MazeState& state() const { return state_; }

 private:
  MazeLayout layout_;
  MazeObservation mode_;
  MazeState state_;
};

}  // namespace hitl

#endif  // HITL_MAZE_H_
