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

#ifndef HITL_ENVIRONMENT_H_
#define HITL_ENVIRONMENT_H_

#include <cstdlib>
#include <string>

#include "hitl/nn.h"

namespace hitl {

enum class EnvKind { kMaze, kTaxi };

std::string EnvKindName(EnvKind kind);
EnvKind ParseEnvKind(const std::string& name);

// Shared action ids. Maze uses the first four, Taxi all six.
enum Action : int {
  kNorth = 0,
  kEast = 1,
  kSouth = 2,
  kWest = 3,
  kPickup = 4,
  kDrop = 5,
};

inline constexpr int kMaxEpisodeSteps = 1000;

struct Cell {
  int col = 0;
  int row = 0;
  bool operator==(const Cell&) const = default;
};

inline int ManhattanDistance(Cell a, Cell b) {
  return std::abs(a.col - b.col) + std::abs(a.row - b.row);
}

// Cell reached by a compass move, ignoring walls and bounds.
Cell Neighbor(Cell c, int action);

enum class TaskEvent { kMove, kCorrectPickup, kWrongPickup, kCorrectDrop, kWrongDrop };

// Side information consumed by the simulated observer. Distances are pure
// Manhattan distances to the current target, ignoring walls.
struct StepInfo {
  int distance_before = 0;
  int distance_after = 0;
  TaskEvent event = TaskEvent::kMove;
};

struct StepOutcome {
  Vector observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Episodic environment as seen by agents and the harness.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvKind kind() const = 0;
  virtual int num_actions() const = 0;
  virtual int observation_size() const = 0;

  // Starts a new episode and returns its first observation.
  virtual Vector Reset() = 0;
  // Throws ContractViolation once the episode is done.
  virtual StepOutcome Step(int action) = 0;
  virtual Vector Observe() const = 0;
  virtual bool done() const = 0;
  virtual int steps() const = 0;
  // Agent position, for renderers and live snapshots.
  virtual Cell agent_cell() const = 0;
  virtual std::string Render() const = 0;
};

}  // namespace hitl

#endif  // HITL_ENVIRONMENT_H_
