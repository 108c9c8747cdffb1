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

#include "hitl/maze.h"

#include <array>
#include <deque>
#include <sstream>

#include "hitl/errors.h"
#include "hitl/rng.h"

namespace hitl {

std::string EnvKindName(EnvKind kind) {
  return kind == EnvKind::kMaze ? "maze" : "taxi";
}

EnvKind ParseEnvKind(const std::string& name) {
  if (name == "maze") return EnvKind::kMaze;
  if (name == "taxi") return EnvKind::kTaxi;
  throw ConfigError("unknown environment kind '" + name + "'");
}

Cell Neighbor(Cell c, int action) {
  switch (action) {
    case kNorth: return {c.col, c.row - 1};
    case kEast: return {c.col + 1, c.row};
    case kSouth: return {c.col, c.row + 1};
    case kWest: return {c.col - 1, c.row};
    default: return c;
  }
}

std::string MazeObservationName(MazeObservation mode) {
  return mode == MazeObservation::kMdp ? "mdp" : "pomdp";
}

MazeObservation ParseMazeObservation(const std::string& name) {
  if (name == "mdp") return MazeObservation::kMdp;
  if (name == "pomdp") return MazeObservation::kPomdp;
  throw ConfigError("unknown maze observation mode '" + name + "'");
}

MazeLayout EmptyMazeLayout(Cell start, Cell goal) {
  MazeLayout layout;
  layout.walls.assign(kMazeSize * kMazeSize, false);
  layout.start = start;
  layout.goal = goal;
  return layout;
}

int ShortestPathLength(const MazeLayout& layout, Cell from, Cell to) {
  if (layout.IsBlocked(from) || layout.IsBlocked(to)) return -1;
  std::vector<int> dist(kMazeSize * kMazeSize, -1);
  std::deque<Cell> frontier{from};
  dist[from.row * kMazeSize + from.col] = 0;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    const int d = dist[c.row * kMazeSize + c.col];
    if (c == to) return d;
    for (int a = kNorth; a <= kWest; ++a) {
      const Cell n = Neighbor(c, a);
      if (layout.IsBlocked(n) || dist[n.row * kMazeSize + n.col] >= 0) continue;
      dist[n.row * kMazeSize + n.col] = d + 1;
      frontier.push_back(n);
    }
  }
  return -1;
}

MazeLayout GenerateMaze(uint64_t layout_seed) {
  Rng rng(layout_seed);
  MazeLayout layout;
  layout.seed = layout_seed;
  for (int attempt = 0; attempt < kMazeGenerationRetries; ++attempt) {
    layout.walls.assign(kMazeSize * kMazeSize, false);
    for (int row = 1; row < kMazeSize - 1; ++row) {
      for (int col = 1; col < kMazeSize - 1; ++col) {
        layout.walls[row * kMazeSize + col] =
            Uniform01(rng) < kMazeWallProbability;
      }
    }
    std::vector<Cell> spaces;
    for (int row = 0; row < kMazeSize; ++row) {
      for (int col = 0; col < kMazeSize; ++col) {
        if (!layout.IsWall({col, row})) spaces.push_back({col, row});
      }
    }
    layout.goal = spaces[UniformIndex(rng, static_cast<int>(spaces.size()))];
    std::vector<Cell> starts;
    for (const Cell& c : spaces) {
      if (ManhattanDistance(c, layout.goal) == kMazeStartDistance) starts.push_back(c);
    }
    if (starts.empty()) continue;
    layout.start = starts[UniformIndex(rng, static_cast<int>(starts.size()))];
    if (ShortestPathLength(layout, layout.start, layout.goal) >= 0) return layout;
  }
  throw GenerationError("no solvable maze after " +
                        std::to_string(kMazeGenerationRetries) +
                        " attempts for seed " + std::to_string(layout_seed));
}

MazeState MazeReset(const MazeLayout& layout) {
  return MazeState{layout.start, 0, false};
}

int MazeObservationSize(MazeObservation mode) {
  return mode == MazeObservation::kMdp ? kMazeSize * kMazeSize : 8;
}

Vector MazeObserve(const MazeLayout& layout, const MazeState& state,
                   MazeObservation mode) {
  if (mode == MazeObservation::kMdp) {
    Vector obs = Vector::Zero(kMazeSize * kMazeSize);
    obs[state.agent.row * kMazeSize + state.agent.col] = 1.0;
    return obs;
  }
  // NW, N, NE, W, E, SW, S, SE
  static constexpr std::array<std::array<int, 2>, 8> kOffsets{{
      {-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
  Vector obs(8);
  for (int i = 0; i < 8; ++i) {
    const Cell c{state.agent.col + kOffsets[i][0], state.agent.row + kOffsets[i][1]};
    obs[i] = layout.IsBlocked(c) ? 1.0 : 0.0;
  }
  return obs;
}

StepOutcome MazeStep(const MazeLayout& layout, MazeState* state, int action,
                     MazeObservation mode) {
  if (state->done) throw ContractViolation("maze step after episode end");
  if (action < kNorth || action > kWest) {
    throw ContractViolation("invalid maze action " + std::to_string(action));
  }
  StepOutcome out;
  out.info.distance_before = ManhattanDistance(state->agent, layout.goal);
  const Cell next = Neighbor(state->agent, action);
  if (!layout.IsBlocked(next)) state->agent = next;
  ++state->steps;
  out.reward = kMazeStepReward;
  if (state->agent == layout.goal) {
    out.reward += kMazeGoalReward;
    state->done = true;
  }
  if (state->steps >= kMaxEpisodeSteps) state->done = true;
  out.done = state->done;
  out.info.distance_after = ManhattanDistance(state->agent, layout.goal);
  out.observation = MazeObserve(layout, *state, mode);
  return out;
}

std::string RenderMaze(const MazeLayout& layout, const MazeState& state) {
  std::ostringstream os;
  for (int row = 0; row < kMazeSize; ++row) {
    for (int col = 0; col < kMazeSize; ++col) {
      const Cell c{col, row};
      if (c == state.agent) {
        os << 'A';
      } else if (c == layout.goal) {
        os << 'G';
      } else if (layout.IsWall(c)) {
        os << '#';
      } else if (c == layout.start) {
        os << 'S';
      } else {
        os << '.';
      }
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json MazeLayoutToJson(const MazeLayout& layout) {
  nlohmann::json grid = nlohmann::json::array();
  for (int row = 0; row < kMazeSize; ++row) {
    std::string line;
    for (int col = 0; col < kMazeSize; ++col) {
      line += layout.IsWall({col, row}) ? '#' : '.';
    }
    grid.push_back(line);
  }
  return {{"grid", grid},
          {"start", {layout.start.col, layout.start.row}},
          {"goal", {layout.goal.col, layout.goal.row}},
          {"seed", layout.seed}};
}

MazeLayout MazeLayoutFromJson(const nlohmann::json& j) {
  MazeLayout layout;
  const auto& grid = j.at("grid");
  if (!grid.is_array() || grid.size() != kMazeSize) {
    throw ConfigError("maze grid must have 8 rows");
  }
  layout.walls.assign(kMazeSize * kMazeSize, false);
  for (int row = 0; row < kMazeSize; ++row) {
    const std::string line = grid[row].get<std::string>();
    if (line.size() != kMazeSize) throw ConfigError("maze grid rows must have 8 cells");
    for (int col = 0; col < kMazeSize; ++col) {
      if (line[col] != '#' && line[col] != '.') {
        throw ConfigError(std::string("bad maze cell '") + line[col] + "'");
      }
      layout.walls[row * kMazeSize + col] = line[col] == '#';
    }
  }
  layout.start = {j.at("start")[0].get<int>(), j.at("start")[1].get<int>()};
  layout.goal = {j.at("goal")[0].get<int>(), j.at("goal")[1].get<int>()};
  layout.seed = j.value("seed", uint64_t{0});
  if (layout.IsBlocked(layout.start) || layout.IsBlocked(layout.goal)) {
    throw ConfigError("maze start and goal must be open cells");
  }
  return layout;
}

MazeEnv::MazeEnv(MazeLayout layout, MazeObservation mode)
    : layout_(std::move(layout)), mode_(mode), state_(MazeReset(layout_)) {
  if (layout_.walls.size() != kMazeSize * kMazeSize) {
    throw ConfigError("maze layout must be 8x8");
  }
}

Vector MazeEnv::Reset() {
  state_ = MazeReset(layout_);
  return Observe();
}

StepOutcome MazeEnv::Step(int action) {
  return MazeStep(layout_, &state_, action, mode_);
}

}  // namespace hitl
