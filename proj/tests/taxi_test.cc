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

#include <array>

#include "gtest/gtest.h"
#include "hitl/errors.h"
#include "hitl/observer.h"

namespace hitl {
namespace {

// Dietterich's map, read character by character: a '|' between two cells in
// a row blocks east/west movement across it.
constexpr std::array<const char*, 5> kMap{{
    "|R: | : :G|",
    "| : | : : |",
    "| : : : : |",
    "| | : | : |",
    "|Y| : |B: |",
}};

bool MapBlocksEast(int row, int col) {
  if (col == kTaxiSize - 1) return true;
  return kMap[row][2 * col + 2] == '|';
}

TaxiState At(Cell taxi, int passenger, int destination) {
  TaxiState s;
  s.taxi = taxi;
  s.passenger = passenger;
  s.destination = destination;
  return s;
}

TEST(TaxiMapTest, WallsMatchTheDrawnMap) {
  for (int row = 0; row < kTaxiSize; ++row) {
    for (int col = 0; col < kTaxiSize; ++col) {
      EXPECT_EQ(TaxiMoveBlocked({col, row}, kEast), MapBlocksEast(row, col))
          << row << "," << col;
      const bool west = col == 0 || MapBlocksEast(row, col - 1);
      EXPECT_EQ(TaxiMoveBlocked({col, row}, kWest), west) << row << "," << col;
      EXPECT_EQ(TaxiMoveBlocked({col, row}, kNorth), row == 0);
      EXPECT_EQ(TaxiMoveBlocked({col, row}, kSouth), row == kTaxiSize - 1);
    }
  }
}

TEST(TaxiMapTest, LandmarksMatchTheDrawnMap) {
  const char names[] = {'R', 'G', 'B', 'Y'};
  for (int l = 0; l < kNumLandmarks; ++l) {
    const Cell c = kTaxiLandmarks[l];
    EXPECT_EQ(kMap[c.row][2 * c.col + 1], names[l]);
  }
}

TEST(TaxiResetTest, PassengerAndDestinationDiffer) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const TaxiState s = TaxiReset(rng);
    ASSERT_NE(s.passenger, s.destination);
    ASSERT_GE(s.passenger, 0);
    ASSERT_LT(s.passenger, kNumLandmarks);
    EXPECT_FALSE(s.done);
    EXPECT_EQ(s.steps, 0);
  }
}

TEST(TaxiResetTest, LandmarksUniform) {
  Rng rng(11);
  const int n = 20000;
  std::array<int, kNumLandmarks> passenger{};
  std::array<int, kNumLandmarks> destination{};
  std::array<int, kTaxiSize * kTaxiSize> cells{};
  for (int i = 0; i < n; ++i) {
    const TaxiState s = TaxiReset(rng);
    ++passenger[s.passenger];
    ++destination[s.destination];
    ++cells[s.taxi.row * kTaxiSize + s.taxi.col];
  }
  for (int l = 0; l < kNumLandmarks; ++l) {
    EXPECT_NEAR(passenger[l] / static_cast<double>(n), 0.25, 0.02);
    EXPECT_NEAR(destination[l] / static_cast<double>(n), 0.25, 0.02);
  }
  for (int c : cells) EXPECT_NEAR(c / static_cast<double>(n), 0.04, 0.01);
}

TEST(TaxiResetTest, SeededResetIsDeterministic) {
  const TaxiState a = TaxiReset(uint64_t{5});
  const TaxiState b = TaxiReset(uint64_t{5});
  EXPECT_EQ(a.taxi, b.taxi);
  EXPECT_EQ(a.passenger, b.passenger);
  EXPECT_EQ(a.destination, b.destination);
}

TEST(TaxiStepTest, FullDelivery) {
  // Passenger at R, destination G.
  TaxiState s = At({0, 0}, 0, 1);
  StepOutcome out = TaxiStep(&s, kPickup, TaxiObservation::kExtended);
  EXPECT_EQ(out.info.event, TaskEvent::kCorrectPickup);
  EXPECT_DOUBLE_EQ(out.reward, -1.0);
  EXPECT_EQ(s.passenger, kInTaxi);
  EXPECT_EQ(Judge(out.info, EnvKind::kTaxi), 1);
  // Around the wall east of (0,1): down to row 2, east to col 4, up.
  for (int a : {kSouth, kSouth, kEast, kEast, kEast, kEast, kNorth, kNorth}) {
    out = TaxiStep(&s, a, TaxiObservation::kExtended);
    EXPECT_DOUBLE_EQ(out.reward, -1.0);
    EXPECT_FALSE(out.done);
  }
  EXPECT_EQ(s.taxi, (Cell{4, 0}));
  out = TaxiStep(&s, kDrop, TaxiObservation::kExtended);
  EXPECT_EQ(out.info.event, TaskEvent::kCorrectDrop);
  EXPECT_DOUBLE_EQ(out.reward, -1.0 + 20.0);
  EXPECT_TRUE(out.done);
  EXPECT_EQ(Judge(out.info, EnvKind::kTaxi), 1);
  EXPECT_THROW(TaxiStep(&s, kNorth, TaxiObservation::kExtended), ContractViolation);
}

TEST(TaxiStepTest, IllegalPickupAndDrop) {
  TaxiState s = At({2, 2}, 0, 1);
  StepOutcome out = TaxiStep(&s, kPickup, TaxiObservation::kExtended);
  EXPECT_EQ(out.info.event, TaskEvent::kWrongPickup);
  EXPECT_DOUBLE_EQ(out.reward, -11.0);
  EXPECT_EQ(Judge(out.info, EnvKind::kTaxi), -1);
  out = TaxiStep(&s, kDrop, TaxiObservation::kExtended);
  EXPECT_EQ(out.info.event, TaskEvent::kWrongDrop);
  EXPECT_DOUBLE_EQ(out.reward, -11.0);
  EXPECT_FALSE(out.done);

  // Wrong landmark: the passenger stays aboard and the episode continues.
  TaxiState carrying = At({0, 4}, kInTaxi, 1);
  out = TaxiStep(&carrying, kDrop, TaxiObservation::kExtended);
  EXPECT_EQ(out.info.event, TaskEvent::kWrongDrop);
  EXPECT_EQ(carrying.passenger, kInTaxi);
  EXPECT_FALSE(out.done);
  out = TaxiStep(&carrying, kPickup, TaxiObservation::kExtended);
  EXPECT_EQ(out.info.event, TaskEvent::kWrongPickup);
}

TEST(TaxiStepTest, MoveJudgedByDistanceToCurrentTarget) {
  // Empty taxi heads for the passenger at Y (0,4).
  TaxiState s = At({2, 2}, 3, 2);
  StepOutcome out = TaxiStep(&s, kWest, TaxiObservation::kExtended);
  EXPECT_EQ(Judge(out.info, EnvKind::kTaxi), 1);
  out = TaxiStep(&s, kNorth, TaxiObservation::kExtended);
  EXPECT_EQ(Judge(out.info, EnvKind::kTaxi), -1);
  // Loaded taxi heads for the destination B (3,4).
  TaxiState loaded = At({3, 2}, kInTaxi, 2);
  out = TaxiStep(&loaded, kSouth, TaxiObservation::kExtended);
  EXPECT_EQ(Judge(out.info, EnvKind::kTaxi), 1);
}

TEST(TaxiStepTest, BlockedMoveCostsAStep) {
  TaxiState s = At({1, 0}, 0, 1);
  const StepOutcome out = TaxiStep(&s, kEast, TaxiObservation::kExtended);
  EXPECT_EQ(s.taxi, (Cell{1, 0}));
  EXPECT_DOUBLE_EQ(out.reward, -1.0);
  EXPECT_EQ(s.steps, 1);
}

TEST(TaxiStepTest, TruncatesAtStepLimit) {
  TaxiState s = At({2, 2}, 0, 1);
  StepOutcome out;
  for (int i = 0; i < kMaxEpisodeSteps; ++i) {
    ASSERT_FALSE(s.done);
    out = TaxiStep(&s, kNorth, TaxiObservation::kCompact);
  }
  EXPECT_TRUE(out.done);
}

TEST(TaxiObserveTest, Layouts) {
  EXPECT_EQ(TaxiObservationSize(TaxiObservation::kCompact), 26);
  EXPECT_EQ(TaxiObservationSize(TaxiObservation::kExtended), 35);
  const TaxiState s = At({3, 1}, 2, 0);
  const Vector lit = TaxiObserve(s, TaxiObservation::kCompact);
  EXPECT_EQ(lit.sum(), 1.0);
  EXPECT_EQ(lit[1 * 5 + 3], 1.0);
  EXPECT_EQ(lit[25], 0.0);
  const Vector ext = TaxiObserve(s, TaxiObservation::kExtended);
  EXPECT_EQ(ext.sum(), 3.0);
  EXPECT_EQ(ext[8], 1.0);
  EXPECT_EQ(ext[26 + 2], 1.0);
  EXPECT_EQ(ext[31 + 0], 1.0);
  const Vector aboard = TaxiObserve(At({3, 1}, kInTaxi, 0), TaxiObservation::kExtended);
  EXPECT_EQ(aboard[25], 1.0);
  EXPECT_EQ(aboard[26 + 4], 1.0);
}

TEST(TaxiEnvTest, SeedDeterminesEpisodeSequence) {
  TaxiEnv a(9, TaxiObservation::kExtended);
  TaxiEnv b(9, TaxiObservation::kExtended);
  for (int ep = 0; ep < 20; ++ep) {
    EXPECT_EQ(a.Reset(), b.Reset());
    EXPECT_EQ(a.agent_cell(), b.agent_cell());
  }
  EXPECT_EQ(a.num_actions(), 6);
  EXPECT_NE(a.Render().find("destination"), std::string::npos);
}

}  // namespace
}  // namespace hitl
