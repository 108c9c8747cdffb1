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

#include "hitl/nn.h"

#include <cmath>

#include "gtest/gtest.h"
#include "hitl/errors.h"
#include "hitl/rng.h"
#include "test_oracles.h"

namespace hitl {
namespace {

Network ScalarNet(double w1, double b1, double w2, double b2) {
  Network net(1, 1, 1);
  ParameterSet& p = net.mutable_params();
  p.w1(0, 0) = w1;
  p.b1[0] = b1;
  p.w2(0, 0) = w2;
  p.b2[0] = b2;
  return net;
}

TEST(InitNetworkTest, SameSeedIsBitIdentical) {
  EXPECT_EQ(InitNetwork(64, 100, 4, 7), InitNetwork(64, 100, 4, 7));
  EXPECT_FALSE(InitNetwork(64, 100, 4, 7) == InitNetwork(64, 100, 4, 8));
}

TEST(InitNetworkTest, BiasesZeroAndWeightsBounded) {
  const Network net = InitNetwork(64, 100, 4, 3);
  EXPECT_TRUE(net.params().b1.isZero(0.0));
  EXPECT_TRUE(net.params().b2.isZero(0.0));
  EXPECT_LE(net.params().w1.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(64.0));
  EXPECT_LE(net.params().w2.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(100.0));
}

TEST(InitNetworkTest, ParameterCount) {
  // 64*100 + 100 + 100*4 + 4
  EXPECT_EQ(InitNetwork(64, 100, 4, 0).num_parameters(), 6904);
}

TEST(InitNetworkTest, RejectsNonPositiveDims) {
  EXPECT_THROW(InitNetwork(0, 100, 4, 0), ConfigError);
  EXPECT_THROW(InitNetwork(8, -1, 4, 0), ConfigError);
  EXPECT_THROW(Network(8, 100, 0), ConfigError);
}

TEST(ForwardTest, ZeroNetworkGivesZero) {
  const Network net(5, 7, 3);
  const Vector out = Forward(net, Vector::Constant(5, 0.7));
  ASSERT_EQ(out.size(), 3);
  EXPECT_TRUE(out.isZero(0.0));
}

TEST(ForwardTest, ScalarExamples) {
  EXPECT_EQ(Forward(ScalarNet(1, 0, 1, 0), Vector::Zero(1))[0], 0.0);
  const double expected = 2.0 * std::tanh(1.0) + 0.5;
  EXPECT_NEAR(Forward(ScalarNet(1, 0, 2, 0.5), Vector::Ones(1))[0], expected, 1e-15);
  EXPECT_NEAR(expected, 2.0232, 1e-4);
}

TEST(ForwardTest, DimensionMismatchThrows) {
  const Network net(4, 3, 2);
  EXPECT_THROW(Forward(net, Vector::Zero(5)), ContractViolation);
}

TEST(ForwardTest, IsPure) {
  const Network net = InitNetwork(8, 16, 4, 11);
  Vector x = Vector::LinSpaced(8, -1.0, 1.0);
  EXPECT_EQ(Forward(net, x), Forward(net, x));
}

TEST(GradSquaredErrorTest, ZeroResidualGivesZeroGradient) {
  const Network net = InitNetwork(6, 10, 3, 5);
  const Vector x = Vector::LinSpaced(6, 0.0, 1.0);
  const double y = Forward(net, x)[1];
  EXPECT_TRUE(GradSquaredError(net, x, 1, y).w1.isZero(0.0));
  const Gradient g = GradSquaredError(net, x, 1, y);
  EXPECT_TRUE(g.b1.isZero(0.0) && g.w2.isZero(0.0) && g.b2.isZero(0.0));
}

TEST(GradSquaredErrorTest, MatchesFiniteDifferences) {
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = InitNetwork(5, 7, 3, rng());
    Vector x(5);
    for (int i = 0; i < 5; ++i) x[i] = 2.0 * Uniform01(rng) - 1.0;
    const int target_index = UniformIndex(rng, 3);
    const double target = 2.0 * Uniform01(rng) - 1.0;
    const Gradient analytic = GradSquaredError(net, x, target_index, target);
    const Gradient numeric =
        testing_oracles::FiniteDifferenceGradient(net, x, target_index, target, 1e-5);
    EXPECT_LT(testing_oracles::MaxRelativeError(analytic, numeric), 1e-4);
  }
}

TEST(GradSquaredErrorTest, DoublingResidualDoublesGradient) {
  const Network net = InitNetwork(4, 6, 2, 9);
  const Vector x = Vector::LinSpaced(4, -0.5, 0.5);
  const double y = Forward(net, x)[0];
  const Gradient g1 = GradSquaredError(net, x, 0, y - 0.25);
  const Gradient g2 = GradSquaredError(net, x, 0, y - 0.5);
  for (int64_t i = 0; i < g1.size(); ++i) {
    EXPECT_NEAR(g2.flat(i), 2.0 * g1.flat(i), 1e-12 * (1.0 + std::abs(g1.flat(i))));
  }
}

TEST(GradSquaredErrorTest, OtherOutputRowsUntouched) {
  const Network net = InitNetwork(4, 6, 3, 2);
  const Gradient g = GradSquaredError(net, Vector::Ones(4), 1, 5.0);
  EXPECT_TRUE(g.w2.row(0).isZero(0.0));
  EXPECT_TRUE(g.w2.row(2).isZero(0.0));
  EXPECT_EQ(g.b2[0], 0.0);
  EXPECT_NE(g.b2[1], 0.0);
}

TEST(GradSquaredErrorTest, BadTargetIndexThrows) {
  const Network net(2, 2, 2);
  EXPECT_THROW(GradSquaredError(net, Vector::Zero(2), 2, 0.0), ContractViolation);
}

TEST(RmsPropTest, ZeroGradientDecaysAccumulatorOnly) {
  Network net = InitNetwork(3, 4, 2, 1);
  const Network before = net;
  RmsProp opt(net, {});
  opt.mutable_accumulators().b2.setConstant(2.0);
  Gradient zero = ParameterSet::Zeros(3, 4, 2);
  opt.Step(zero, &net);
  EXPECT_EQ(net, before);
  EXPECT_DOUBLE_EQ(opt.accumulators().b2[0], 0.9 * 2.0);
}

TEST(RmsPropTest, ScalarStep) {
  Network net(1, 1, 1);
  RmsProp opt(net, {1e-3, 0.9, 1e-8});
  Gradient g = ParameterSet::Zeros(1, 1, 1);
  g.b2[0] = 1.0;
  opt.Step(g, &net);
  const double acc = (1.0 - 0.9) * 1.0 * 1.0;
  EXPECT_DOUBLE_EQ(opt.accumulators().b2[0], acc);
  EXPECT_DOUBLE_EQ(net.params().b2[0], -1e-3 / (std::sqrt(acc) + 1e-8));
  EXPECT_NEAR(opt.accumulators().b2[0], 0.1, 1e-15);
}

TEST(RmsPropTest, RepeatedGradientShrinksStep) {
  Network net(1, 1, 1);
  RmsProp opt(net, {});
  Gradient g = ParameterSet::Zeros(1, 1, 1);
  g.b2[0] = 1.0;
  opt.Step(g, &net);
  const double first = std::abs(net.params().b2[0]);
  const double before = net.params().b2[0];
  opt.Step(g, &net);
  const double second = std::abs(net.params().b2[0] - before);
  EXPECT_LT(second, first);
}

TEST(RmsPropTest, AccumulatorsStayNonnegative) {
  Network net = InitNetwork(4, 5, 3, 77);
  RmsProp opt(net, {});
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Vector x = Vector::Random(4);
    opt.Step(GradSquaredError(net, x, UniformIndex(rng, 3), Uniform01(rng)), &net);
    for (int64_t k = 0; k < opt.accumulators().size(); ++k) {
      ASSERT_GE(opt.accumulators().flat(k), 0.0);
    }
  }
}

TEST(RmsPropTest, ShapeMismatchThrows) {
  Network net(2, 2, 2);
  RmsProp opt(net, {});
  EXPECT_THROW(opt.Step(ParameterSet::Zeros(3, 2, 2), &net), ContractViolation);
}

TEST(NetworkTest, FixedScriptIsDeterministic) {
  auto train = [] {
    Network net = InitNetwork(6, 12, 3, 42);
    RmsProp opt(net, {});
    Rng rng(43);
    for (int i = 0; i < 100; ++i) {
      Vector x = Vector::Zero(6);
      x[UniformIndex(rng, 6)] = 1.0;
      opt.Step(GradSquaredError(net, x, UniformIndex(rng, 3), Uniform01(rng)), &net);
    }
    return net;
  };
  EXPECT_EQ(train(), train());
}

TEST(NetworkJsonTest, RoundTripsExactly) {
  const Network net = InitNetwork(5, 7, 3, 99);
  const nlohmann::json j = NetworkToJson(net);
  EXPECT_EQ(j.at("dims"), nlohmann::json({5, 7, 3}));
  const Network back = NetworkFromJson(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, net);
}

TEST(NetworkJsonTest, RejectsWrongShapes) {
  nlohmann::json j = NetworkToJson(Network(2, 2, 2));
  j["b1"] = {1.0};
  EXPECT_THROW(NetworkFromJson(j), ConfigError);
}

}  // namespace
}  // namespace hitl
