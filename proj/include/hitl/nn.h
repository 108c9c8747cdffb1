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

#ifndef HITL_NN_H_
#define HITL_NN_H_

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>

namespace hitl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Parameters of a one-hidden-layer perceptron. The same layout holds
// gradients and RMSProp accumulators.
struct ParameterSet {
  Matrix w1;  // hidden x input
  Vector b1;  // hidden
  Matrix w2;  // output x hidden
  Vector b2;  // output

  static ParameterSet Zeros(int input_dim, int hidden_dim, int output_dim);

  int64_t size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
  bool SameShape(const ParameterSet& other) const;
  void SetZero();
  // this += scale * other
  void AddScaled(const ParameterSet& other, double scale);
  void Scale(double factor);

  // Flat views, ordered w1 (column-major), b1, w2 (column-major), b2.
  double& flat(int64_t i);
  double flat(int64_t i) const;

  bool operator==(const ParameterSet& other) const;
};

using Gradient = ParameterSet;

// x -> W2 tanh(W1 x + b1) + b2. Used for both the Q and H approximators.
class Network {
 public:
  // Zero-initialized network. Throws ConfigError on non-positive dims.
  Network(int input_dim, int hidden_dim, int output_dim);

  int input_dim() const { return static_cast<int>(params_.w1.cols()); }
  int hidden_dim() const { return static_cast<int>(params_.w1.rows()); }
  int output_dim() const { return static_cast<int>(params_.w2.rows()); }
  int64_t num_parameters() const { return params_.size(); }

  const ParameterSet& params() const { return params_; }
  ParameterSet& mutable_params() { return params_; }

  bool operator==(const Network& other) const { return params_ == other.params_; }

 private:
  ParameterSet params_;
};

// Uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
Network InitNetwork(int input_dim, int hidden_dim, int output_dim, uint64_t seed);

// Throws ContractViolation when x.size() != input_dim.
Vector Forward(const Network& net, const Vector& x);

// Gradient of (Forward(net, x)[target_index] - target_value)^2.
Gradient GradSquaredError(const Network& net, const Vector& x,
                          int target_index, double target_value);

// grad += scale * GradSquaredError(net, x, target_index, target_value).
// Returns the residual Forward(net, x)[target_index] - target_value.
double AccumulateGradSquaredError(const Network& net, const Vector& x,
                                  int target_index, double target_value,
                                  double scale, Gradient* grad);

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double decay = 0.9;
  double epsilon = 1e-8;
};

// acc <- decay*acc + (1-decay)*g^2 ; theta <- theta - lr*g/(sqrt(acc)+eps).
class RmsProp {
 public:
  RmsProp(const Network& net, RmsPropConfig config);

  void Step(const Gradient& grad, Network* net);

  const RmsPropConfig& config() const { return config_; }
  const ParameterSet& accumulators() const { return acc_; }
  ParameterSet& mutable_accumulators() { return acc_; }

 private:
  RmsPropConfig config_;
  ParameterSet acc_;
};

// {"dims": [in, hidden, out], "W1": [[...]], "b1": [...], "W2": [[...]],
//  "b2": [...]}; matrices are row-major nested arrays.
nlohmann::json NetworkToJson(const Network& net);
Network NetworkFromJson(const nlohmann::json& j);

}  // namespace hitl

#endif  // HITL_NN_H_
