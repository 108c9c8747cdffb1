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
#include <string>

#include "hitl/errors.h"
#include "hitl/rng.h"

namespace hitl {

ParameterSet ParameterSet::Zeros(int input_dim, int hidden_dim, int output_dim) {
  ParameterSet p;
  p.w1 = Matrix::Zero(hidden_dim, input_dim);
  p.b1 = Vector::Zero(hidden_dim);
  p.w2 = Matrix::Zero(output_dim, hidden_dim);
  p.b2 = Vector::Zero(output_dim);
  return p;
}

bool ParameterSet::SameShape(const ParameterSet& o) const {
  return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() &&
         b1.size() == o.b1.size() && w2.rows() == o.w2.rows() &&
         w2.cols() == o.w2.cols() && b2.size() == o.b2.size();
}

void ParameterSet::SetZero() {
  w1.setZero();
  b1.setZero();
  w2.setZero();
  b2.setZero();
}

void ParameterSet::AddScaled(const ParameterSet& o, double scale) {
  w1 += scale * o.w1;
  b1 += scale * o.b1;
  w2 += scale * o.w2;
  b2 += scale * o.b2;
}

void ParameterSet::Scale(double factor) {
  w1 *= factor;
  b1 *= factor;
  w2 *= factor;
  b2 *= factor;
}

double& ParameterSet::flat(int64_t i) {
  if (i < w1.size()) return w1.data()[i];
  i -= w1.size();
  if (i < b1.size()) return b1.data()[i];
  i -= b1.size();
  if (i < w2.size()) return w2.data()[i];
  i -= w2.size();
  if (i < b2.size()) return b2.data()[i];
  throw ContractViolation("parameter index out of range");
}

double ParameterSet::flat(int64_t i) const {
  return const_cast<ParameterSet*>(this)->flat(i);
}

bool ParameterSet::operator==(const ParameterSet& o) const {
  return SameShape(o) && w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2;
}

Network::Network(int input_dim, int hidden_dim, int output_dim) {
  if (input_dim <= 0 || hidden_dim <= 0 || output_dim <= 0) {
    throw ConfigError("network dims must be positive, got (" +
                      std::to_string(input_dim) + ", " +
                      std::to_string(hidden_dim) + ", " +
                      std::to_string(output_dim) + ")");
  }
  params_ = ParameterSet::Zeros(input_dim, hidden_dim, output_dim);
}

Network InitNetwork(int input_dim, int hidden_dim, int output_dim,
                    uint64_t seed) {
  Network net(input_dim, hidden_dim, output_dim);
  Rng rng(seed);
  ParameterSet& p = net.mutable_params();
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  std::uniform_real_distribution<double> u1(-bound1, bound1);
  for (int64_t i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = u1(rng);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> u2(-bound2, bound2);
  for (int64_t i = 0; i < p.w2.size(); ++i) p.w2.data()[i] = u2(rng);
  return net;
}

namespace {

void CheckInput(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim()) {
    throw ContractViolation("input has length " + std::to_string(x.size()) +
                            ", network expects " +
                            std::to_string(net.input_dim()));
  }
}

// Observations are mostly one-hot or sparse binary, so the first layer only
// touches the columns of nonzero inputs. Skipped terms are exact zeros.
Vector HiddenActivation(const ParameterSet& p, const Vector& x) {
  Vector pre = p.b1;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) pre.noalias() += x[j] * p.w1.col(j);
  }
  return pre.array().tanh().matrix();
}

}  // namespace

Vector Forward(const Network& net, const Vector& x) {
  CheckInput(net, x);
  const ParameterSet& p = net.params();
  Vector out = p.b2;
  out.noalias() += p.w2 * HiddenActivation(p, x);
  return out;
}

double AccumulateGradSquaredError(const Network& net, const Vector& x,
                                  int target_index, double target_value,
                                  double scale, Gradient* grad) {
  CheckInput(net, x);
  if (target_index < 0 || target_index >= net.output_dim()) {
    throw ContractViolation("target index " + std::to_string(target_index) +
                            " outside output range");
  }
  if (!grad->SameShape(net.params())) {
    throw ContractViolation("gradient shape does not match network");
  }
  const ParameterSet& p = net.params();
  const Vector h = HiddenActivation(p, x);
  const double y = p.b2[target_index] + p.w2.row(target_index).dot(h);
  const double residual = y - target_value;
  const double dy = 2.0 * residual * scale;

  grad->b2[target_index] += dy;
  grad->w2.row(target_index).noalias() += dy * h.transpose();
  const Vector dpre =
      (dy * p.w2.row(target_index).transpose()).cwiseProduct(
          (1.0 - h.array().square()).matrix());
  grad->b1 += dpre;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) grad->w1.col(j).noalias() += x[j] * dpre;
  }
  return residual;
}

Gradient GradSquaredError(const Network& net, const Vector& x,
                          int target_index, double target_value) {
  Gradient g = ParameterSet::Zeros(net.input_dim(), net.hidden_dim(),
                                   net.output_dim());
  AccumulateGradSquaredError(net, x, target_index, target_value, 1.0, &g);
  return g;
}

RmsProp::RmsProp(const Network& net, RmsPropConfig config)
    : config_(config),
      acc_(ParameterSet::Zeros(net.input_dim(), net.hidden_dim(),
                               net.output_dim())) {
  if (!(config.learning_rate > 0.0) || !(config.decay > 0.0 && config.decay < 1.0) ||
      !(config.epsilon > 0.0)) {
    throw ConfigError("invalid RMSProp configuration");
  }
}

void RmsProp::Step(const Gradient& grad, Network* net) {
  ParameterSet& theta = net->mutable_params();
  if (!grad.SameShape(theta) || !acc_.SameShape(theta)) {
    throw ContractViolation("RMSProp shapes do not match network");
  }
  const double rho = config_.decay;
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  auto update = [&](auto& param, auto& acc, const auto& g) {
    acc.array() = rho * acc.array() + (1.0 - rho) * g.array().square();
    param.array() -= lr * g.array() / (acc.array().sqrt() + eps);
  };
  update(theta.w1, acc_.w1, grad.w1);
  update(theta.b1, acc_.b1, grad.b1);
  update(theta.w2, acc_.w2, grad.w2);
  update(theta.b2, acc_.b2, grad.b2);
}

namespace {

nlohmann::json MatrixToJson(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json VectorToJson(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

void MatrixFromJson(const nlohmann::json& j, Matrix* m, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m->rows()) {
    throw ConfigError(std::string("bad row count for ") + name);
  }
  for (Eigen::Index r = 0; r < m->rows(); ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m->cols()) {
      throw ConfigError(std::string("bad column count for ") + name);
    }
    for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = row[c].get<double>();
  }
}

void VectorFromJson(const nlohmann::json& j, Vector* v, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != v->size()) {
    throw ConfigError(std::string("bad length for ") + name);
  }
  for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = j[i].get<double>();
}

}  // namespace

nlohmann::json NetworkToJson(const Network& net) {
  const ParameterSet& p = net.params();
  return {{"dims", {net.input_dim(), net.hidden_dim(), net.output_dim()}},
          {"W1", MatrixToJson(p.w1)},
          {"b1", VectorToJson(p.b1)},
          {"W2", MatrixToJson(p.w2)},
          {"b2", VectorToJson(p.b2)}};
}

Network NetworkFromJson(const nlohmann::json& j) {
  const auto& dims = j.at("dims");
  if (!dims.is_array() || dims.size() != 3) throw ConfigError("dims must have 3 entries");
  Network net(dims[0].get<int>(), dims[1].get<int>(), dims[2].get<int>());
  ParameterSet& p = net.mutable_params();
  MatrixFromJson(j.at("W1"), &p.w1, "W1");
  VectorFromJson(j.at("b1"), &p.b1, "b1");
  MatrixFromJson(j.at("W2"), &p.w2, "W2");
  VectorFromJson(j.at("b2"), &p.b2, "b2");
  return net;
}

}  // namespace hitl
