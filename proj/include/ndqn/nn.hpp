// Copyright 2026 The ndqn Authors.
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

// Dense building blocks, the optimizer and the finite-difference oracle.

#ifndef NDQN_NN_HPP_
#define NDQN_NN_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "ndqn/common.hpp"

namespace ndqn {

// Mutable view of one learnable tensor. Vectors appear as n x 1.
using ParamView = Eigen::Map<Matrix>;
using ConstParamView = Eigen::Map<const Matrix>;
using ParamList = std::vector<ParamView>;
using ConstParamList = std::vector<ConstParamView>;

// One gradient tensor per learnable tensor, same order and shape.
using Gradients = std::vector<Matrix>;

enum class Mode { kTrain, kEval };

struct ForwardMode {
  Mode mode = Mode::kEval;
  double alpha = 0.0;  // noise scale; ignored by dense layers and in eval mode
};

// y = f(z) applied after the affine map z = W x + b.
//   linear:   y = z
//   relu:     y = max(z, 0)
//   residual: y = x + max(z, 0)   (requires fan_in == fan_out)
enum class Activation : std::uint8_t { kLinear = 0, kRelu = 1, kResidual = 2 };

struct DenseParams {
  Matrix weights;  // fan_out x fan_in
  Vector bias;     // fan_out

  Eigen::Index fan_in() const { return weights.cols(); }
  Eigen::Index fan_out() const { return weights.rows(); }
};

Vector dense_forward(const DenseParams& p, const Vector& x);
Vector relu(const Vector& x);

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); bias likewise.
DenseParams init_dense(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

ParamList parameters(DenseParams& p);

enum class OptimizerKind : std::uint8_t { kAdam = 0, kSgd = 1 };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step = 0;

  static OptimizerState for_params(const ParamList& params,
                                   OptimizerKind kind = OptimizerKind::kAdam);
};

// One adaptive-moment (or plain SGD) step with bias correction.
void optimizer_update(ParamList& params, const Gradients& grads,
                      OptimizerState& opt, double lr);

double global_norm(const Gradients& grads);
// Rescales so the global L2 norm is at most `max_norm`. Returns the factor.
double clip_global_norm(Gradients& grads, double max_norm);

// Central differences, one scalar at a time. Parameters are perturbed in place
// and restored bit-exactly before returning.
Gradients finite_difference_grad(const std::function<double()>& loss_fn,
                                 ParamList params, double eps);

// max over entries of |a - b| / max(|a|, |b|, 1e-8).
double max_relative_error(const Gradients& analytic, const Gradients& numeric);

}  // namespace ndqn

#endif  // NDQN_NN_HPP_
