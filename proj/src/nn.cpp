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

#include "ndqn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ndqn {

Vector dense_forward(const DenseParams& p, const Vector& x) {
  if (x.size() != p.fan_in() || p.bias.size() != p.fan_out()) {
    throw ShapeError("dense_forward: input has " + std::to_string(x.size()) +
                     " entries, layer expects " + std::to_string(p.fan_in()));
  }
  return p.weights * x + p.bias;
}

Vector relu(const Vector& x) { return x.cwiseMax(0.0); }

DenseParams init_dense(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  DenseParams p;
  p.weights.resize(fan_out, fan_in);
  p.bias.resize(fan_out);
  for (Eigen::Index r = 0; r < fan_out; ++r) {
    for (Eigen::Index c = 0; c < fan_in; ++c) p.weights(r, c) = u(rng);
  }
  for (Eigen::Index r = 0; r < fan_out; ++r) p.bias[r] = u(rng);
  return p;
}

ParamList parameters(DenseParams& p) {
  ParamList out;
  out.emplace_back(p.weights.data(), p.weights.rows(), p.weights.cols());
  out.emplace_back(p.bias.data(), p.bias.size(), 1);
  return out;
}

OptimizerState OptimizerState::for_params(const ParamList& params,
                                          OptimizerKind kind) {
  OptimizerState s;
  s.kind = kind;
  for (const auto& p : params) {
    s.first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    s.second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  return s;
}

void optimizer_update(ParamList& params, const Gradients& grads,
                      OptimizerState& opt, double lr) {
  if (params.size() != grads.size() || params.size() != opt.first_moment.size()) {
    throw ShapeError("optimizer_update: tensor count mismatch");
  }
  opt.step += 1;
  if (opt.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
    return;
  }
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols()) {
      throw ShapeError("optimizer_update: gradient shape mismatch");
    }
    Matrix& m = opt.first_moment[i];
    Matrix& v = opt.second_moment[i];
    m = opt.beta1 * m + (1.0 - opt.beta1) * grads[i];
    v = opt.beta2 * v + (1.0 - opt.beta2) * grads[i].cwiseAbs2();
    params[i].array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.epsilon);
  }
}

double global_norm(const Gradients& grads) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

double clip_global_norm(Gradients& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm <= max_norm || norm == 0.0) return 1.0;
  const double scale = max_norm / norm;
  for (auto& g : grads) g *= scale;
  return scale;
}

Gradients finite_difference_grad(const std::function<double()>& loss_fn,
                                 ParamList params, double eps) {
  if (!(eps > 0.0)) throw OutOfRangeError("finite difference step must be > 0");
  Gradients out;
  out.reserve(params.size());
  for (auto& p : params) {
    Matrix g(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      double& w = p.data()[i];
      const double saved = w;
      w = saved + eps;
      const double up = loss_fn();
      w = saved - eps;
      const double down = loss_fn();
      w = saved;
      g.data()[i] = (up - down) / (2.0 * eps);
    }
    out.push_back(std::move(g));
  }
  return out;
}

double max_relative_error(const Gradients& analytic, const Gradients& numeric) {
  if (analytic.size() != numeric.size()) {
    throw ShapeError("max_relative_error: tensor count mismatch");
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < analytic.size(); ++t) {
    if (analytic[t].size() != numeric[t].size()) {
      throw ShapeError("max_relative_error: tensor shape mismatch");
    }
    for (Eigen::Index i = 0; i < analytic[t].size(); ++i) {
      const double a = analytic[t].data()[i];
      const double b = numeric[t].data()[i];
      const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
      worst = std::max(worst, std::abs(a - b) / denom);
    }
  }
  return worst;
}

}  // namespace ndqn
