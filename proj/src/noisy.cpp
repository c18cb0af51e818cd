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

#include "ndqn/noisy.hpp"

#include <cmath>
#include <string>

namespace ndqn {

double f_transform(double x) {
  if (x > 0.0) return std::sqrt(x);
  if (x < 0.0) return -std::sqrt(-x);
  return 0.0;
}

FactorizedNoise sample_factorized_noise(Eigen::Index fan_in,
                                        Eigen::Index fan_out, Rng& rng) {
  if (fan_in < 1 || fan_out < 1) {
    throw ShapeError("sample_factorized_noise: empty layer");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  FactorizedNoise n;
  n.eps_in.resize(fan_in);
  n.eps_out.resize(fan_out);
  for (Eigen::Index j = 0; j < fan_in; ++j) n.eps_in[j] = normal(rng);
  for (Eigen::Index i = 0; i < fan_out; ++i) n.eps_out[i] = normal(rng);
  const Vector f_in = n.eps_in.unaryExpr(&f_transform);
  n.eps_b = n.eps_out.unaryExpr(&f_transform);
  n.eps_w = n.eps_b * f_in.transpose();
  return n;
}

NoisyLinearParams init_noisy(Eigen::Index fan_in, Eigen::Index fan_out,
                             double sigma0, Rng& rng) {
  if (!(sigma0 > 0.0)) throw OutOfRangeError("init_noisy: sigma0 must be > 0");
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-scale, scale);
  NoisyLinearParams p;
  p.mu_w.resize(fan_out, fan_in);
  for (Eigen::Index r = 0; r < fan_out; ++r) {
    for (Eigen::Index c = 0; c < fan_in; ++c) p.mu_w(r, c) = u(rng);
  }
  p.mu_b.resize(fan_out);
  for (Eigen::Index r = 0; r < fan_out; ++r) p.mu_b[r] = u(rng);
  p.sigma_w = Matrix::Constant(fan_out, fan_in, sigma0 * scale);
  p.sigma_b = Vector::Constant(fan_out, sigma0 * scale);
  p.noise = sample_factorized_noise(fan_in, fan_out, rng);
  return p;
}

void reset_noise(NoisyLinearParams& p, Rng& rng) {
  p.noise = sample_factorized_noise(p.fan_in(), p.fan_out(), rng);
}

Matrix effective_weights(const NoisyLinearParams& p, const ForwardMode& mode) {
  if (!noise_active(mode)) return p.mu_w;
  return p.mu_w + mode.alpha * p.sigma_w.cwiseProduct(p.noise.eps_w);
}

Vector effective_bias(const NoisyLinearParams& p, const ForwardMode& mode) {
  if (!noise_active(mode)) return p.mu_b;
  return p.mu_b + mode.alpha * p.sigma_b.cwiseProduct(p.noise.eps_b);
}

Vector noisy_forward(const NoisyLinearParams& p, const Vector& x, double alpha,
                     Mode mode) {
  if (x.size() != p.fan_in()) {
    throw ShapeError("noisy_forward: input has " + std::to_string(x.size()) +
                     " entries, layer expects " + std::to_string(p.fan_in()));
  }
  if (!(alpha >= 0.0)) throw OutOfRangeError("noisy_forward: alpha must be >= 0");
  const ForwardMode fm{mode, alpha};
  if (!noise_active(fm)) return p.mu_w * x + p.mu_b;
  return effective_weights(p, fm) * x + effective_bias(p, fm);
}

Vector residual_block_forward(const NoisyLinearParams& p, const Vector& x,
                              double alpha, Mode mode) {
  if (p.fan_in() != p.fan_out()) {
    throw ShapeError("residual block requires fan_in == fan_out");
  }
  return x + relu(noisy_forward(p, x, alpha, mode));
}

ParamList parameters(NoisyLinearParams& p) {
  ParamList out;
  out.emplace_back(p.mu_w.data(), p.mu_w.rows(), p.mu_w.cols());
  out.emplace_back(p.sigma_w.data(), p.sigma_w.rows(), p.sigma_w.cols());
  out.emplace_back(p.mu_b.data(), p.mu_b.size(), 1);
  out.emplace_back(p.sigma_b.data(), p.sigma_b.size(), 1);
  return out;
}

}  // namespace ndqn
