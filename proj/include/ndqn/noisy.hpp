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

// NoisyLinear layers with factorized Gaussian noise.
//
// In train mode a layer computes
//   y = (mu_w + alpha * sigma_w .* eps_w) x + (mu_b + alpha * sigma_b .* eps_b)
// and in eval mode only the mean path mu_w x + mu_b. The noise buffers are
// constants between calls to reset_noise(); only mu and sigma are learnable.

#ifndef NDQN_NOISY_HPP_
#define NDQN_NOISY_HPP_

#include "ndqn/common.hpp"
#include "ndqn/nn.hpp"

namespace ndqn {

// sign(x) * sqrt(|x|)
double f_transform(double x);

struct FactorizedNoise {
  Vector eps_in;   // raw N(0,1) factors, fan_in
  Vector eps_out;  // raw N(0,1) factors, fan_out
  Matrix eps_w;    // eps_w(i, j) = f(eps_out[i]) * f(eps_in[j])
  Vector eps_b;    // eps_b[i] = f(eps_out[i])
};

// Draws fan_in factors, then fan_out factors: fan_in + fan_out normals total.
FactorizedNoise sample_factorized_noise(Eigen::Index fan_in,
                                        Eigen::Index fan_out, Rng& rng);

struct NoisyLinearParams {
  Matrix mu_w;
  Matrix sigma_w;
  Vector mu_b;
  Vector sigma_b;
  FactorizedNoise noise;

  Eigen::Index fan_in() const { return mu_w.cols(); }
  Eigen::Index fan_out() const { return mu_w.rows(); }
  const Matrix& eps_w() const { return noise.eps_w; }
  const Vector& eps_b() const { return noise.eps_b; }
};

// mu ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); sigma = sigma0 / sqrt(fan_in).
NoisyLinearParams init_noisy(Eigen::Index fan_in, Eigen::Index fan_out,
                             double sigma0, Rng& rng);

void reset_noise(NoisyLinearParams& p, Rng& rng);

// Effective weights and bias for the given mode. With alpha == 0 or in eval
// mode these are the means themselves, bit for bit.
Matrix effective_weights(const NoisyLinearParams& p, const ForwardMode& mode);
Vector effective_bias(const NoisyLinearParams& p, const ForwardMode& mode);

inline bool noise_active(const ForwardMode& mode) {
  return mode.mode == Mode::kTrain && mode.alpha != 0.0;
}

Vector noisy_forward(const NoisyLinearParams& p, const Vector& x, double alpha,
                     Mode mode);

// x + relu(noisy_forward(p, x, alpha, mode))
Vector residual_block_forward(const NoisyLinearParams& p, const Vector& x,
                              double alpha, Mode mode);

// mu_w, sigma_w, mu_b, sigma_b. Noise buffers are not parameters.
ParamList parameters(NoisyLinearParams& p);

}  // namespace ndqn

#endif  // NDQN_NOISY_HPP_
