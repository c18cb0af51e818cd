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

// Feed-forward network of dense and noisy layers with a hand-written
// reverse pass. Batches are column-major: one sample per column.

#ifndef NDQN_NETWORK_HPP_
#define NDQN_NETWORK_HPP_

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "ndqn/common.hpp"
#include "ndqn/nn.hpp"
#include "ndqn/noisy.hpp"

namespace ndqn {

struct DenseLayer {
  DenseParams params;
  Activation activation = Activation::kRelu;
};

struct NoisyLayer {
  NoisyLinearParams params;
  Activation activation = Activation::kRelu;
};

using Layer = std::variant<DenseLayer, NoisyLayer>;

class BackwardBeforeForwardError : public Error {
 public:
  using Error::Error;
};

// Activations recorded by one forward pass, consumed by backward().
struct GradientTape {
  ForwardMode mode;
  std::vector<Matrix> inputs;           // layer inputs, fan_in x batch
  std::vector<Matrix> pre_activations;  // W x + b, fan_out x batch
  bool complete = false;
};

class Network {
 public:
  Network() = default;
  // Throws ShapeError if consecutive layers do not chain or a residual layer
  // is not square.
  explicit Network(std::vector<Layer> layers);

  Matrix forward(const Matrix& x, const ForwardMode& mode,
                 GradientTape* tape = nullptr) const;
  Vector forward(const Vector& x, const ForwardMode& mode) const;

  // Gradients of sum(output_grad .* output) with respect to every learnable
  // tensor, in parameters() order.
  Gradients backward(const GradientTape& tape, const Matrix& output_grad) const;

  // Per layer: dense -> weights, bias; noisy -> mu_w, sigma_w, mu_b, sigma_b.
  ParamList parameters();
  ConstParamList parameters() const;

  // Resamples every noisy layer, first layer first.
  void reset_noise(Rng& rng);
  bool has_noise() const;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  Eigen::Index input_size() const;
  Eigen::Index output_size() const;

 private:
  std::vector<Layer> layers_;
};

// Binary layout of a network block (all integers and scalars little-endian):
//   u32 layer_count
//   per layer: u32 kind tag = (type << 8) | activation   (type 1 dense, 2 noisy)
//              u32 fan_in, u32 fan_out
//              dense: weights, bias
//              noisy: mu_w, sigma_w, mu_b, sigma_b
//   tensors as row-major f64. Noise buffers are not stored.
void write_network(std::ostream& out, const Network& net);
// Noise buffers of noisy layers are drawn from `noise_rng` in layer order.
Network read_network(std::istream& in, Rng& noise_rng);

// Little-endian primitives shared with the checkpoint writer.
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
// Row-major order regardless of Eigen's storage order.
void write_tensor(std::ostream& out, const ConstParamView& m);
void read_tensor(std::istream& in, ParamView m);

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ndqn

#endif  // NDQN_NETWORK_HPP_
