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

#include "ndqn/network.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace ndqn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Activation activation_of(const Layer& layer) {
  return std::visit([](const auto& l) { return l.activation; }, layer);
}

Eigen::Index fan_in_of(const Layer& layer) {
  return std::visit([](const auto& l) { return l.params.fan_in(); }, layer);
}

Eigen::Index fan_out_of(const Layer& layer) {
  return std::visit([](const auto& l) { return l.params.fan_out(); }, layer);
}

Matrix apply_activation(const Matrix& z, const Matrix& x, Activation act) {
  switch (act) {
    case Activation::kLinear: return z;
    case Activation::kRelu: return z.cwiseMax(0.0);
    case Activation::kResidual: return x + z.cwiseMax(0.0);
  }
  return z;
}

Matrix affine(const Layer& layer, const Matrix& x, const ForwardMode& mode) {
  return std::visit(
      Overloaded{
          [&](const DenseLayer& l) -> Matrix {
            Matrix z = l.params.weights * x;
            z.colwise() += l.params.bias;
            return z;
          },
          [&](const NoisyLayer& l) -> Matrix {
            if (!noise_active(mode)) {
              Matrix z = l.params.mu_w * x;
              z.colwise() += l.params.mu_b;
              return z;
            }
            Matrix z = effective_weights(l.params, mode) * x;
            z.colwise() += effective_bias(l.params, mode);
            return z;
          }},
      layer);
}

}  // namespace

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (activation_of(layers_[i]) == Activation::kResidual &&
        fan_in_of(layers_[i]) != fan_out_of(layers_[i])) {
      throw ShapeError("layer " + std::to_string(i) +
                       ": residual layer must be square");
    }
    if (i > 0 && fan_out_of(layers_[i - 1]) != fan_in_of(layers_[i])) {
      throw ShapeError("layer " + std::to_string(i) +
                       ": input width does not match previous layer");
    }
  }
}

Eigen::Index Network::input_size() const {
  return layers_.empty() ? 0 : fan_in_of(layers_.front());
}

Eigen::Index Network::output_size() const {
  return layers_.empty() ? 0 : fan_out_of(layers_.back());
}

Matrix Network::forward(const Matrix& x, const ForwardMode& mode,
                        GradientTape* tape) const {
  if (x.rows() != input_size()) {
    throw ShapeError("network input has " + std::to_string(x.rows()) +
                     " rows, expected " + std::to_string(input_size()));
  }
  if (mode.alpha < 0.0) throw OutOfRangeError("noise scale must be >= 0");
  if (tape) {
    tape->mode = mode;
    tape->inputs.clear();
    tape->pre_activations.clear();
    tape->complete = false;
  }
  Matrix h = x;
  for (const Layer& layer : layers_) {
    Matrix z = affine(layer, h, mode);
    Matrix y = apply_activation(z, h, activation_of(layer));
    if (tape) {
      tape->inputs.push_back(std::move(h));
      tape->pre_activations.push_back(std::move(z));
    }
    h = std::move(y);
  }
  if (tape) tape->complete = true;
  return h;
}

Vector Network::forward(const Vector& x, const ForwardMode& mode) const {
  return forward(Matrix(x), mode).col(0);
}

Gradients Network::backward(const GradientTape& tape,
                            const Matrix& output_grad) const {
  if (!tape.complete || tape.inputs.size() != layers_.size()) {
    throw BackwardBeforeForwardError("backward() requires a recorded forward pass");
  }
  const Eigen::Index batch = tape.inputs.front().cols();
  if (output_grad.rows() != output_size() || output_grad.cols() != batch) {
    throw ShapeError("output gradient shape does not match the forward pass");
  }
  const ForwardMode& mode = tape.mode;
  std::vector<Gradients> per_layer(layers_.size());
  Matrix grad = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Layer& layer = layers_[k];
    const Matrix& x = tape.inputs[k];
    const Matrix& z = tape.pre_activations[k];
    const Activation act = activation_of(layer);
    Matrix dz = act == Activation::kLinear
                    ? grad
                    : Matrix(grad.array() * (z.array() > 0.0).cast<double>());
    const Matrix dw = dz * x.transpose();
    const Vector db = dz.rowwise().sum();
    Matrix dx;
    std::visit(
        Overloaded{
            [&](const DenseLayer& l) {
              per_layer[k] = {dw, db};
              if (k > 0) dx = l.params.weights.transpose() * dz;
            },
            [&](const NoisyLayer& l) {
              const auto& p = l.params;
              if (noise_active(mode)) {
                per_layer[k] = {dw, mode.alpha * dw.cwiseProduct(p.noise.eps_w),
                                db, mode.alpha * db.cwiseProduct(p.noise.eps_b)};
                if (k > 0) dx = effective_weights(p, mode).transpose() * dz;
              } else {
                per_layer[k] = {dw, Matrix::Zero(dw.rows(), dw.cols()), db,
                                Vector::Zero(db.size())};
                if (k > 0) dx = p.mu_w.transpose() * dz;
              }
            }},
        layer);
    if (k > 0) {
      if (act == Activation::kResidual) dx += grad;
      grad = std::move(dx);
    }
  }
  Gradients out;
  for (auto& g : per_layer) {
    for (auto& t : g) out.push_back(std::move(t));
  }
  return out;
}

ParamList Network::parameters() {
  ParamList out;
  for (Layer& layer : layers_) {
    std::visit([&](auto& l) {
      for (auto& v : ndqn::parameters(l.params)) out.push_back(v);
    }, layer);
  }
  return out;
}

ConstParamList Network::parameters() const {
  ConstParamList out;
  for (const auto& v : const_cast<Network*>(this)->parameters()) {
    out.emplace_back(v.data(), v.rows(), v.cols());
  }
  return out;
}

void Network::reset_noise(Rng& rng) {
  for (Layer& layer : layers_) {
    if (auto* noisy = std::get_if<NoisyLayer>(&layer)) {
      ndqn::reset_noise(noisy->params, rng);
    }
  }
}

bool Network::has_noise() const {
  for (const Layer& layer : layers_) {
    if (std::holds_alternative<NoisyLayer>(layer)) return true;
  }
  return false;
}

// --- serialization ---------------------------------------------------------

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

namespace {

template <class T>
void write_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw FormatError("unexpected end of data");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

constexpr std::uint32_t kDenseType = 1;
constexpr std::uint32_t kNoisyType = 2;

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
void write_f64(std::ostream& out, double v) { write_le(out, v); }
std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t>(in); }
double read_f64(std::istream& in) { return read_le<double>(in); }

void write_tensor(std::ostream& out, const ConstParamView& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(out, m(r, c));
  }
}

void read_tensor(std::istream& in, ParamView m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f64(in);
  }
}

void write_network(std::ostream& out, const Network& net) {
  write_u32(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const Layer& layer : net.layers()) {
    const std::uint32_t type =
        std::holds_alternative<DenseLayer>(layer) ? kDenseType : kNoisyType;
    write_u32(out, (type << 8) | static_cast<std::uint32_t>(activation_of(layer)));
    write_u32(out, static_cast<std::uint32_t>(fan_in_of(layer)));
    write_u32(out, static_cast<std::uint32_t>(fan_out_of(layer)));
    Layer copy = layer;
    std::visit([&](auto& l) {
      for (const auto& v : ndqn::parameters(l.params)) {
        write_tensor(out, ConstParamView(v.data(), v.rows(), v.cols()));
      }
    }, copy);
  }
}

Network read_network(std::istream& in, Rng& noise_rng) {
  const std::uint32_t count = read_u32(in);
  if (count == 0 || count > 64) throw FormatError("implausible layer count");
  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t tag = read_u32(in);
    const std::uint32_t type = tag >> 8;
    const std::uint32_t act = tag & 0xff;
    const std::uint32_t fan_in = read_u32(in);
    const std::uint32_t fan_out = read_u32(in);
    if (act > static_cast<std::uint32_t>(Activation::kResidual)) {
      throw FormatError("unknown activation tag");
    }
    if (fan_in == 0 || fan_out == 0 || fan_in > (1u << 16) || fan_out > (1u << 16)) {
      throw FormatError("implausible layer shape");
    }
    const auto activation = static_cast<Activation>(act);
    if (type == kDenseType) {
      DenseLayer l;
      l.activation = activation;
      l.params.weights.resize(fan_out, fan_in);
      l.params.bias.resize(fan_out);
      for (auto& v : ndqn::parameters(l.params)) read_tensor(in, v);
      layers.emplace_back(std::move(l));
    } else if (type == kNoisyType) {
      NoisyLayer l;
      l.activation = activation;
      auto& p = l.params;
      p.mu_w.resize(fan_out, fan_in);
      p.sigma_w.resize(fan_out, fan_in);
      p.mu_b.resize(fan_out);
      p.sigma_b.resize(fan_out);
      for (auto& v : ndqn::parameters(p)) read_tensor(in, v);
      ndqn::reset_noise(p, noise_rng);
      layers.emplace_back(std::move(l));
    } else {
      throw FormatError("unknown layer kind tag");
    }
  }
  try {
    return Network(std::move(layers));
  } catch (const ShapeError& e) {
    throw FormatError(std::string("inconsistent layer shapes: ") + e.what());
  }
}

}  // namespace ndqn
