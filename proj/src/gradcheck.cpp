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

#include "ndqn/gradcheck.hpp"

#include <cmath>
#include <random>
#include <string>
#include <variant>

#include "ndqn/agent.hpp"
#include "ndqn/env.hpp"
#include "ndqn/network.hpp"

namespace ndqn {

namespace {

struct Instance {
  Network net;
  Matrix x;
  ForwardMode mode;
  // Loss is either sum(weights .* out) or the TD loss on (actions, y).
  bool td = false;
  Matrix weights;
  std::vector<int> actions;
  Vector y;
};

Matrix away_from_zero(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution sign(0.5);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = sign(rng) ? mag(rng) : -mag(rng);
  }
  return m;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

int uniform_int(int lo, int hi, Rng& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double noise_alpha(Rng& rng) { return std::uniform_real_distribution<double>(0.3, 1.5)(rng); }

Instance make_instance(const std::string& component, Rng& rng) {
  Instance inst;
  const int batch = uniform_int(1, 4, rng);
  if (component == "dense") {
    const int in = uniform_int(2, 8, rng);
    const int out = uniform_int(1, 6, rng);
    inst.net = Network({DenseLayer{init_dense(in, out, rng), Activation::kRelu}});
    inst.mode = {Mode::kEval, 0.0};
  } else if (component == "noisy") {
    const int in = uniform_int(2, 8, rng);
    const int out = uniform_int(1, 6, rng);
    inst.net = Network({NoisyLayer{init_noisy(in, out, 0.5, rng), Activation::kRelu}});
    inst.mode = {Mode::kTrain, noise_alpha(rng)};
  } else if (component == "residual_block") {
    const int in = uniform_int(2, 6, rng);
    const int width = uniform_int(2, 8, rng);
    const int out = uniform_int(1, 4, rng);
    inst.net = Network({DenseLayer{init_dense(in, width, rng), Activation::kRelu},
                        NoisyLayer{init_noisy(width, width, 0.5, rng), Activation::kResidual},
                        DenseLayer{init_dense(width, out, rng), Activation::kLinear}});
    inst.mode = {Mode::kTrain, noise_alpha(rng)};
  } else if (component == "q_network" || component == "q_network_dense") {
    QNetworkSpec spec;
    spec.input_size = uniform_int(4, 12, rng);
    const int width = uniform_int(4, 10, rng);
    spec.feature_widths = {width, width};
    spec.num_blocks = 2;
    const bool noisy = component == "q_network";
    spec.block_kind = noisy ? BlockKind::kNoisy : BlockKind::kDense;
    spec.residual = noisy;
    inst.net = build_q_network(spec, rng);
    inst.mode = noisy ? ForwardMode{Mode::kTrain, noise_alpha(rng)}
                      : ForwardMode{Mode::kEval, 0.0};
    inst.td = true;
    for (int i = 0; i < batch; ++i) inst.actions.push_back(uniform_int(0, kNumActions - 1, rng));
    inst.y = gaussian(batch, 1, rng);
  } else {
    throw OutOfRangeError("unknown gradcheck component '" + component + "'");
  }
  inst.x = away_from_zero(inst.net.input_size(), batch, rng);
  inst.weights = gaussian(inst.net.output_size(), batch, rng);
  return inst;
}

double loss_of(const Instance& inst) {
  const Matrix out = inst.net.forward(inst.x, inst.mode);
  if (inst.td) return td_loss(gather_actions(out, inst.actions), inst.y);
  return (inst.weights.array() * out.array()).sum();
}

bool near_kink(const Network& net, const GradientTape& tape, double margin) {
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const Activation act =
        std::visit([](const auto& l) { return l.activation; }, net.layers()[k]);
    if (act == Activation::kLinear) continue;
    if ((tape.pre_activations[k].array().abs() < margin).any()) return true;
  }
  return false;
}

std::vector<std::string> tensor_names(const Network& net) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const std::string prefix = "layer " + std::to_string(k);
    if (std::holds_alternative<DenseLayer>(net.layers()[k])) {
      names.push_back(prefix + " (dense) weights");
      names.push_back(prefix + " (dense) bias");
    } else {
      for (const char* t : {"mu_w", "sigma_w", "mu_b", "sigma_b"}) {
        names.push_back(prefix + " (noisy) " + t);
      }
    }
  }
  return names;
}

GradcheckRow check_component(const std::string& component, const GradcheckOptions& opts,
                             Rng& rng) {
  GradcheckRow row;
  row.component = component;
  for (int n = 0; n < opts.instances; ++n) {
    Instance inst;
    GradientTape tape;
    Matrix out;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) {
        throw Error("gradcheck: could not draw a kink-free instance for " + component);
      }
      inst = make_instance(component, rng);
      out = inst.net.forward(inst.x, inst.mode, &tape);
      if (!near_kink(inst.net, tape, opts.kink_margin)) break;
    }
    const Matrix dout = inst.td ? td_loss_output_grad(out, inst.actions, inst.y)
                                : inst.weights;
    Gradients analytic = inst.net.backward(tape, dout);
    if (opts.corrupt == component && n == 0) {
      analytic[0](0, 0) = analytic[0](0, 0) * 1.01 + 1e-6;
    }
    const Gradients numeric = finite_difference_grad(
        [&inst] { return loss_of(inst); }, inst.net.parameters(), opts.eps);
    const auto names = tensor_names(inst.net);
    for (std::size_t t = 0; t < analytic.size(); ++t) {
      const double err = max_relative_error({analytic[t]}, {numeric[t]});
      if (row.worst_tensor.empty() || err > row.max_rel_error) {
        row.max_rel_error = err;
        row.worst_tensor = names[t];
      }
    }
    ++row.instances;
  }
  row.passed = row.max_rel_error < opts.tolerance;
  return row;
}

}  // namespace

std::vector<std::string> gradcheck_components() {
  return {"dense", "noisy", "residual_block", "q_network", "q_network_dense"};
}

std::vector<GradcheckRow> run_gradcheck(const GradcheckOptions& opts) {
  if (opts.instances < 1) throw OutOfRangeError("gradcheck needs at least one instance");
  if (!opts.corrupt.empty()) {
    bool known = false;
    for (const auto& c : gradcheck_components()) known = known || c == opts.corrupt;
    if (!known) throw OutOfRangeError("unknown gradcheck component '" + opts.corrupt + "'");
  }
  std::vector<GradcheckRow> rows;
  Rng rng(opts.seed);
  for (const auto& c : gradcheck_components()) rows.push_back(check_component(c, opts, rng));
  return rows;
}

}  // namespace ndqn
