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

#include "ndqn/agent.hpp"

#include <algorithm>
#include <string>

namespace ndqn {

QNetwork build_q_network(const QNetworkSpec& spec, Rng& rng) {
  if (spec.feature_widths.empty()) {
    throw ShapeError("q-network needs at least one feature layer");
  }
  std::vector<Layer> layers;
  Eigen::Index width = spec.input_size;
  for (int w : spec.feature_widths) {
    layers.emplace_back(DenseLayer{init_dense(width, w, rng), Activation::kRelu});
    width = w;
  }
  const Activation block_act =
      spec.residual ? Activation::kResidual : Activation::kRelu;
  for (int b = 0; b < spec.num_blocks; ++b) {
    if (spec.block_kind == BlockKind::kNoisy) {
      layers.emplace_back(
          NoisyLayer{init_noisy(width, width, spec.sigma0, rng), block_act});
    } else {
      layers.emplace_back(DenseLayer{init_dense(width, width, rng), block_act});
    }
  }
  layers.emplace_back(
      DenseLayer{init_dense(width, spec.num_actions, rng), Activation::kLinear});
  return QNetwork(std::move(layers));
}

Vector q_forward(const QNetwork& net, const Vector& state, double alpha,
                 Mode mode) {
  return net.forward(state, ForwardMode{mode, alpha});
}

int argmax(const Eigen::Ref<const Vector>& values) {
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

int select_action(const QNetwork& net, const Vector& state, double alpha) {
  return argmax(q_forward(net, state, alpha, Mode::kTrain));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw OutOfRangeError("replay capacity must be positive");
  storage_.reserve(std::min<std::size_t>(capacity, 1u << 16));
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw OutOfRangeError("replay index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
  return storage_[(oldest + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch_size,
                                                    Rng& rng) const {
  if (batch_size == 0 || size_ < batch_size) {
    throw InsufficientSamplesError("replay holds " + std::to_string(size_) +
                                   " transitions, batch needs " +
                                   std::to_string(batch_size));
  }
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<const Transition*> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) out.push_back(&storage_[pick(rng)]);
  return out;
}

void replay_push(ReplayBuffer& buf, Transition t) { buf.push(std::move(t)); }

std::vector<const Transition*> replay_sample(const ReplayBuffer& buf,
                                             std::size_t batch_size, Rng& rng) {
  return buf.sample(batch_size, rng);
}

Vector compute_targets(TargetRule rule, const QNetwork& online,
                       const QNetwork& target, const Vector& rewards,
                       const Matrix& next_states, const std::vector<bool>& dones,
                       double gamma, double alpha) {
  const Eigen::Index batch = next_states.cols();
  if (rewards.size() != batch || static_cast<Eigen::Index>(dones.size()) != batch) {
    throw ShapeError("compute_targets: batch size mismatch");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw OutOfRangeError("discount must lie in [0, 1]");
  }
  const ForwardMode mode{Mode::kTrain, alpha};
  const Matrix target_q = target.forward(next_states, mode);
  Matrix online_q;
  if (rule == TargetRule::kDouble) online_q = online.forward(next_states, mode);
  Vector y = rewards;
  for (Eigen::Index i = 0; i < batch; ++i) {
    if (dones[static_cast<std::size_t>(i)]) continue;
    const double bootstrap = rule == TargetRule::kDouble
                                 ? target_q(argmax(online_q.col(i)), i)
                                 : target_q.col(i).maxCoeff();
    y[i] += gamma * bootstrap;
  }
  return y;
}

double double_dqn_target(const QNetwork& online, const QNetwork& target,
                         const Transition& t, double gamma, double alpha) {
  return compute_targets(TargetRule::kDouble, online, target,
                         Vector::Constant(1, t.reward), Matrix(t.next_state),
                         {t.done}, gamma, alpha)[0];
}

double vanilla_dqn_target(const QNetwork& target, const Transition& t,
                          double gamma, double alpha) {
  return compute_targets(TargetRule::kVanilla, target, target,
                         Vector::Constant(1, t.reward), Matrix(t.next_state),
                         {t.done}, gamma, alpha)[0];
}

double td_loss(const Vector& q_taken, const Vector& y) {
  if (q_taken.size() == 0 || q_taken.size() != y.size()) {
    throw ShapeError("td_loss: batch must be non-empty and sizes must match");
  }
  return (y - q_taken).squaredNorm() / static_cast<double>(q_taken.size());
}

Vector gather_actions(const Matrix& q, const std::vector<int>& actions) {
  if (static_cast<Eigen::Index>(actions.size()) != q.cols()) {
    throw ShapeError("gather_actions: one action per column expected");
  }
  Vector out(q.cols());
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    if (a < 0 || a >= q.rows()) throw OutOfRangeError("action index out of range");
    out[i] = q(a, i);
  }
  return out;
}

Matrix td_loss_output_grad(const Matrix& q, const std::vector<int>& actions,
                           const Vector& y) {
  const Vector taken = gather_actions(q, actions);
  if (y.size() != taken.size()) throw ShapeError("td_loss_output_grad: size mismatch");
  Matrix dq = Matrix::Zero(q.rows(), q.cols());
  const auto b = static_cast<double>(q.cols());
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    dq(actions[static_cast<std::size_t>(i)], i) = 2.0 * (taken[i] - y[i]) / b;
  }
  return dq;
}

double update_smoothed_loss(SmoothedLoss& s, double current) {
  if (!s.initialized) {
    s.value = current;
    s.initialized = true;
  } else {
    s.value = s.lambda * current + (1.0 - s.lambda) * s.value;
  }
  return s.value;
}

}  // namespace ndqn
