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

#ifndef NDQN_AGENT_HPP_
#define NDQN_AGENT_HPP_

#include <cstddef>
#include <vector>

#include "ndqn/common.hpp"
#include "ndqn/network.hpp"

namespace ndqn {

enum class BlockKind { kDense, kNoisy };

// feature extractor (dense, ReLU) -> hidden blocks -> dense linear head.
struct QNetworkSpec {
  int input_size = 228;
  std::vector<int> feature_widths{128, 128};
  int num_blocks = 2;  // width = last feature width
  BlockKind block_kind = BlockKind::kNoisy;
  bool residual = true;  // x + relu(block(x)) instead of relu(block(x))
  double sigma0 = 0.5;
  int num_actions = 5;
};

using QNetwork = Network;

QNetwork build_q_network(const QNetworkSpec& spec, Rng& rng);

Vector q_forward(const QNetwork& net, const Vector& state, double alpha,
                 Mode mode);

// Index of the largest entry; ties go to the lowest index.
int argmax(const Eigen::Ref<const Vector>& values);

// Greedy over train-mode values with the currently held noise.
int select_action(const QNetwork& net, const Vector& state, double alpha);

struct Transition {
  Vector state;
  int action = 0;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

// Fixed-capacity ring; the oldest transition is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  // Uniform with replacement. Throws InsufficientSamplesError if
  // size() < batch_size.
  std::vector<const Transition*> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  std::vector<Transition> storage_;
};

void replay_push(ReplayBuffer& buf, Transition t);
std::vector<const Transition*> replay_sample(const ReplayBuffer& buf,
                                             std::size_t batch_size, Rng& rng);

enum class TargetRule { kVanilla, kDouble };

// Batched targets. next_states is input_size x batch.
//   vanilla: r + gamma * max_a Q_target(s', a)
//   double:  r + gamma * Q_target(s', argmax_a Q_online(s', a))
// Both networks run in train mode with noise scale `alpha` and their own
// noise buffers. Terminal transitions get y = r.
Vector compute_targets(TargetRule rule, const QNetwork& online,
                       const QNetwork& target, const Vector& rewards,
                       const Matrix& next_states, const std::vector<bool>& dones,
                       double gamma, double alpha);

double double_dqn_target(const QNetwork& online, const QNetwork& target,
                         const Transition& t, double gamma, double alpha);
double vanilla_dqn_target(const QNetwork& target, const Transition& t,
                          double gamma, double alpha = 0.0);

// mean_i (y_i - q_i)^2
double td_loss(const Vector& q_taken, const Vector& y);

// q(actions[i], i) for every column of a num_actions x batch value matrix.
Vector gather_actions(const Matrix& q, const std::vector<int>& actions);
// d td_loss / d q: zero except 2 (q_i - y_i) / batch at row actions[i].
Matrix td_loss_output_grad(const Matrix& q, const std::vector<int>& actions,
                           const Vector& y);

struct SmoothedLoss {
  double value = 0.0;
  double lambda = 0.9;
  bool initialized = false;
};

// First observation initializes; afterwards lambda * current + (1 - lambda) * value.
double update_smoothed_loss(SmoothedLoss& s, double current);

}  // namespace ndqn

#endif  // NDQN_AGENT_HPP_
