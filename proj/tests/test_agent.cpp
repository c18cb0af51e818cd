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

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "ndqn/agent.hpp"

using namespace ndqn;

namespace {

// A one-layer linear "network" whose output for a one-hot state is the
// corresponding column of `table` (plus bias zero).
QNetwork table_net(const Matrix& table) {
  return QNetwork({DenseLayer{DenseParams{table, Vector::Zero(table.rows())},
                              Activation::kLinear}});
}

Vector one_hot(int n, int i) {
  Vector v = Vector::Zero(n);
  v[i] = 1.0;
  return v;
}

Transition make(int id, double reward = 0.0) {
  Transition t;
  t.state = Vector::Constant(1, id);
  t.action = id % 5;
  t.reward = reward;
  t.next_state = Vector::Constant(1, id + 1);
  return t;
}

QNetworkSpec tiny_spec(BlockKind kind, bool residual) {
  QNetworkSpec s;
  s.input_size = 6;
  s.feature_widths = {8, 8};
  s.block_kind = kind;
  s.residual = residual;
  return s;
}

}  // namespace

TEST_CASE("q_forward: zero network gives zero values") {
  Rng rng(1);
  QNetwork net = build_q_network(QNetworkSpec{}, rng);
  for (ParamView p : net.parameters()) p.setZero();
  const Vector s = Vector::Random(228);
  CHECK(q_forward(net, s, 1.0, Mode::kTrain) == Vector::Zero(5));
}

TEST_CASE("q_forward: deterministic in eval, noise held in train") {
  Rng rng(2);
  QNetwork net = build_q_network(QNetworkSpec{}, rng);
  const Vector s = Vector::Random(228);
  CHECK(q_forward(net, s, 0.0, Mode::kEval) == q_forward(net, s, 0.0, Mode::kEval));
  CHECK(q_forward(net, s, 1.0, Mode::kTrain) == q_forward(net, s, 1.0, Mode::kTrain));
  CHECK_THROWS_AS(q_forward(net, Vector::Zero(10), 0.0, Mode::kEval), ShapeError);
}

TEST_CASE("argmax and select_action tie rule") {
  CHECK(argmax(Vector{{1.0, 5.0, 2.0, 0.0, 3.0}}) == 1);
  CHECK(argmax(Vector::Constant(5, 2.0)) == 0);
  CHECK(argmax(Vector{{0.0, 4.0, 4.0, 1.0, 4.0}}) == 1);

  Matrix table = Matrix::Zero(5, 2);
  table.col(0) << 1, 5, 2, 0, 3;
  const QNetwork net = table_net(table);
  CHECK(select_action(net, one_hot(2, 0), 0.0) == 1);
  CHECK(select_action(net, one_hot(2, 1), 0.0) == 0);
}

TEST_CASE("select_action is invariant to a constant shift") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix table = Matrix::Random(5, 1);
    const int a = select_action(table_net(table), one_hot(1, 0), 0.0);
    table.array() += 17.25;
    CHECK(select_action(table_net(table), one_hot(1, 0), 0.0) == a);
  }
}

TEST_CASE("noisy selection is non-degenerate under resampling") {
  Rng rng(4);
  QNetwork net = build_q_network(tiny_spec(BlockKind::kNoisy, true), rng);
  const Vector s = Vector::Random(6).cwiseAbs();
  std::map<int, int> counts;
  for (int k = 0; k < 10000; ++k) {
    net.reset_noise(rng);
    ++counts[select_action(net, s, 5.0)];
  }
  CHECK(counts.size() >= 2);
  for (const auto& [a, c] : counts) CHECK(c < 10000);
}

TEST_CASE("vanilla target examples") {
  Matrix table = Matrix::Zero(5, 2);
  table.col(1) << 1, 9, 2, 0, 0;
  const QNetwork target = table_net(table);
  Transition t;
  t.state = one_hot(2, 0);
  t.next_state = one_hot(2, 1);
  t.reward = 1.0;
  CHECK(vanilla_dqn_target(target, t, 0.9) == doctest::Approx(9.1));
  t.done = true;
  CHECK(vanilla_dqn_target(target, t, 0.9) == 1.0);
}

TEST_CASE("double target examples") {
  Matrix online_table = Matrix::Zero(5, 2);
  Matrix target_table = Matrix::Zero(5, 2);
  online_table.col(1) << 0, 0, 4, 1, 0;  // argmax a2
  target_table.col(1) << 10, 10, 3, 10, 10;
  const QNetwork online = table_net(online_table);
  const QNetwork target = table_net(target_table);
  Transition t;
  t.state = one_hot(2, 0);
  t.next_state = one_hot(2, 1);
  t.reward = 1.0;
  CHECK(double_dqn_target(online, target, t, 0.5, 0.0) == 2.5);
  CHECK(double_dqn_target(online, target, t, 0.0, 0.0) == 1.0);
  t.done = true;
  t.reward = 7.0;
  CHECK(double_dqn_target(online, target, t, 0.5, 0.0) == 7.0);
  // identical networks: double collapses to vanilla
  t.done = false;
  CHECK(double_dqn_target(target, target, t, 0.9, 0.0) == vanilla_dqn_target(target, t, 0.9));
}

TEST_CASE("batched targets agree with the per-transition forms") {
  Rng rng(5);
  const QNetwork online = build_q_network(tiny_spec(BlockKind::kNoisy, true), rng);
  const QNetwork target = build_q_network(tiny_spec(BlockKind::kNoisy, true), rng);
  Matrix next = Matrix::Random(6, 8);
  Vector rewards = Vector::Random(8);
  std::vector<bool> dones{false, true, false, false, true, false, false, false};
  const Vector yd = compute_targets(TargetRule::kDouble, online, target, rewards, next,
                                    dones, 0.99, 0.6);
  const Vector yv = compute_targets(TargetRule::kVanilla, online, target, rewards, next,
                                    dones, 0.99, 0.6);
  for (int i = 0; i < 8; ++i) {
    Transition t;
    t.reward = rewards[i];
    t.next_state = next.col(i);
    t.done = dones[static_cast<std::size_t>(i)];
    CHECK(yd[i] == doctest::Approx(double_dqn_target(online, target, t, 0.99, 0.6)));
    CHECK(yv[i] == doctest::Approx(vanilla_dqn_target(target, t, 0.99, 0.6)));
    CHECK(yd[i] <= yv[i] + 1e-12);
  }
  CHECK_THROWS_AS(compute_targets(TargetRule::kDouble, online, target, rewards, next,
                                  dones, 1.5, 0.0),
                  OutOfRangeError);
  CHECK_THROWS_AS(compute_targets(TargetRule::kDouble, online, target, Vector::Zero(3),
                                  next, dones, 0.9, 0.0),
                  ShapeError);
}

TEST_CASE("double target does not exceed vanilla on noisy synthetic tables") {
  // True values are all zero; both estimators see independent noise. The
  // max over noisy estimates is biased upward, the decoupled estimate is not.
  Rng rng(6);
  std::normal_distribution<double> noise(0.0, 1.0);
  double sum_double = 0.0;
  double sum_vanilla = 0.0;
  const int trials = 10000;
  for (int k = 0; k < trials; ++k) {
    Matrix online_table(5, 1);
    Matrix target_table(5, 1);
    for (int a = 0; a < 5; ++a) {
      online_table(a, 0) = noise(rng);
      target_table(a, 0) = noise(rng);
    }
    Transition t;
    t.next_state = one_hot(1, 0);
    t.reward = 0.0;
    sum_double += double_dqn_target(table_net(online_table), table_net(target_table), t,
                                    0.9, 0.0);
    sum_vanilla += vanilla_dqn_target(table_net(target_table), t, 0.9);
  }
  CHECK(sum_double / trials <= sum_vanilla / trials);
  CHECK(std::abs(sum_double / trials) < 0.05);
}

TEST_CASE("td_loss examples") {
  CHECK(td_loss(Vector{{1.0, 2.0}}, Vector{{1.0, 2.0}}) == 0.0);
  CHECK(td_loss(Vector{{1.0}}, Vector{{3.0}}) == 4.0);
  CHECK(td_loss(Vector{{0.0, 0.0}}, Vector{{1.0, 3.0}}) == 5.0);
  CHECK_THROWS_AS(td_loss(Vector(), Vector()), ShapeError);
}

TEST_CASE("td loss gradient treats targets as constants") {
  Rng rng(7);
  QNetwork online = build_q_network(tiny_spec(BlockKind::kNoisy, true), rng);
  QNetwork target = build_q_network(tiny_spec(BlockKind::kNoisy, true), rng);
  const Matrix s = Matrix::Random(6, 4).cwiseAbs();
  const Matrix s2 = Matrix::Random(6, 4).cwiseAbs();
  const Vector r = Vector::Random(4);
  const std::vector<bool> dones(4, false);
  const std::vector<int> actions{0, 3, 4, 1};
  const ForwardMode mode{Mode::kTrain, 0.5};
  const Vector y = compute_targets(TargetRule::kDouble, online, target, r, s2, dones, 0.9, 0.5);

  GradientTape tape;
  const Matrix q = online.forward(s, mode, &tape);
  const Gradients analytic = online.backward(tape, td_loss_output_grad(q, actions, y));
  const Gradients numeric = finite_difference_grad(
      [&] { return td_loss(gather_actions(online.forward(s, mode), actions), y); },
      online.parameters(), 1e-6);
  CHECK(max_relative_error(analytic, numeric) < 1e-4);

  // Moving the target network changes y, but for the same y the online
  // gradient is unchanged.
  for (ParamView p : target.parameters()) p.array() += 0.1;
  const Vector y2 = compute_targets(TargetRule::kDouble, online, target, r, s2, dones, 0.9, 0.5);
  CHECK(y2 != y);
  GradientTape tape2;
  const Matrix q2 = online.forward(s, mode, &tape2);
  const Gradients again = online.backward(tape2, td_loss_output_grad(q2, actions, y));
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i] == analytic[i]);
}

TEST_CASE("gather_actions and the output gradient") {
  const Matrix q{{1.0, 2.0}, {3.0, 4.0}};
  CHECK(gather_actions(q, {1, 0}) == Vector{{3.0, 2.0}});
  const Matrix g = td_loss_output_grad(q, {1, 0}, Vector{{2.0, 6.0}});
  CHECK(g == Matrix{{0.0, -4.0}, {1.0, 0.0}});
  CHECK_THROWS_AS(gather_actions(q, {0}), ShapeError);
  CHECK_THROWS_AS(gather_actions(q, {0, 2}), OutOfRangeError);
}

TEST_CASE("smoothed loss") {
  SmoothedLoss s;
  CHECK(update_smoothed_loss(s, 10.0) == 10.0);
  SmoothedLoss one{0.0, 1.0, false};
  update_smoothed_loss(one, 3.0);
  CHECK(update_smoothed_loss(one, 8.0) == 8.0);
  SmoothedLoss half{0.0, 0.5, false};
  update_smoothed_loss(half, 10.0);
  CHECK(update_smoothed_loss(half, 2.0) == 6.0);

  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  SmoothedLoss c{0.0, 0.9, false};
  double lo = 1e300;
  double hi = -1e300;
  for (int k = 0; k < 10000; ++k) {
    const double x = u(rng);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    const double v = update_smoothed_loss(c, x);
    REQUIRE(v >= lo);
    REQUIRE(v <= hi);
  }
}

TEST_CASE("replay ring eviction and sizes") {
  ReplayBuffer buf(2);
  CHECK_THROWS_AS(ReplayBuffer(0), OutOfRangeError);
  replay_push(buf, make(1));
  CHECK(buf.size() == 1);
  replay_push(buf, make(2));
  replay_push(buf, make(3));
  CHECK(buf.size() == 2);
  CHECK(buf.capacity() == 2);
  CHECK(buf.at(0).state[0] == 2.0);
  CHECK(buf.at(1).state[0] == 3.0);
  CHECK_THROWS_AS(buf.at(2), OutOfRangeError);
}

TEST_CASE("replay sampling") {
  Rng rng(9);
  ReplayBuffer one(4);
  replay_push(one, make(42));
  const auto s = replay_sample(one, 1, rng);
  REQUIRE(s.size() == 1);
  CHECK(s[0]->state[0] == 42.0);
  CHECK_THROWS_AS(replay_sample(one, 2, rng), InsufficientSamplesError);

  ReplayBuffer ten(10);
  for (int i = 0; i < 10; ++i) replay_push(ten, make(i));
  Rng a(10);
  Rng b(10);
  const auto x = replay_sample(ten, 8, a);
  const auto y = replay_sample(ten, 8, b);
  CHECK(x == y);

  std::vector<int> counts(10, 0);
  for (int k = 0; k < 100000; ++k) {
    ++counts[static_cast<std::size_t>(replay_sample(ten, 1, rng)[0]->state[0])];
  }
  for (int c : counts) CHECK(std::abs(c / 100000.0 - 0.1) < 0.01);
}
