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

// Noise-scale, learning-rate and exploration schedules; target-network
// updates.

#ifndef NDQN_SCHEDULES_HPP_
#define NDQN_SCHEDULES_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>

#include "ndqn/common.hpp"
#include "ndqn/network.hpp"

namespace ndqn {

// 1.2 below a 0.3 success rate, 0.9 above 0.8, 1.0 otherwise.
double performance_adjust(double success_rate);

struct NoiseSchedule {
  double alpha_min = 0.1;
  double alpha_max = 1.0;
  std::int64_t decay_steps = 1;
  bool feedback_enabled = true;

  void validate() const;
};

// [alpha_min + (alpha_max - alpha_min) * (1 - n / decay)] * g(p), with the
// bracket floored at alpha_min once n >= decay_steps.
double noise_scale(std::int64_t n, const NoiseSchedule& sched,
                   double success_rate);

// Success flags of the most recent `window` episodes.
class SuccessWindow {
 public:
  explicit SuccessWindow(std::size_t window = 100);

  void record(bool success);
  // 0 over an empty window.
  double rate() const;
  std::size_t size() const { return flags_.size(); }
  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  std::size_t successes_ = 0;
  std::deque<bool> flags_;
};

inline void record_episode(SuccessWindow& w, bool success) { w.record(success); }

struct LrSchedule {
  double eta0 = 1e-3;
  std::int64_t warmup_steps = 1000;
  std::int64_t total_steps = 200000;

  void validate() const;
};

// Linear warm-up to eta0, then cosine annealing to 0 at total_steps.
// Throws OutOfRangeError for n outside [0, total_steps].
double learning_rate(std::int64_t n, const LrSchedule& s);

// Linear epsilon decay over the first `decay_episodes` episodes.
double epsilon_greedy_rate(std::int64_t episode, double eps_start,
                           double eps_end, std::int64_t decay_episodes);

// target <- tau * online + (1 - tau) * target on every learnable tensor.
// Noise buffers are left alone.
void soft_update(const Network& online, Network& target, double tau);
// target <- online (learnable tensors only).
void hard_update(const Network& online, Network& target);

}  // namespace ndqn

#endif  // NDQN_SCHEDULES_HPP_
