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

#include "ndqn/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ndqn {

double performance_adjust(double success_rate) {
  if (!(success_rate >= 0.0 && success_rate <= 1.0)) {
    throw OutOfRangeError("success rate must lie in [0, 1]");
  }
  if (success_rate < 0.3) return 1.2;
  if (success_rate > 0.8) return 0.9;
  return 1.0;
}

void NoiseSchedule::validate() const {
  if (!(alpha_min >= 0.0)) throw ConfigError("alpha_min", "alpha_min must be >= 0");
  if (!(alpha_max >= alpha_min)) {
    throw ConfigError("alpha_max", "alpha_max must be >= alpha_min");
  }
  if (decay_steps < 1) throw ConfigError("alpha_decay_steps", "decay steps must be >= 1");
}

double noise_scale(std::int64_t n, const NoiseSchedule& sched,
                   double success_rate) {
  if (n < 0) throw OutOfRangeError("noise_scale: step must be >= 0");
  double bracket = sched.alpha_min;
  if (n < sched.decay_steps) {
    const double frac =
        static_cast<double>(n) / static_cast<double>(sched.decay_steps);
    bracket = sched.alpha_min + (sched.alpha_max - sched.alpha_min) * (1.0 - frac);
  }
  const double g = sched.feedback_enabled ? performance_adjust(success_rate) : 1.0;
  return std::max(bracket * g, 0.0);
}

SuccessWindow::SuccessWindow(std::size_t window) : window_(window) {
  if (window == 0) throw OutOfRangeError("success window must be positive");
}

void SuccessWindow::record(bool success) {
  flags_.push_back(success);
  successes_ += success ? 1 : 0;
  if (flags_.size() > window_) {
    successes_ -= flags_.front() ? 1 : 0;
    flags_.pop_front();
  }
}

double SuccessWindow::rate() const {
  if (flags_.empty()) return 0.0;
  return static_cast<double>(successes_) / static_cast<double>(flags_.size());
}

void LrSchedule::validate() const {
  if (!(eta0 > 0.0)) throw ConfigError("lr", "learning rate must be > 0");
  if (!(warmup_steps > 0 && warmup_steps < total_steps)) {
    throw ConfigError("lr_warmup_steps",
                      "need 0 < warmup steps < total steps");
  }
}

double learning_rate(std::int64_t n, const LrSchedule& s) {
  if (n < 0 || n > s.total_steps) {
    throw OutOfRangeError("learning_rate: step outside [0, total_steps]");
  }
  if (n <= s.warmup_steps) {
    return s.eta0 * static_cast<double>(n) / static_cast<double>(s.warmup_steps);
  }
  const double progress = static_cast<double>(n - s.warmup_steps) /
                          static_cast<double>(s.total_steps - s.warmup_steps);
  return s.eta0 * (1.0 + std::cos(std::numbers::pi * progress)) / 2.0;
}

double epsilon_greedy_rate(std::int64_t episode, double eps_start,
                           double eps_end, std::int64_t decay_episodes) {
  if (decay_episodes <= 0 || episode >= decay_episodes) return eps_end;
  const double frac =
      static_cast<double>(episode) / static_cast<double>(decay_episodes);
  return eps_start + (eps_end - eps_start) * frac;
}

namespace {

void check_same_shapes(const ConstParamList& a, const ParamList& b) {
  if (a.size() != b.size()) throw ShapeError("networks have different layouts");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) {
      throw ShapeError("networks have different tensor shapes");
    }
  }
}

}  // namespace

void soft_update(const Network& online, Network& target, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw OutOfRangeError("tau must lie in (0, 1]");
  const ConstParamList src = online.parameters();
  ParamList dst = target.parameters();
  check_same_shapes(src, dst);
  // Incremental form: equal tensors stay bit-identical.
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (tau == 1.0) {
      dst[i] = src[i];
    } else {
      dst[i] += tau * (src[i] - dst[i]);
    }
  }
}

void hard_update(const Network& online, Network& target) {
  const ConstParamList src = online.parameters();
  ParamList dst = target.parameters();
  check_same_shapes(src, dst);
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
}

}  // namespace ndqn
