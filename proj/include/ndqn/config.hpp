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

// Training configuration. Every field is reachable through a string key so
// that config files, command-line flags and the run manifest share one
// schema.

#ifndef NDQN_CONFIG_HPP_
#define NDQN_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ndqn/agent.hpp"
#include "ndqn/env.hpp"
#include "ndqn/nn.hpp"

namespace ndqn {

enum class Variant { kStandardDqn, kNoisyDqn, kDoubleDqn, kImprovedNoisyDqn };

inline constexpr Variant kAllVariants[] = {
    Variant::kImprovedNoisyDqn, Variant::kNoisyDqn, Variant::kDoubleDqn,
    Variant::kStandardDqn};

std::string_view variant_name(Variant v);
// Accepts canonical names and the short forms improved/noisy/double/standard.
Variant parse_variant(std::string_view name);

// How each variant is assembled.
struct VariantWiring {
  BlockKind block_kind;
  bool residual;
  bool epsilon_greedy;
  TargetRule target_rule;
  bool soft_update;
  bool noise_schedule;  // adaptive alpha; otherwise fixed_alpha (noisy blocks)
  bool lr_schedule;     // warm-up + cosine; otherwise constant lr
  bool loss_clipping;   // smoothed-loss gradient clipping
};

VariantWiring wiring_for(Variant v);

enum class MapSource { kDefault, kGenerated };
enum class ScheduleUnit { kGradientStep, kEpisode };

struct TrainConfig {
  Variant variant = Variant::kImprovedNoisyDqn;
  std::optional<std::uint64_t> seed;  // required, no default
  std::int64_t episodes = 5000;

  MapSource map_source = MapSource::kDefault;
  std::uint64_t map_seed = 7;
  double map_density = 0.05;

  EnvParams env;
  RewardWeights reward = RewardWeights::defaults();

  int hidden_width = 128;
  double sigma0 = 0.5;
  OptimizerKind optimizer = OptimizerKind::kAdam;

  double gamma = 0.99;
  std::int64_t batch_size = 64;
  std::int64_t replay_capacity = 50000;
  double smoothing_lambda = 0.9;
  bool loss_clipping = true;
  double clip_norm = 10.0;
  double clip_loss_ratio = 5.0;

  double tau = 0.005;
  std::int64_t hard_update_period = 1000;  // C, gradient steps
  std::int64_t noise_reset_period = 100;   // k, gradient steps

  double alpha_min = 0.1;
  double alpha_max = 1.0;
  double alpha_decay_fraction = 0.6;
  std::int64_t alpha_decay_steps = 0;  // 0: alpha_decay_fraction of the plan
  bool noise_feedback = true;
  ScheduleUnit noise_schedule_unit = ScheduleUnit::kGradientStep;
  double fixed_alpha = 1.0;  // standard noisy variant
  std::int64_t success_window = 100;

  double lr = 1e-3;
  std::int64_t lr_warmup_steps = 1000;
  std::int64_t lr_total_steps = 0;  // 0: planned gradient steps
  // Gradient-step plan = episodes * planned_steps_per_episode.
  std::int64_t planned_steps_per_episode = 40;

  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.5;

  std::int64_t trailing_window = 500;
  std::int64_t progress_every = 100;

  // Derived quantities, fixed before a run starts.
  std::int64_t planned_gradient_steps() const;
  std::int64_t resolved_alpha_decay() const;
  std::int64_t resolved_lr_total_steps() const;
  // Capped at half the total so that very short runs still validate.
  std::int64_t resolved_lr_warmup_steps() const;

  // Throws ConfigError naming the first offending key.
  void validate() const;
};

// Ordered list of every configuration key.
const std::vector<std::string>& config_keys();

// Throws ConfigError(key) on unknown keys or unparsable values.
void set_config_value(TrainConfig& cfg, std::string_view key,
                      std::string_view value);
std::string get_config_value(const TrainConfig& cfg, std::string_view key);

// "key = value" lines; '#' starts a comment. Later lines win.
std::vector<std::pair<std::string, std::string>> parse_config_text(
    std::string_view text);
void apply_config_text(TrainConfig& cfg, std::string_view text);

// Bundled presets: "smoke" (200 episodes) and "paper" (5000 episodes).
void apply_preset(TrainConfig& cfg, std::string_view preset);

// key = value for every key, in config_keys() order.
std::string format_config(const TrainConfig& cfg);

GridMap resolve_map(const TrainConfig& cfg);

}  // namespace ndqn

#endif  // NDQN_CONFIG_HPP_
