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

#include "ndqn/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <string>

namespace ndqn {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kStandardDqn: return "standard_dqn";
    case Variant::kNoisyDqn: return "noisy_dqn";
    case Variant::kDoubleDqn: return "double_dqn";
    case Variant::kImprovedNoisyDqn: return "improved_noisy_dqn";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "standard_dqn" || name == "standard") return Variant::kStandardDqn;
  if (name == "noisy_dqn" || name == "noisy") return Variant::kNoisyDqn;
  if (name == "double_dqn" || name == "double") return Variant::kDoubleDqn;
  if (name == "improved_noisy_dqn" || name == "improved") {
    return Variant::kImprovedNoisyDqn;
  }
  throw ConfigError("variant", "unknown variant '" + std::string(name) + "'");
}

VariantWiring wiring_for(Variant v) {
  switch (v) {
    case Variant::kStandardDqn:
      return {BlockKind::kDense, false, true, TargetRule::kVanilla,
              false, false, false, false};
    case Variant::kNoisyDqn:
      return {BlockKind::kNoisy, false, false, TargetRule::kVanilla,
              false, false, false, false};
    case Variant::kDoubleDqn:
      return {BlockKind::kDense, false, true, TargetRule::kDouble,
              false, false, false, false};
    case Variant::kImprovedNoisyDqn:
      return {BlockKind::kNoisy, true, false, TargetRule::kDouble,
              true, true, true, true};
  }
  throw ConfigError("variant", "unknown variant");
}

std::int64_t TrainConfig::planned_gradient_steps() const {
  return episodes * planned_steps_per_episode;
}

std::int64_t TrainConfig::resolved_alpha_decay() const {
  if (alpha_decay_steps > 0) return alpha_decay_steps;
  const double plan = noise_schedule_unit == ScheduleUnit::kEpisode
                          ? static_cast<double>(episodes)
                          : static_cast<double>(planned_gradient_steps());
  return std::max<std::int64_t>(1, std::llround(alpha_decay_fraction * plan));
}

std::int64_t TrainConfig::resolved_lr_total_steps() const {
  return lr_total_steps > 0 ? lr_total_steps : planned_gradient_steps();
}

std::int64_t TrainConfig::resolved_lr_warmup_steps() const {
  return std::max<std::int64_t>(1, std::min(lr_warmup_steps, resolved_lr_total_steps() / 2));
}

namespace {

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

void TrainConfig::validate() const {
  require(seed.has_value(), "seed", "seed is required");
  require(episodes >= 1, "episodes", "episodes must be >= 1");
  if (map_source == MapSource::kGenerated) {
    require(map_density >= 0.0 && map_density < 0.4, "map_density",
            "map_density must lie in [0, 0.4)");
  }
  require(env.t_max >= 1, "t_max", "t_max must be >= 1");
  require(env.beta > 0.0 && std::isfinite(env.beta), "beta", "beta must be > 0");
  require(env.d_min >= 0.0, "d_min", "d_min must be >= 0");
  require(env.sigma_min >= 0.0 && env.sigma_min <= 1.0, "sigma_min",
          "sigma_min must lie in [0, 1]");
  reward.validate();
  require(hidden_width >= 1, "hidden_width", "hidden_width must be >= 1");
  require(sigma0 > 0.0, "sigma0", "sigma0 must be > 0");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma", "gamma must lie in [0, 1]");
  require(batch_size >= 1, "batch_size", "batch_size must be >= 1");
  require(replay_capacity > batch_size, "replay_capacity",
          "replay_capacity must exceed batch_size");
  require(smoothing_lambda > 0.0 && smoothing_lambda <= 1.0, "smoothing_lambda",
          "smoothing_lambda must lie in (0, 1]");
  require(clip_norm > 0.0, "clip_norm", "clip_norm must be > 0");
  require(clip_loss_ratio > 0.0, "clip_loss_ratio", "clip_loss_ratio must be > 0");
  require(tau > 0.0 && tau <= 1.0, "tau", "tau must lie in (0, 1]");
  require(hard_update_period >= 1, "hard_update_period",
          "hard_update_period must be >= 1");
  require(noise_reset_period >= 1, "noise_reset_period",
          "noise_reset_period must be >= 1");
  require(alpha_min >= 0.0, "alpha_min", "alpha_min must be >= 0");
  require(alpha_max >= alpha_min, "alpha_max", "alpha_max must be >= alpha_min");
  require(alpha_decay_fraction > 0.0, "alpha_decay_fraction",
          "alpha_decay_fraction must be > 0");
  require(alpha_decay_steps >= 0, "alpha_decay_steps",
          "alpha_decay_steps must be >= 0");
  require(fixed_alpha >= 0.0, "fixed_alpha", "fixed_alpha must be >= 0");
  require(success_window >= 1, "success_window", "success_window must be >= 1");
  require(lr > 0.0, "lr", "lr must be > 0");
  require(planned_steps_per_episode >= 1, "planned_steps_per_episode",
          "planned_steps_per_episode must be >= 1");
  require(lr_total_steps >= 0, "lr_total_steps", "lr_total_steps must be >= 0");
  require(lr_warmup_steps >= 1, "lr_warmup_steps", "lr_warmup_steps must be >= 1");
  require(resolved_lr_total_steps() >= 2, "lr_total_steps", "lr_total_steps must be >= 2");
  require(eps_start >= 0.0 && eps_start <= 1.0, "eps_start",
          "eps_start must lie in [0, 1]");
  require(eps_end >= 0.0 && eps_end <= 1.0, "eps_end", "eps_end must lie in [0, 1]");
  require(eps_decay_fraction >= 0.0 && eps_decay_fraction <= 1.0,
          "eps_decay_fraction", "eps_decay_fraction must lie in [0, 1]");
  require(trailing_window >= 1, "trailing_window", "trailing_window must be >= 1");
  require(progress_every >= 0, "progress_every", "progress_every must be >= 0");
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(std::string(key),
                      "cannot parse '" + std::string(text) + "' for " +
                          std::string(key));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw ConfigError(std::string(key), "expected true/false for " + std::string(key));
}

struct Field {
  std::string key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, std::string_view)> set;
};

template <typename T>
Field number_field(std::string key, T TrainConfig::*member) {
  return {key,
          [member](const TrainConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          },
          [member, key](TrainConfig& c, std::string_view v) {
            c.*member = parse_number<T>(key, v);
          }};
}

template <typename T>
Field env_field(std::string key, T EnvParams::*member) {
  return {key,
          [member](const TrainConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.env.*member);
            } else {
              return std::to_string(c.env.*member);
            }
          },
          [member, key](TrainConfig& c, std::string_view v) {
            c.env.*member = parse_number<T>(key, v);
          }};
}

Field bool_field(std::string key, bool TrainConfig::*member) {
  return {key,
          [member](const TrainConfig& c) {
            return std::string(c.*member ? "true" : "false");
          },
          [member, key](TrainConfig& c, std::string_view v) {
            c.*member = parse_bool(key, v);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"variant",
                 [](const TrainConfig& c) { return std::string(variant_name(c.variant)); },
                 [](TrainConfig& c, std::string_view v) { c.variant = parse_variant(v); }});
    f.push_back({"seed",
                 [](const TrainConfig& c) {
                   return c.seed ? std::to_string(*c.seed) : std::string("unset");
                 },
                 [](TrainConfig& c, std::string_view v) {
                   c.seed = parse_number<std::uint64_t>("seed", v);
                 }});
    f.push_back(number_field("episodes", &TrainConfig::episodes));
    f.push_back({"map",
                 [](const TrainConfig& c) {
                   return std::string(c.map_source == MapSource::kDefault ? "default"
                                                                          : "generated");
                 },
                 [](TrainConfig& c, std::string_view v) {
                   if (v == "default") {
                     c.map_source = MapSource::kDefault;
                   } else if (v == "generated") {
                     c.map_source = MapSource::kGenerated;
                   } else {
                     throw ConfigError("map", "map must be default or generated");
                   }
                 }});
    f.push_back(number_field("map_seed", &TrainConfig::map_seed));
    f.push_back(number_field("map_density", &TrainConfig::map_density));
    f.push_back(env_field("t_max", &EnvParams::t_max));
    f.push_back(env_field("beta", &EnvParams::beta));
    f.push_back(env_field("d_min", &EnvParams::d_min));
    f.push_back(env_field("sigma_min", &EnvParams::sigma_min));
    for (int i = 0; i < 7; ++i) {
      const std::string key = "nu" + std::to_string(i + 1);
      f.push_back({key,
                   [i](const TrainConfig& c) { return format_double(c.reward.nu[i]); },
                   [i, key](TrainConfig& c, std::string_view v) {
                     c.reward.nu[i] = parse_number<double>(key, v);
                   }});
    }
    f.push_back(number_field("hidden_width", &TrainConfig::hidden_width));
    f.push_back(number_field("sigma0", &TrainConfig::sigma0));
    f.push_back({"optimizer",
                 [](const TrainConfig& c) {
                   return std::string(c.optimizer == OptimizerKind::kAdam ? "adam" : "sgd");
                 },
                 [](TrainConfig& c, std::string_view v) {
                   if (v == "adam") {
                     c.optimizer = OptimizerKind::kAdam;
                   } else if (v == "sgd") {
                     c.optimizer = OptimizerKind::kSgd;
                   } else {
                     throw ConfigError("optimizer", "optimizer must be adam or sgd");
                   }
                 }});
    f.push_back(number_field("gamma", &TrainConfig::gamma));
    f.push_back(number_field("batch_size", &TrainConfig::batch_size));
    f.push_back(number_field("replay_capacity", &TrainConfig::replay_capacity));
    f.push_back(number_field("smoothing_lambda", &TrainConfig::smoothing_lambda));
    f.push_back(bool_field("loss_clipping", &TrainConfig::loss_clipping));
    f.push_back(number_field("clip_norm", &TrainConfig::clip_norm));
    f.push_back(number_field("clip_loss_ratio", &TrainConfig::clip_loss_ratio));
    f.push_back(number_field("tau", &TrainConfig::tau));
    f.push_back(number_field("hard_update_period", &TrainConfig::hard_update_period));
    f.push_back(number_field("noise_reset_period", &TrainConfig::noise_reset_period));
    f.push_back(number_field("alpha_min", &TrainConfig::alpha_min));
    f.push_back(number_field("alpha_max", &TrainConfig::alpha_max));
    f.push_back(number_field("alpha_decay_fraction", &TrainConfig::alpha_decay_fraction));
    f.push_back(number_field("alpha_decay_steps", &TrainConfig::alpha_decay_steps));
    f.push_back(bool_field("noise_feedback", &TrainConfig::noise_feedback));
    f.push_back({"noise_schedule_unit",
                 [](const TrainConfig& c) {
                   return std::string(c.noise_schedule_unit == ScheduleUnit::kEpisode
                                          ? "episode"
                                          : "gradient_step");
                 },
                 [](TrainConfig& c, std::string_view v) {
                   if (v == "gradient_step") {
                     c.noise_schedule_unit = ScheduleUnit::kGradientStep;
                   } else if (v == "episode") {
                     c.noise_schedule_unit = ScheduleUnit::kEpisode;
                   } else {
                     throw ConfigError("noise_schedule_unit",
                                       "noise_schedule_unit must be gradient_step or episode");
                   }
                 }});
    f.push_back(number_field("fixed_alpha", &TrainConfig::fixed_alpha));
    f.push_back(number_field("success_window", &TrainConfig::success_window));
    f.push_back(number_field("lr", &TrainConfig::lr));
    f.push_back(number_field("lr_warmup_steps", &TrainConfig::lr_warmup_steps));
    f.push_back(number_field("lr_total_steps", &TrainConfig::lr_total_steps));
    f.push_back(number_field("planned_steps_per_episode",
                             &TrainConfig::planned_steps_per_episode));
    f.push_back(number_field("eps_start", &TrainConfig::eps_start));
    f.push_back(number_field("eps_end", &TrainConfig::eps_end));
    f.push_back(number_field("eps_decay_fraction", &TrainConfig::eps_decay_fraction));
    f.push_back(number_field("trailing_window", &TrainConfig::trailing_window));
    f.push_back(number_field("progress_every", &TrainConfig::progress_every));
    return f;
  }();
  return table;
}

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError(std::string(key), "unknown config key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(TrainConfig& cfg, std::string_view key,
                      std::string_view value) {
  find_field(key).set(cfg, trim(value));
}

std::string get_config_value(const TrainConfig& cfg, std::string_view key) {
  return find_field(key).get(cfg);
}

std::vector<std::pair<std::string, std::string>> parse_config_text(
    std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line),
                        "line " + std::to_string(line_no) + ": expected key = value");
    }
    out.emplace_back(std::string(trim(line.substr(0, eq))),
                     std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

void apply_config_text(TrainConfig& cfg, std::string_view text) {
  for (const auto& [key, value] : parse_config_text(text)) {
    set_config_value(cfg, key, value);
  }
}

void apply_preset(TrainConfig& cfg, std::string_view preset) {
  if (preset == "smoke") {
    cfg.episodes = 200;
  } else if (preset == "paper") {
    cfg.episodes = 5000;
  } else {
    throw ConfigError("preset", "unknown preset '" + std::string(preset) +
                                    "' (expected smoke or paper)");
  }
}

std::string format_config(const TrainConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  out += "# resolved\n";
  out += "# planned_gradient_steps = " + std::to_string(cfg.planned_gradient_steps()) + "\n";
  out += "# alpha_decay = " + std::to_string(cfg.resolved_alpha_decay()) + "\n";
  out += "# lr_warmup = " + std::to_string(cfg.resolved_lr_warmup_steps()) + "\n";
  out += "# lr_total = " + std::to_string(cfg.resolved_lr_total_steps()) + "\n";
  return out;
}

GridMap resolve_map(const TrainConfig& cfg) {
  if (cfg.map_source == MapSource::kGenerated) {
    return generate_map(cfg.map_seed, cfg.map_density);
  }
  return build_default_map();
}

}  // namespace ndqn
