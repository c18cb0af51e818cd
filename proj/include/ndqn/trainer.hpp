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

// Training loop, evaluation, variant comparison and checkpoints.

#ifndef NDQN_TRAINER_HPP_
#define NDQN_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ndqn/agent.hpp"
#include "ndqn/config.hpp"
#include "ndqn/env.hpp"
#include "ndqn/network.hpp"
#include "ndqn/nn.hpp"

namespace ndqn {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr int kManifestVersion = 1;
inline constexpr int kMetricsVersion = 1;

struct EpisodeRecord {
  std::int64_t index = 0;
  double total_reward = 0.0;
  int steps = 0;
  bool success = false;
  TerminalCause terminal_cause = TerminalCause::kNone;
  double alpha_used = 0.0;  // noise scale in force at the last step
  double lr_used = 0.0;     // learning rate of the last gradient step, 0 if none

  bool operator==(const EpisodeRecord&) const = default;
};

// Learnable state of a run. Noise buffers are not part of it.
struct Checkpoint {
  Network online;
  Network target;
  OptimizerState optimizer;
  std::string manifest;  // JSON text
};

struct RunArtifacts {
  std::vector<EpisodeRecord> records;
  std::vector<std::vector<int>> actions;  // per episode, for replay
  Checkpoint final_state;
  std::string manifest;
  double wall_seconds = 0.0;
};

// Emitted after every environment step, once learning and the target update
// for that step are done.
struct StepEvent {
  std::int64_t episode = 0;
  int step = 0;                  // within the episode, 1-based
  std::int64_t env_steps = 0;    // total so far
  std::int64_t grad_steps = 0;   // total so far
  int action = 0;
  double reward = 0.0;
  bool learned = false;
  bool noise_reset = false;
  bool target_updated = false;
  std::size_t replay_size = 0;
  double alpha = 0.0;  // value for the next step
  double lr = 0.0;
  double loss = 0.0;
  double smoothed_loss = 0.0;
};

struct TrainObserver {
  std::function<void(const StepEvent&, const Network& online,
                     const Network& target)>
      on_step;
  std::function<void(const EpisodeRecord&)> on_episode;
};

QNetworkSpec network_spec_for(const TrainConfig& cfg, const GridMap& map);

// Validates `cfg` first; throws ConfigError on failure.
RunArtifacts train(const TrainConfig& cfg, const TrainObserver& observer = {});

// JSON manifest: every config key, resolved schedule lengths, map digest,
// format versions and build stamp.
std::string build_manifest(const TrainConfig& cfg, const GridMap& map);
// Restores a config from the "config" object of a manifest.
TrainConfig config_from_manifest(const std::string& manifest);

// Sum of rewards obtained by replaying `actions` from the start state.
double replay_total_reward(const GridMap& map, const RewardWeights& w,
                           const EnvParams& params, const std::vector<int>& actions);

struct EvalSummary {
  std::int64_t episodes = 0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
  double median_steps = 0.0;
  double mean_total_reward = 0.0;

  bool operator==(const EvalSummary&) const = default;
};

// Greedy policy in eval mode (noise off).
EvalSummary evaluate(const Network& net, const GridMap& map,
                     const RewardWeights& w, const EnvParams& params,
                     std::int64_t episodes);

struct TrailingStats {
  std::int64_t window = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;  // population
  double mean_steps = 0.0;
  double std_steps = 0.0;
  double median_steps = 0.0;
  double success_rate = 0.0;
  double optimal_fraction = 0.0;  // successes in exactly `optimal_steps`
};

// Over the last min(window, records.size()) episodes.
TrailingStats trailing_stats(const std::vector<EpisodeRecord>& records,
                             std::int64_t window, int optimal_steps);

struct RunSummary {
  Variant variant = Variant::kImprovedNoisyDqn;
  std::uint64_t seed = 0;
  TrailingStats stats;
};

struct RunFailure {
  Variant variant = Variant::kImprovedNoisyDqn;
  std::uint64_t seed = 0;
  std::string message;
};

struct Comparison {
  std::vector<RunSummary> runs;
  std::vector<RunFailure> failures;
};

// Every variant for every seed on the map of `base`. `on_run` receives each
// finished run (for writing artifacts); exceptions from a run or from
// `on_run` are recorded as failures tagged with (variant, seed).
Comparison compare_variants(
    const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
    const std::function<void(const TrainConfig&, const RunArtifacts&)>& on_run = {});

// Seed-averaged per-variant table.
std::string comparison_summary_csv(const Comparison& c);
std::string comparison_runs_csv(const Comparison& c);

// episode,total_reward,steps,success,terminal_cause,alpha,lr
std::string metrics_csv(const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> parse_metrics_csv(const std::string& text);

class CheckpointVersionError : public Error {
 public:
  using Error::Error;
};

class CheckpointCorruptError : public Error {
 public:
  using Error::Error;
};

// "NDQN", u32 version, online block, target block, optimizer block,
// u64 manifest length, manifest bytes, u64 FNV-1a of everything before it.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Writes via a temporary file and rename.
void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace ndqn

#endif  // NDQN_TRAINER_HPP_
