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

// Grid-world MDP for communication-constrained UAV navigation.
//
// Coordinates are (x, y) with the origin at the bottom-left cell; x grows to
// the right and y grows upwards. The base station sits at the origin, which is
// also the start cell of the default map.

#ifndef NDQN_ENV_HPP_
#define NDQN_ENV_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ndqn/common.hpp"

namespace ndqn {

struct Coord {
  int x = 0;
  int y = 0;
  auto operator<=>(const Coord&) const = default;
};

enum class Action : int { kUp = 0, kRight = 1, kDown = 2, kLeft = 3, kHover = 4 };
inline constexpr int kNumActions = 5;

std::string_view action_name(Action a);

enum class TerminalCause { kNone, kGoal, kTimeout, kCollision };

std::string_view terminal_cause_name(TerminalCause c);
TerminalCause parse_terminal_cause(std::string_view name);

class GenerationError : public Error {
 public:
  using Error::Error;
};

class TerminatedEpisodeError : public Error {
 public:
  using Error::Error;
};

class MapFormatError : public Error {
 public:
  using Error::Error;
};

// Static world. Immutable after construction; `make` validates it.
class GridMap {
 public:
  static GridMap make(int size, std::vector<Coord> obstacles, Coord start,
                      Coord goal, std::uint64_t layout_seed = 0);

  int size() const { return size_; }
  const std::vector<Coord>& obstacles() const { return obstacles_; }  // sorted
  Coord start() const { return start_; }
  Coord goal() const { return goal_; }
  std::uint64_t layout_seed() const { return layout_seed_; }

  bool in_bounds(Coord c) const {
    return c.x >= 0 && c.y >= 0 && c.x < size_ && c.y < size_;
  }
  bool is_obstacle(Coord c) const {
    return in_bounds(c) && occupancy_[index(c)] != 0;
  }
  // Row-major cell index: row y, column x.
  int index(Coord c) const { return c.y * size_ + c.x; }

  bool operator==(const GridMap& other) const {
    return size_ == other.size_ && obstacles_ == other.obstacles_ &&
           start_ == other.start_ && goal_ == other.goal_;
  }

 private:
  GridMap() = default;

  int size_ = 0;
  std::vector<Coord> obstacles_;
  Coord start_;
  Coord goal_;
  std::uint64_t layout_seed_ = 0;
  std::vector<std::uint8_t> occupancy_;
};

// Environment constants. Defaults reproduce the published 15x15 setting.
struct EnvParams {
  int t_max = 40;          // episode step limit
  double beta = 2.5;       // signal decay rate
  double d_min = 2.5;      // obstacle clearance (squared distance)
  double sigma_min = 0.0;  // minimum required signal strength
};

// Weights of the seven reward terms; they must lie in [0, 1] and sum to 1.
struct RewardWeights {
  std::array<double, 7> nu{};

  static RewardWeights defaults();
  // Throws ConfigError("nu", ...) when the simplex constraint is violated.
  void validate() const;
};

struct EnvState {
  Coord pos;
  int step = 0;
  double sigma = 1.0;
  bool done = false;
  TerminalCause terminal_cause = TerminalCause::kNone;

  bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  bool done = false;
  TerminalCause terminal_cause = TerminalCause::kNone;
};

struct ActionResult {
  Coord new_pos;
  bool collided = false;
  bool blocked = false;
};

// The fixed 15x15 layout used by every experiment unless a generated map is
// requested. Three vertical corridors (x = 3, 7, 11), each with two three-cell
// gaps, plus four short horizontal bars.
GridMap build_default_map();

// Corridor skeleton plus round(density * A^2) random obstacles, resampled until
// the shortest path equals 2(A-1). Throws GenerationError after 1000 rounds.
GridMap generate_map(std::uint64_t seed, double density);

double signal_strength(Coord pos, double beta = EnvParams{}.beta);
// log(sigma); finite everywhere, unlike sigma itself which underflows to 0.0
// once beta * |pos|^2 exceeds ~745.
double log_signal_strength(Coord pos, double beta = EnvParams{}.beta);

double goal_distance(Coord pos, Coord goal);

// Sum over obstacles of min(|pos - obs|^2 - d_min, 0). Non-positive.
double obstacle_margin(Coord pos, const GridMap& map, double d_min);

ActionResult apply_action(Coord pos, Action action, const GridMap& map);

double compute_reward(Coord prev_pos, Coord new_pos, bool collided,
                      const GridMap& map, const RewardWeights& w,
                      const EnvParams& params = {});

TerminalCause is_terminal(const EnvState& state, bool collided,
                          const GridMap& map, const EnvParams& params = {});

EnvState initial_state(const GridMap& map, const EnvParams& params = {});

// [x/(A-1), y/(A-1), occupancy (row-major, 1 = obstacle), sigma].
Vector encode_state(const EnvState& state, const GridMap& map);
inline int encoded_size(const GridMap& map) {
  return map.size() * map.size() + 3;
}

StepOutcome env_step(const EnvState& state, Action action, const GridMap& map,
                     const RewardWeights& w, const EnvParams& params = {});

// Exact 4-connected shortest path from start to goal; nullopt if unreachable.
std::optional<int> bfs_shortest_path(const GridMap& map);

// Plain-text map format:
//   A=<int>
//   start=<x>,<y>
//   goal=<x>,<y>
//   obs=<x>,<y>     (one per obstacle, sorted by (x, y))
std::string serialize_map(const GridMap& map);
GridMap parse_map(std::string_view text);
std::string map_digest(const GridMap& map);

// '.' free, '#' obstacle, 'S' start, 'G' goal, 'U' UAV. Top line is y = A-1.
std::string render_ascii(const GridMap& map, std::optional<Coord> uav = {});

}  // namespace ndqn

#endif  // NDQN_ENV_HPP_
