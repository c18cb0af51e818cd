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

#include "ndqn/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace ndqn {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kUp: return "up";
    case Action::kRight: return "right";
    case Action::kDown: return "down";
    case Action::kLeft: return "left";
    case Action::kHover: return "hover";
  }
  return "?";
}

std::string_view terminal_cause_name(TerminalCause c) {
  switch (c) {
    case TerminalCause::kNone: return "none";
    case TerminalCause::kGoal: return "goal";
    case TerminalCause::kTimeout: return "timeout";
    case TerminalCause::kCollision: return "collision";
  }
  return "?";
}

TerminalCause parse_terminal_cause(std::string_view name) {
  for (auto c : {TerminalCause::kNone, TerminalCause::kGoal,
                 TerminalCause::kTimeout, TerminalCause::kCollision}) {
    if (terminal_cause_name(c) == name) return c;
  }
  throw Error("unknown terminal cause: " + std::string(name));
}

GridMap GridMap::make(int size, std::vector<Coord> obstacles, Coord start,
                      Coord goal, std::uint64_t layout_seed) {
  if (size < 2) throw MapFormatError("grid size must be at least 2");
  GridMap m;
  m.size_ = size;
  m.start_ = start;
  m.goal_ = goal;
  m.layout_seed_ = layout_seed;
  if (!m.in_bounds(start) || !m.in_bounds(goal)) {
    throw MapFormatError("start/goal outside the grid");
  }
  std::sort(obstacles.begin(), obstacles.end());
  obstacles.erase(std::unique(obstacles.begin(), obstacles.end()),
                  obstacles.end());
  m.occupancy_.assign(static_cast<std::size_t>(size) * size, 0);
  for (const Coord& c : obstacles) {
    if (!m.in_bounds(c)) throw MapFormatError("obstacle outside the grid");
    if (c == start || c == goal) {
      throw MapFormatError("start and goal must be obstacle-free");
    }
    m.occupancy_[m.index(c)] = 1;
  }
  m.obstacles_ = std::move(obstacles);
  return m;
}

RewardWeights RewardWeights::defaults() {
  // Goal distance, displacement, residual-displacement, progress, remaining,
  // obstacle margin, signal.
  return RewardWeights{{0.002, 0.0, 0.0, 0.0, 0.0, 0.95, 0.048}};
}

void RewardWeights::validate() const {
  double sum = 0.0;
  for (double v : nu) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("nu", "reward weights must lie in [0, 1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ConfigError("nu", "reward weights must sum to 1");
  }
}

namespace {

constexpr int kGridSize = 15;

// Vertical corridors: column and the rows left open in it.
struct Corridor {
  int x;
  std::array<int, 6> gaps;
};
constexpr std::array<Corridor, 3> kCorridors{{
    {3, {5, 6, 7, 11, 12, 13}},
    {7, {1, 2, 3, 8, 9, 10}},
    {11, {4, 5, 6, 10, 11, 12}},
}};

std::vector<Coord> corridor_skeleton() {
  std::vector<Coord> obs;
  for (const Corridor& c : kCorridors) {
    for (int y = 0; y < kGridSize; ++y) {
      if (std::find(c.gaps.begin(), c.gaps.end(), y) == c.gaps.end()) {
        obs.push_back({c.x, y});
      }
    }
  }
  return obs;
}

}  // namespace

GridMap build_default_map() {
  std::vector<Coord> obs = corridor_skeleton();
  const std::array<Coord, 8> bars{{{0, 9}, {1, 9},      // left edge
                                   {13, 2}, {14, 2},    // bottom-right edge
                                   {4, 14}, {5, 14},    // top row
                                   {8, 0}, {9, 0}}};    // bottom row
  obs.insert(obs.end(), bars.begin(), bars.end());
  return GridMap::make(kGridSize, std::move(obs), {0, 0},
                       {kGridSize - 1, kGridSize - 1});
}

GridMap generate_map(std::uint64_t seed, double density) {
  if (!(density >= 0.0 && density < 0.4)) {
    throw OutOfRangeError("map density must lie in [0, 0.4)");
  }
  const int a = kGridSize;
  const Coord start{0, 0};
  const Coord goal{a - 1, a - 1};
  const std::vector<Coord> skeleton = corridor_skeleton();
  std::set<Coord> reserved(skeleton.begin(), skeleton.end());
  for (const Coord& anchor : {start, goal}) {
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) reserved.insert({anchor.x + dx, anchor.y + dy});
    }
  }
  std::vector<Coord> candidates;
  for (int x = 0; x < a; ++x) {
    for (int y = 0; y < a; ++y) {
      if (!reserved.contains({x, y})) candidates.push_back({x, y});
    }
  }
  const auto count = static_cast<std::size_t>(std::lround(density * a * a));
  if (count > candidates.size()) {
    throw GenerationError("map density leaves no room for random obstacles");
  }
  Rng rng(seed);
  for (int round = 0; round < 1000; ++round) {
    std::vector<Coord> pool = candidates;
    // Partial Fisher-Yates: the first `count` entries become obstacles.
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<Coord> obs = skeleton;
    obs.insert(obs.end(), pool.begin(), pool.begin() + count);
    GridMap m = GridMap::make(a, std::move(obs), start, goal, seed);
    if (bfs_shortest_path(m) == 2 * (a - 1)) return m;
  }
  throw GenerationError("no valid map after 1000 rejection rounds (density too high)");
}

double signal_strength(Coord pos, double beta) {
  return std::exp(log_signal_strength(pos, beta));
}

double log_signal_strength(Coord pos, double beta) {
  return -beta * static_cast<double>(pos.x * pos.x + pos.y * pos.y);
}

double goal_distance(Coord pos, Coord goal) {
  const double dx = pos.x - goal.x;
  const double dy = pos.y - goal.y;
  return dx * dx + dy * dy;
}

double obstacle_margin(Coord pos, const GridMap& map, double d_min) {
  // Only obstacles with squared distance below d_min contribute, so a window
  // of radius ceil(sqrt(d_min)) is exact.
  const int r = static_cast<int>(std::ceil(std::sqrt(std::max(d_min, 0.0))));
  double total = 0.0;
  for (int dx = -r; dx <= r; ++dx) {
    for (int dy = -r; dy <= r; ++dy) {
      const Coord c{pos.x + dx, pos.y + dy};
      if (!map.is_obstacle(c)) continue;
      total += std::min(static_cast<double>(dx * dx + dy * dy) - d_min, 0.0);
    }
  }
  return total;
}

ActionResult apply_action(Coord pos, Action action, const GridMap& map) {
  Coord cand = pos;
  switch (action) {
    case Action::kUp: cand.y += 1; break;
    case Action::kRight: cand.x += 1; break;
    case Action::kDown: cand.y -= 1; break;
    case Action::kLeft: cand.x -= 1; break;
    case Action::kHover: break;
  }
  if (!map.in_bounds(cand)) return {pos, false, true};
  return {cand, map.is_obstacle(cand), false};
}

double compute_reward(Coord prev_pos, Coord new_pos, bool collided,
                      const GridMap& map, const RewardWeights& w,
                      const EnvParams& params) {
  const auto& nu = w.nu;
  const double edge = map.size() - 1;
  const double disp = goal_distance(new_pos, prev_pos);
  const double r =
      -nu[0] * goal_distance(new_pos, map.goal()) +
      nu[1] * disp +
      nu[2] * (params.t_max - disp) +
      nu[3] * (new_pos.x + new_pos.y) +
      nu[4] * ((edge - new_pos.x) + (edge - new_pos.y)) +
      nu[5] * obstacle_margin(new_pos, map, params.d_min) +
      nu[6] * (signal_strength(new_pos, params.beta) - params.sigma_min);
  return collided ? -std::abs(r) : r;
}

TerminalCause is_terminal(const EnvState& state, bool collided,
                          const GridMap& map, const EnvParams& params) {
  if (state.pos == map.goal()) return TerminalCause::kGoal;
  if (collided) return TerminalCause::kCollision;
  if (state.step >= params.t_max) return TerminalCause::kTimeout;
  return TerminalCause::kNone;
}

EnvState initial_state(const GridMap& map, const EnvParams& params) {
  EnvState s;
  s.pos = map.start();
  s.step = 0;
  s.sigma = signal_strength(s.pos, params.beta);
  return s;
}

Vector encode_state(const EnvState& state, const GridMap& map) {
  const int a = map.size();
  Vector v = Vector::Zero(encoded_size(map));
  v[0] = static_cast<double>(state.pos.x) / (a - 1);
  v[1] = static_cast<double>(state.pos.y) / (a - 1);
  for (const Coord& c : map.obstacles()) v[2 + map.index(c)] = 1.0;
  v[a * a + 2] = state.sigma;
  return v;
}

StepOutcome env_step(const EnvState& state, Action action, const GridMap& map,
                     const RewardWeights& w, const EnvParams& params) {
  if (state.done) throw TerminatedEpisodeError("episode already terminated");
  const ActionResult moved = apply_action(state.pos, action, map);
  StepOutcome out;
  out.reward = compute_reward(state.pos, moved.new_pos, moved.collided, map, w,
                              params);
  EnvState& next = out.next_state;
  next.pos = moved.new_pos;
  next.step = state.step + 1;
  next.sigma = signal_strength(next.pos, params.beta);
  next.terminal_cause = is_terminal(next, moved.collided, map, params);
  next.done = next.terminal_cause != TerminalCause::kNone;
  out.done = next.done;
  out.terminal_cause = next.terminal_cause;
  return out;
}

std::optional<int> bfs_shortest_path(const GridMap& map) {
  const int a = map.size();
  std::vector<int> dist(static_cast<std::size_t>(a) * a, -1);
  std::deque<Coord> queue{map.start()};
  dist[map.index(map.start())] = 0;
  constexpr std::array<Action, 4> kMoves{Action::kUp, Action::kRight,
                                         Action::kDown, Action::kLeft};
  while (!queue.empty()) {
    const Coord p = queue.front();
    queue.pop_front();
    if (p == map.goal()) return dist[map.index(p)];
    for (Action act : kMoves) {
      const ActionResult r = apply_action(p, act, map);
      if (r.blocked || r.collided || dist[map.index(r.new_pos)] >= 0) continue;
      dist[map.index(r.new_pos)] = dist[map.index(p)] + 1;
      queue.push_back(r.new_pos);
    }
  }
  return std::nullopt;
}

std::string serialize_map(const GridMap& map) {
  std::ostringstream out;
  out << "A=" << map.size() << '\n';
  out << "start=" << map.start().x << ',' << map.start().y << '\n';
  out << "goal=" << map.goal().x << ',' << map.goal().y << '\n';
  for (const Coord& c : map.obstacles()) out << "obs=" << c.x << ',' << c.y << '\n';
  return out.str();
}

namespace {

Coord parse_pair(std::string_view value, int line_no) {
  int x = 0, y = 0;
  char comma = 0;
  std::istringstream in{std::string(value)};
  if (!(in >> x >> comma >> y) || comma != ',' || !(in >> std::ws).eof()) {
    throw MapFormatError("line " + std::to_string(line_no) +
                         ": expected <x>,<y>");
  }
  return {x, y};
}

}  // namespace

GridMap parse_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::optional<int> size;
  std::optional<Coord> start, goal;
  std::vector<Coord> obs;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw MapFormatError("line " + std::to_string(line_no) + ": missing '='");
    }
    const std::string key = line.substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    if (key == "A") {
      try {
        size = std::stoi(std::string(value));
      } catch (const std::exception&) {
        throw MapFormatError("line " + std::to_string(line_no) + ": bad size");
      }
    } else if (key == "start") {
      start = parse_pair(value, line_no);
    } else if (key == "goal") {
      goal = parse_pair(value, line_no);
    } else if (key == "obs") {
      obs.push_back(parse_pair(value, line_no));
    } else {
      throw MapFormatError("line " + std::to_string(line_no) +
                           ": unknown key '" + key + "'");
    }
  }
  if (!size || !start || !goal) {
    throw MapFormatError("map text must define A, start and goal");
  }
  return GridMap::make(*size, std::move(obs), *start, *goal);
}

std::string map_digest(const GridMap& map) {
  return hex64(fnv1a64(serialize_map(map)));
}

std::string render_ascii(const GridMap& map, std::optional<Coord> uav) {
  std::string out;
  for (int y = map.size() - 1; y >= 0; --y) {
    for (int x = 0; x < map.size(); ++x) {
      const Coord c{x, y};
      char glyph = '.';
      if (map.is_obstacle(c)) glyph = '#';
      if (c == map.start()) glyph = 'S';
      if (c == map.goal()) glyph = 'G';
      if (uav && *uav == c) glyph = 'U';
      out += glyph;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ndqn
