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

// Independent reference implementations used only by the tests. They avoid
// the library's own helpers on purpose.

#ifndef NDQN_TESTS_ORACLES_HPP_
#define NDQN_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ndqn/env.hpp"

namespace ndqn::oracle {

// FNV-1a of serialize_map(build_default_map()), frozen when the layout was
// fixed.
inline constexpr const char* kDefaultMapDigest = "0fea8256bf53343f";

// The default layout drawn by hand, top line y = 14.
inline constexpr std::array<const char*, 15> kDefaultMapArt{
    "...###.#...#..G",
    ".......#...#...",
    ".......#.......",
    ".......#.......",
    "...#...........",
    "##.#.......#...",
    "...#.......#...",
    ".......#...#...",
    ".......#.......",
    ".......#.......",
    "...#...#.......",
    "...#.......#...",
    "...#.......#.##",
    "...#.......#...",
    "S..#...###.#...",
};

// Shortest path by repeated relaxation (no queue), 4-connected.
inline std::optional<int> grid_shortest_path(const GridMap& m) {
  const int a = m.size();
  const int inf = std::numeric_limits<int>::max() / 2;
  std::vector<int> d(static_cast<std::size_t>(a * a), inf);
  auto at = [a](int x, int y) { return static_cast<std::size_t>(x * a + y); };
  d[at(m.start().x, m.start().y)] = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (int x = 0; x < a; ++x) {
      for (int y = 0; y < a; ++y) {
        if (m.is_obstacle({x, y})) continue;
        int best = d[at(x, y)];
        const int nx[4] = {x + 1, x - 1, x, x};
        const int ny[4] = {y, y, y + 1, y - 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= a || ny[k] >= a) continue;
          if (m.is_obstacle({nx[k], ny[k]})) continue;
          best = std::min(best, d[at(nx[k], ny[k])] + 1);
        }
        if (best < d[at(x, y)]) {
          d[at(x, y)] = best;
          changed = true;
        }
      }
    }
  }
  const int g = d[at(m.goal().x, m.goal().y)];
  if (g >= inf) return std::nullopt;
  return g;
}

// Full sum over every obstacle, no search window.
inline double margin(Coord p, const GridMap& m, double d_min) {
  double s = 0.0;
  for (const Coord& o : m.obstacles()) {
    const double dx = p.x - o.x;
    const double dy = p.y - o.y;
    s += std::min(dx * dx + dy * dy - d_min, 0.0);
  }
  return s;
}

// The seven-term reward with vector terms reduced by component sum.
inline double reward(Coord prev, Coord next, bool collided, const GridMap& m,
                     const std::array<double, 7>& nu, double t_max = 40,
                     double beta = 2.5, double d_min = 2.5, double sigma_min = 0.0) {
  const double edge = m.size() - 1;
  const double gx = next.x - m.goal().x;
  const double gy = next.y - m.goal().y;
  const double mx = next.x - prev.x;
  const double my = next.y - prev.y;
  const double disp = mx * mx + my * my;
  const double progress = static_cast<double>(next.x) + static_cast<double>(next.y);
  const double remaining = (edge - next.x) + (edge - next.y);
  const double sigma = std::exp(-beta * (next.x * next.x + next.y * next.y));
  const double r = -nu[0] * (gx * gx + gy * gy) + nu[1] * disp + nu[2] * (t_max - disp) +
                   nu[3] * progress + nu[4] * remaining + nu[5] * margin(next, m, d_min) +
                   nu[6] * (sigma - sigma_min);
  return collided ? -std::fabs(r) : r;
}

struct ValueIteration {
  std::vector<double> v;  // x * A + y
  int greedy_path_length = -1;  // -1: greedy policy does not reach the goal
  bool greedy_reaches_goal = false;
};

// Discounted value iteration on the position MDP (the step counter is not
// part of the state; collisions and the goal are absorbing).
inline ValueIteration value_iteration(const GridMap& m, const std::array<double, 7>& nu,
                                      double gamma, int iterations) {
  const int a = m.size();
  auto idx = [a](int x, int y) { return static_cast<std::size_t>(x * a + y); };
  const int dx[5] = {0, 1, 0, -1, 0};
  const int dy[5] = {1, 0, -1, 0, 0};
  ValueIteration out;
  out.v.assign(static_cast<std::size_t>(a * a), 0.0);
  auto q_value = [&](int x, int y, int act, const std::vector<double>& v) {
    int nx = x + dx[act];
    int ny = y + dy[act];
    if (nx < 0 || ny < 0 || nx >= a || ny >= a) {
      nx = x;
      ny = y;
    }
    const bool hit = m.is_obstacle({nx, ny});
    const double r = reward({x, y}, {nx, ny}, hit, m, nu);
    const bool terminal = hit || Coord{nx, ny} == m.goal();
    return r + (terminal ? 0.0 : gamma * v[idx(nx, ny)]);
  };
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next = out.v;
    for (int x = 0; x < a; ++x) {
      for (int y = 0; y < a; ++y) {
        if (m.is_obstacle({x, y}) || Coord{x, y} == m.goal()) continue;
        double best = -std::numeric_limits<double>::infinity();
        for (int act = 0; act < 5; ++act) best = std::max(best, q_value(x, y, act, out.v));
        next[idx(x, y)] = best;
      }
    }
    out.v = std::move(next);
  }
  Coord p = m.start();
  for (int step = 0; step < 4 * a * a; ++step) {
    if (p == m.goal()) {
      out.greedy_reaches_goal = true;
      out.greedy_path_length = step;
      break;
    }
    int best_act = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int act = 0; act < 5; ++act) {
      const double q = q_value(p.x, p.y, act, out.v);
      if (q > best) {
        best = q;
        best_act = act;
      }
    }
    Coord n{p.x + dx[best_act], p.y + dy[best_act]};
    if (n.x < 0 || n.y < 0 || n.x >= a || n.y >= a) n = p;
    if (m.is_obstacle(n) || n == p) break;
    p = n;
  }
  return out;
}

}  // namespace ndqn::oracle

#endif  // NDQN_TESTS_ORACLES_HPP_
