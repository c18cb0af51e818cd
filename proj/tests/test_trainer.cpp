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
#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "ndqn/schedules.hpp"
#include "ndqn/trainer.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace ndqn;

namespace {

TrainConfig tiny(Variant v, std::int64_t episodes = 6) {
  TrainConfig c;
  c.variant = v;
  c.seed = 5;
  c.episodes = episodes;
  c.hidden_width = 12;
  c.batch_size = 8;
  c.replay_capacity = 500;
  return c;
}

std::vector<StepEvent> record_steps(const TrainConfig& c, RunArtifacts* out = nullptr) {
  std::vector<StepEvent> events;
  TrainObserver obs;
  obs.on_step = [&](const StepEvent& e, const Network&, const Network&) {
    events.push_back(e);
  };
  RunArtifacts a = train(c, obs);
  if (out) *out = std::move(a);
  return events;
}

bool same_params(const Network& a, const Network& b) {
  const ConstParamList pa = a.parameters();
  const ConstParamList pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!(pa[i] == pb[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("one episode gives one record") {
  const RunArtifacts a = train(tiny(Variant::kImprovedNoisyDqn, 1));
  REQUIRE(a.records.size() == 1);
  CHECK(a.records[0].index == 0);
  CHECK(a.records[0].steps >= 1);
  CHECK(a.records[0].steps <= 40);
  CHECK(a.actions.size() == 1);
  CHECK(a.actions[0].size() == static_cast<std::size_t>(a.records[0].steps));
}

TEST_CASE("training needs a seed") {
  TrainConfig c = tiny(Variant::kStandardDqn);
  c.seed.reset();
  CHECK_THROWS_AS(train(c), ConfigError);
}

TEST_CASE("same seed, same run; different seed, different run") {
  for (Variant v : kAllVariants) {
    CAPTURE(variant_name(v));
    const RunArtifacts a = train(tiny(v));
    const RunArtifacts b = train(tiny(v));
    CHECK(a.records == b.records);
    CHECK(metrics_csv(a.records) == metrics_csv(b.records));
    CHECK(serialize_checkpoint(a.final_state) == serialize_checkpoint(b.final_state));
    TrainConfig other = tiny(v);
    other.seed = 6;
    CHECK(serialize_checkpoint(train(other).final_state) !=
          serialize_checkpoint(a.final_state));
  }
}

TEST_CASE("learning waits for the buffer to exceed one batch") {
  const TrainConfig c = tiny(Variant::kDoubleDqn, 4);
  for (const StepEvent& e : record_steps(c)) {
    CHECK(e.learned == (e.replay_size > static_cast<std::size_t>(c.batch_size)));
    if (!e.learned) CHECK(e.grad_steps == 0);
  }
}

TEST_CASE("noise resets every k gradient steps, on both networks") {
  TrainConfig c = tiny(Variant::kImprovedNoisyDqn, 20);
  c.noise_reset_period = 7;
  std::int64_t resets = 0;
  std::int64_t last_grad = 0;
  for (const StepEvent& e : record_steps(c)) {
    const bool due = e.learned && e.grad_steps % 7 == 0;
    CHECK(e.noise_reset == due);
    resets += e.noise_reset ? 1 : 0;
    last_grad = e.grad_steps;
  }
  CHECK(resets == last_grad / 7);

  // Dense variants never touch noise.
  for (const StepEvent& e : record_steps(tiny(Variant::kStandardDqn, 5))) {
    CHECK_FALSE(e.noise_reset);
  }
}

TEST_CASE("target cadence: soft every step, hard every C steps") {
  TrainConfig soft = tiny(Variant::kImprovedNoisyDqn, 5);
  for (const StepEvent& e : record_steps(soft)) CHECK(e.target_updated == e.learned);

  TrainConfig hard = tiny(Variant::kStandardDqn, 10);
  hard.hard_update_period = 25;
  std::int64_t copies = 0;
  TrainObserver obs;
  obs.on_step = [&](const StepEvent& e, const Network& online, const Network& target) {
    const bool due = e.learned && e.grad_steps % 25 == 0;
    CHECK(e.target_updated == due);
    if (due) {
      ++copies;
      CHECK(same_params(online, target));
    }
  };
  train(hard, obs);
  CHECK(copies > 0);
}

TEST_CASE("alpha is zero for dense variants and fixed for the noisy baseline") {
  for (const StepEvent& e : record_steps(tiny(Variant::kDoubleDqn, 3))) CHECK(e.alpha == 0.0);
  TrainConfig n = tiny(Variant::kNoisyDqn, 3);
  n.fixed_alpha = 0.7;
  for (const StepEvent& e : record_steps(n)) CHECK(e.alpha == 0.7);
  for (const StepEvent& e : record_steps(tiny(Variant::kImprovedNoisyDqn, 3))) {
    CHECK(e.alpha > 0.0);
    CHECK(e.alpha <= 1.2);
  }
}

TEST_CASE("learning rate follows the schedule only for the improved variant") {
  TrainConfig c = tiny(Variant::kImprovedNoisyDqn, 8);
  const LrSchedule s{c.lr, c.resolved_lr_warmup_steps(), c.resolved_lr_total_steps()};
  for (const StepEvent& e : record_steps(c)) {
    if (e.learned) CHECK(e.lr == learning_rate(e.grad_steps, s));
  }
  for (const StepEvent& e : record_steps(tiny(Variant::kNoisyDqn, 4))) {
    if (e.learned) CHECK(e.lr == 1e-3);
  }
}

TEST_CASE("recorded totals match a replay of the logged actions") {
  for (Variant v : kAllVariants) {
    const TrainConfig c = tiny(v, 8);
    const RunArtifacts a = train(c);
    const GridMap map = resolve_map(c);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(replay_total_reward(map, c.reward, c.env, a.actions[i]) ==
            a.records[i].total_reward);
    }
  }
}

TEST_CASE("observer sees every step and every episode") {
  const TrainConfig c = tiny(Variant::kNoisyDqn, 5);
  std::vector<EpisodeRecord> seen;
  std::int64_t steps = 0;
  TrainObserver obs;
  obs.on_step = [&](const StepEvent&, const Network&, const Network&) { ++steps; };
  obs.on_episode = [&](const EpisodeRecord& r) { seen.push_back(r); };
  const RunArtifacts a = train(c, obs);
  CHECK(seen == a.records);
  std::int64_t total = 0;
  for (const auto& r : a.records) total += r.steps;
  CHECK(steps == total);
}

TEST_CASE("metrics csv round-trips") {
  const RunArtifacts a = train(tiny(Variant::kImprovedNoisyDqn, 5));
  const std::string text = metrics_csv(a.records);
  CHECK(text.rfind("episode,total_reward,steps,success,terminal_cause,alpha,lr\n", 0) == 0);
  CHECK(parse_metrics_csv(text) == a.records);
  CHECK_THROWS(parse_metrics_csv("episode,total_reward\n1,2\n"));
}

TEST_CASE("checkpoint round-trips and rejects damage") {
  const RunArtifacts a = train(tiny(Variant::kImprovedNoisyDqn, 4));
  const std::string bytes = serialize_checkpoint(a.final_state);
  CHECK(bytes.substr(0, 4) == "NDQN");
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(serialize_checkpoint(back) == bytes);
  CHECK(same_params(back.online, a.final_state.online));
  CHECK(same_params(back.target, a.final_state.target));
  CHECK(back.manifest == a.manifest);

  SUBCASE("truncated") {
    CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)),
                    CheckpointCorruptError);
  }
  SUBCASE("flipped byte") {
    std::string bad = bytes;
    bad[bytes.size() / 2] ^= 0x40;
    CHECK_THROWS_AS(deserialize_checkpoint(bad), CheckpointCorruptError);
  }
  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_checkpoint(bad), CheckpointCorruptError);
  }
  SUBCASE("other version") {
    std::string bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(deserialize_checkpoint(bad), CheckpointVersionError);
  }
  SUBCASE("file") {
    const auto path = std::filesystem::temp_directory_path() / "ndqn_test.ckpt";
    save_checkpoint(a.final_state, path.string());
    CHECK(serialize_checkpoint(load_checkpoint(path.string())) == bytes);
    std::filesystem::remove(path);
  }
}

TEST_CASE("manifest carries the config and resolved lengths") {
  TrainConfig c = tiny(Variant::kDoubleDqn, 3);
  c.reward.nu = {0.1, 0.1, 0.1, 0.1, 0.1, 0.4, 0.1};
  const std::string m = build_manifest(c, resolve_map(c));
  const TrainConfig back = config_from_manifest(m);
  CHECK(format_config(back) == format_config(c));
  const auto j = nlohmann::json::parse(m);
  CHECK(j["resolved"]["planned_gradient_steps"] == c.planned_gradient_steps());
  CHECK(j["resolved"]["lr_warmup_steps"] == c.resolved_lr_warmup_steps());
  CHECK(j["map"]["digest"].get<std::string>() == oracle::kDefaultMapDigest);
}

TEST_CASE("greedy evaluation is deterministic; an untrained net does not reach the goal") {
  const TrainConfig c = tiny(Variant::kImprovedNoisyDqn);
  const GridMap map = resolve_map(c);
  Rng rng(3);
  const Network net = build_q_network(network_spec_for(c, map), rng);
  const EvalSummary a = evaluate(net, map, c.reward, c.env, 5);
  CHECK(a == evaluate(net, map, c.reward, c.env, 5));
  CHECK(a.episodes == 5);
  CHECK(a.success_rate == 0.0);
  CHECK_THROWS_AS(evaluate(net, map, c.reward, c.env, 0), OutOfRangeError);
}

TEST_CASE("trailing stats") {
  std::vector<EpisodeRecord> r(4);
  const int steps[] = {40, 28, 28, 30};
  for (int i = 0; i < 4; ++i) {
    r[i].index = i;
    r[i].steps = steps[i];
    r[i].total_reward = i;
    r[i].success = i > 0;
  }
  const TrailingStats all = trailing_stats(r, 10, 28);
  CHECK(all.window == 4);
  CHECK(all.mean_steps == 31.5);
  CHECK(all.median_steps == 29.0);
  CHECK(all.success_rate == 0.75);
  CHECK(all.optimal_fraction == 0.5);
  CHECK(all.mean_reward == 1.5);
  CHECK(all.std_reward == doctest::Approx(std::sqrt(1.25)));
  const TrailingStats last = trailing_stats(r, 3, 28);
  CHECK(last.window == 3);
  CHECK(last.success_rate == 1.0);
}

TEST_CASE("compare runs every variant for every seed") {
  TrainConfig base = tiny(Variant::kImprovedNoisyDqn, 3);
  std::map<std::string, int> runs;
  const Comparison c = compare_variants(base, {1, 2}, [&](const TrainConfig& cfg,
                                                          const RunArtifacts& a) {
    CHECK(a.records.size() == 3);
    ++runs[std::string(variant_name(cfg.variant))];
  });
  CHECK(c.runs.size() == 8);
  CHECK(c.failures.empty());
  CHECK(runs.size() == 4);
  for (const auto& [name, n] : runs) CHECK(n == 2);

  const std::string summary = comparison_summary_csv(c);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
  const std::string per_run = comparison_runs_csv(c);
  CHECK(std::count(per_run.begin(), per_run.end(), '\n') == 9);
}

TEST_CASE("a failing run is recorded, the rest continue") {
  TrainConfig base = tiny(Variant::kImprovedNoisyDqn, 2);
  const Comparison c = compare_variants(base, {1}, [](const TrainConfig& cfg,
                                                      const RunArtifacts&) {
    if (cfg.variant == Variant::kNoisyDqn) throw Error("disk full");
  });
  CHECK(c.runs.size() == 3);
  REQUIRE(c.failures.size() == 1);
  CHECK(c.failures[0].variant == Variant::kNoisyDqn);
  CHECK(c.failures[0].seed == 1);
  CHECK(c.failures[0].message.find("disk full") != std::string::npos);
}
