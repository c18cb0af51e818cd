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

#include "ndqn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ndqn/schedules.hpp"

#ifndef NDQN_GIT_REV
#define NDQN_GIT_REV "unknown"
#endif

namespace ndqn {

namespace {

using Json = nlohmann::ordered_json;

// Independent streams so that, e.g., exploration draws never shift the
// replay sampling sequence.
enum Stream : std::uint64_t { kInitStream = 1, kNoiseStream, kReplayStream, kExploreStream };

Rng make_stream(std::uint64_t seed, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s)};
  return Rng(seq);
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Everything one learning run mutates.
class Run {
 public:
  Run(const TrainConfig& cfg, const TrainObserver& observer)
      : cfg_(cfg),
        observer_(observer),
        wiring_(wiring_for(cfg.variant)),
        map_(resolve_map(cfg)),
        init_rng_(make_stream(*cfg.seed, kInitStream)),
        noise_rng_(make_stream(*cfg.seed, kNoiseStream)),
        replay_rng_(make_stream(*cfg.seed, kReplayStream)),
        explore_rng_(make_stream(*cfg.seed, kExploreStream)),
        online_(build_q_network(network_spec_for(cfg, map_), init_rng_)),
        target_(online_),
        optimizer_(OptimizerState::for_params(online_.parameters(), cfg.optimizer)),
        replay_(static_cast<std::size_t>(cfg.replay_capacity)),
        successes_(static_cast<std::size_t>(cfg.success_window)) {
    // The target starts from the same parameters but holds its own noise.
    if (target_.has_noise()) target_.reset_noise(noise_rng_);
    smoothed_.lambda = cfg.smoothing_lambda;
    noise_sched_.alpha_min = cfg.alpha_min;
    noise_sched_.alpha_max = cfg.alpha_max;
    noise_sched_.decay_steps = cfg.resolved_alpha_decay();
    noise_sched_.feedback_enabled = cfg.noise_feedback;
    lr_sched_.eta0 = cfg.lr;
    lr_sched_.warmup_steps = cfg.resolved_lr_warmup_steps();
    lr_sched_.total_steps = cfg.resolved_lr_total_steps();
    alpha_ = current_alpha();
  }

  RunArtifacts execute() {
    RunArtifacts out;
    out.manifest = build_manifest(cfg_, map_);
    out.records.reserve(static_cast<std::size_t>(cfg_.episodes));
    out.actions.reserve(static_cast<std::size_t>(cfg_.episodes));
    for (std::int64_t e = 0; e < cfg_.episodes; ++e) {
      std::vector<int> actions;
      out.records.push_back(run_episode(e, actions));
      out.actions.push_back(std::move(actions));
      if (observer_.on_episode) observer_.on_episode(out.records.back());
    }
    out.final_state = Checkpoint{online_, target_, optimizer_, out.manifest};
    return out;
  }

 private:
  double current_alpha() const {
    if (wiring_.block_kind == BlockKind::kDense) return 0.0;
    if (!wiring_.noise_schedule) return cfg_.fixed_alpha;
    const std::int64_t n =
        cfg_.noise_schedule_unit == ScheduleUnit::kEpisode ? episode_ : grad_steps_;
    return noise_scale(n, noise_sched_, successes_.rate());
  }

  int choose_action(const Vector& s) {
    if (wiring_.epsilon_greedy) {
      const auto decay = static_cast<std::int64_t>(
          std::llround(cfg_.eps_decay_fraction * static_cast<double>(cfg_.episodes)));
      const double eps =
          epsilon_greedy_rate(episode_, cfg_.eps_start, cfg_.eps_end, decay);
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      if (coin(explore_rng_) < eps) {
        std::uniform_int_distribution<int> pick(0, kNumActions - 1);
        return pick(explore_rng_);
      }
      return argmax(online_.forward(s, ForwardMode{Mode::kEval, 0.0}));
    }
    return select_action(online_, s, alpha_);
  }

  void learn(StepEvent& ev) {
    const auto batch = static_cast<std::size_t>(cfg_.batch_size);
    const auto samples = replay_.sample(batch, replay_rng_);
    const Eigen::Index in = online_.input_size();
    const auto b = static_cast<Eigen::Index>(batch);
    Matrix states(in, b);
    Matrix next_states(in, b);
    Vector rewards(b);
    std::vector<bool> dones(batch);
    std::vector<int> actions(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      states.col(col) = samples[i]->state;
      next_states.col(col) = samples[i]->next_state;
      rewards[col] = samples[i]->reward;
      dones[i] = samples[i]->done;
      actions[i] = samples[i]->action;
    }
    const Vector y = compute_targets(wiring_.target_rule, online_, target_, rewards,
                                     next_states, dones, cfg_.gamma, alpha_);
    GradientTape tape;
    const Matrix q = online_.forward(states, ForwardMode{Mode::kTrain, alpha_}, &tape);
    const double loss = td_loss(gather_actions(q, actions), y);

    const bool had_reference = smoothed_.initialized;
    const double reference = smoothed_.value;
    update_smoothed_loss(smoothed_, loss);

    const Matrix dq = td_loss_output_grad(q, actions, y);
    Gradients grads = online_.backward(tape, dq);
    if (wiring_.loss_clipping && cfg_.loss_clipping && had_reference &&
        loss > cfg_.clip_loss_ratio * reference) {
      clip_global_norm(grads, cfg_.clip_norm);
    }

    ++grad_steps_;
    lr_ = wiring_.lr_schedule
              ? learning_rate(std::min(grad_steps_, lr_sched_.total_steps), lr_sched_)
              : cfg_.lr;
    ParamList params = online_.parameters();
    optimizer_update(params, grads, optimizer_, lr_);

    if (online_.has_noise() && grad_steps_ % cfg_.noise_reset_period == 0) {
      online_.reset_noise(noise_rng_);
      target_.reset_noise(noise_rng_);
      ev.noise_reset = true;
    }
    if (wiring_.soft_update) {
      soft_update(online_, target_, cfg_.tau);
      ev.target_updated = true;
    } else if (grad_steps_ % cfg_.hard_update_period == 0) {
      hard_update(online_, target_);
      ev.target_updated = true;
    }
    ev.learned = true;
    ev.loss = loss;
  }

  EpisodeRecord run_episode(std::int64_t e, std::vector<int>& actions) {
    episode_ = e;
    alpha_ = current_alpha();
    EpisodeRecord rec;
    rec.index = e;
    EnvState state = initial_state(map_, cfg_.env);
    Vector s = encode_state(state, map_);
    while (!state.done) {
      const int a = choose_action(s);
      const StepOutcome out =
          env_step(state, static_cast<Action>(a), map_, cfg_.reward, cfg_.env);
      Vector s_next = encode_state(out.next_state, map_);
      replay_.push(Transition{s, a, out.reward, s_next, out.done});
      rec.total_reward += out.reward;
      actions.push_back(a);
      ++env_steps_;

      StepEvent ev;
      ev.episode = e;
      ev.step = out.next_state.step;
      ev.action = a;
      ev.reward = out.reward;
      rec.alpha_used = alpha_;
      if (replay_.size() > static_cast<std::size_t>(cfg_.batch_size)) learn(ev);
      if (out.done) {
        successes_.record(out.terminal_cause == TerminalCause::kGoal);
      }
      alpha_ = current_alpha();

      ev.env_steps = env_steps_;
      ev.grad_steps = grad_steps_;
      ev.replay_size = replay_.size();
      ev.alpha = alpha_;
      ev.lr = lr_;
      ev.smoothed_loss = smoothed_.value;
      if (observer_.on_step) observer_.on_step(ev, online_, target_);

      state = out.next_state;
      s = std::move(s_next);
    }
    rec.steps = state.step;
    rec.terminal_cause = state.terminal_cause;
    rec.success = state.terminal_cause == TerminalCause::kGoal;
    rec.lr_used = lr_;
    return rec;
  }

  const TrainConfig& cfg_;
  const TrainObserver& observer_;
  VariantWiring wiring_;
  GridMap map_;
  Rng init_rng_;
  Rng noise_rng_;
  Rng replay_rng_;
  Rng explore_rng_;
  Network online_;
  Network target_;
  OptimizerState optimizer_;
  ReplayBuffer replay_;
  SuccessWindow successes_;
  SmoothedLoss smoothed_;
  NoiseSchedule noise_sched_;
  LrSchedule lr_sched_;
  std::int64_t episode_ = 0;
  std::int64_t env_steps_ = 0;
  std::int64_t grad_steps_ = 0;
  double alpha_ = 0.0;
  double lr_ = 0.0;
};

}  // namespace

QNetworkSpec network_spec_for(const TrainConfig& cfg, const GridMap& map) {
  const VariantWiring w = wiring_for(cfg.variant);
  QNetworkSpec spec;
  spec.input_size = encoded_size(map);
  spec.feature_widths = {cfg.hidden_width, cfg.hidden_width};
  spec.num_blocks = 2;
  spec.block_kind = w.block_kind;
  spec.residual = w.residual;
  spec.sigma0 = cfg.sigma0;
  spec.num_actions = kNumActions;
  return spec;
}

RunArtifacts train(const TrainConfig& cfg, const TrainObserver& observer) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  Run run(cfg, observer);
  RunArtifacts out = run.execute();
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string build_manifest(const TrainConfig& cfg, const GridMap& map) {
  Json j;
  j["tool"] = "ndqn";
  j["version"] = kVersion;
  j["git_revision"] = NDQN_GIT_REV;
  j["formats"] = {{"manifest", kManifestVersion},
                  {"checkpoint", kCheckpointVersion},
                  {"metrics", kMetricsVersion}};
  Json config = Json::object();
  for (const auto& key : config_keys()) config[key] = get_config_value(cfg, key);
  j["config"] = config;
  j["resolved"] = {{"planned_gradient_steps", cfg.planned_gradient_steps()},
                   {"alpha_decay", cfg.resolved_alpha_decay()},
                   {"lr_warmup_steps", cfg.resolved_lr_warmup_steps()},
                   {"lr_total_steps", cfg.resolved_lr_total_steps()}};
  const VariantWiring w = wiring_for(cfg.variant);
  j["wiring"] = {{"noisy_blocks", w.block_kind == BlockKind::kNoisy},
                 {"residual", w.residual},
                 {"epsilon_greedy", w.epsilon_greedy},
                 {"double_target", w.target_rule == TargetRule::kDouble},
                 {"soft_update", w.soft_update},
                 {"noise_schedule", w.noise_schedule},
                 {"lr_schedule", w.lr_schedule},
                 {"loss_clipping", w.loss_clipping}};
  const auto bfs = bfs_shortest_path(map);
  j["map"] = {{"digest", map_digest(map)},
              {"size", map.size()},
              {"obstacles", map.obstacles().size()},
              {"shortest_path", bfs ? Json(*bfs) : Json(nullptr)}};
  j["metrics_columns"] = {"episode", "total_reward", "steps", "success",
                          "terminal_cause", "alpha", "lr"};
  return j.dump(2) + "\n";
}

TrainConfig config_from_manifest(const std::string& manifest) {
  Json j;
  try {
    j = Json::parse(manifest);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object()) {
    throw FormatError("manifest has no config object");
  }
  TrainConfig cfg;
  for (const auto& [key, value] : j["config"].items()) {
    if (key == "seed" && value == "unset") continue;
    set_config_value(cfg, key, value.get<std::string>());
  }
  return cfg;
}

double replay_total_reward(const GridMap& map, const RewardWeights& w,
                           const EnvParams& params, const std::vector<int>& actions) {
  EnvState s = initial_state(map, params);
  double total = 0.0;
  for (int a : actions) {
    const StepOutcome out = env_step(s, static_cast<Action>(a), map, w, params);
    total += out.reward;
    s = out.next_state;
  }
  return total;
}

EvalSummary evaluate(const Network& net, const GridMap& map, const RewardWeights& w,
                     const EnvParams& params, std::int64_t episodes) {
  if (episodes < 1) throw OutOfRangeError("evaluate needs at least one episode");
  EvalSummary sum;
  sum.episodes = episodes;
  std::vector<double> steps;
  double successes = 0.0;
  double reward = 0.0;
  for (std::int64_t e = 0; e < episodes; ++e) {
    EnvState s = initial_state(map, params);
    double total = 0.0;
    while (!s.done) {
      const int a = argmax(net.forward(encode_state(s, map), ForwardMode{Mode::kEval, 0.0}));
      const StepOutcome out = env_step(s, static_cast<Action>(a), map, w, params);
      total += out.reward;
      s = out.next_state;
    }
    steps.push_back(s.step);
    successes += s.terminal_cause == TerminalCause::kGoal ? 1.0 : 0.0;
    reward += total;
  }
  const auto n = static_cast<double>(episodes);
  sum.success_rate = successes / n;
  sum.mean_steps = std::accumulate(steps.begin(), steps.end(), 0.0) / n;
  sum.median_steps = median_of(steps);
  sum.mean_total_reward = reward / n;
  return sum;
}

TrailingStats trailing_stats(const std::vector<EpisodeRecord>& records,
                             std::int64_t window, int optimal_steps) {
  TrailingStats t;
  const auto n = std::min<std::size_t>(records.size(),
                                       static_cast<std::size_t>(std::max<std::int64_t>(window, 0)));
  t.window = static_cast<std::int64_t>(n);
  if (n == 0) return t;
  std::vector<double> rewards;
  std::vector<double> steps;
  double successes = 0.0;
  double optimal = 0.0;
  for (auto it = records.end() - static_cast<std::ptrdiff_t>(n); it != records.end(); ++it) {
    rewards.push_back(it->total_reward);
    steps.push_back(it->steps);
    successes += it->success ? 1.0 : 0.0;
    optimal += (it->success && it->steps == optimal_steps) ? 1.0 : 0.0;
  }
  const auto count = static_cast<double>(n);
  auto mean_std = [count](const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / count;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / count);
  };
  mean_std(rewards, t.mean_reward, t.std_reward);
  mean_std(steps, t.mean_steps, t.std_steps);
  t.median_steps = median_of(steps);
  t.success_rate = successes / count;
  t.optimal_fraction = optimal / count;
  return t;
}

Comparison compare_variants(
    const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
    const std::function<void(const TrainConfig&, const RunArtifacts&)>& on_run) {
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  const GridMap map = resolve_map(base);
  const int optimal = bfs_shortest_path(map).value_or(-1);
  Comparison c;
  for (std::uint64_t seed : seeds) {
    for (Variant v : kAllVariants) {
      TrainConfig cfg = base;
      cfg.variant = v;
      cfg.seed = seed;
      try {
        const RunArtifacts run = train(cfg);
        if (on_run) on_run(cfg, run);
        c.runs.push_back({v, seed, trailing_stats(run.records, cfg.trailing_window, optimal)});
      } catch (const std::exception& e) {
        c.failures.push_back({v, seed, e.what()});
      }
    }
  }
  return c;
}

std::string comparison_runs_csv(const Comparison& c) {
  std::string out =
      "variant,seed,window,mean_trailing_reward,std_trailing_reward,"
      "mean_trailing_steps,std_trailing_steps,median_trailing_steps,"
      "success_rate,optimal_fraction\n";
  for (const auto& r : c.runs) {
    const auto& s = r.stats;
    out += std::string(variant_name(r.variant)) + "," + std::to_string(r.seed) + "," +
           std::to_string(s.window) + "," + format_g17(s.mean_reward) + "," +
           format_g17(s.std_reward) + "," + format_g17(s.mean_steps) + "," +
           format_g17(s.std_steps) + "," + format_g17(s.median_steps) + "," +
           format_g17(s.success_rate) + "," + format_g17(s.optimal_fraction) + "\n";
  }
  return out;
}

std::string comparison_summary_csv(const Comparison& c) {
  std::string out =
      "variant,runs,mean_trailing_reward,std_trailing_reward,mean_trailing_steps,"
      "std_trailing_steps,median_trailing_steps,success_rate,optimal_fraction\n";
  for (Variant v : kAllVariants) {
    std::vector<const TrailingStats*> rows;
    for (const auto& r : c.runs) {
      if (r.variant == v) rows.push_back(&r.stats);
    }
    if (rows.empty()) continue;
    auto avg = [&rows](double TrailingStats::*m) {
      double s = 0.0;
      for (const auto* r : rows) s += r->*m;
      return s / static_cast<double>(rows.size());
    };
    out += std::string(variant_name(v)) + "," + std::to_string(rows.size()) + "," +
           format_g17(avg(&TrailingStats::mean_reward)) + "," +
           format_g17(avg(&TrailingStats::std_reward)) + "," +
           format_g17(avg(&TrailingStats::mean_steps)) + "," +
           format_g17(avg(&TrailingStats::std_steps)) + "," +
           format_g17(avg(&TrailingStats::median_steps)) + "," +
           format_g17(avg(&TrailingStats::success_rate)) + "," +
           format_g17(avg(&TrailingStats::optimal_fraction)) + "\n";
  }
  return out;
}

std::string metrics_csv(const std::vector<EpisodeRecord>& records) {
  std::string out = "episode,total_reward,steps,success,terminal_cause,alpha,lr\n";
  for (const auto& r : records) {
    out += std::to_string(r.index) + "," + format_g17(r.total_reward) + "," +
           std::to_string(r.steps) + "," + (r.success ? "1" : "0") + "," +
           std::string(terminal_cause_name(r.terminal_cause)) + "," +
           format_g17(r.alpha_used) + "," + format_g17(r.lr_used) + "\n";
  }
  return out;
}

std::vector<EpisodeRecord> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "episode,total_reward,steps,success,terminal_cause,alpha,lr") {
    throw FormatError("metrics file has an unexpected header");
  }
  std::vector<EpisodeRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw FormatError("metrics row needs 7 cells: " + line);
    try {
      EpisodeRecord r;
      r.index = std::stoll(cells[0]);
      r.total_reward = std::stod(cells[1]);
      r.steps = std::stoi(cells[2]);
      r.success = cells[3] == "1";
      r.terminal_cause = parse_terminal_cause(cells[4]);
      r.alpha_used = std::stod(cells[5]);
      r.lr_used = std::stod(cells[6]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw FormatError("malformed metrics row: " + line);
    }
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'N', 'D', 'Q', 'N'};

void write_optimizer(std::ostream& out, const OptimizerState& opt) {
  write_u32(out, static_cast<std::uint32_t>(opt.kind));
  write_f64(out, opt.beta1);
  write_f64(out, opt.beta2);
  write_f64(out, opt.epsilon);
  write_u64(out, opt.step);
  write_u32(out, static_cast<std::uint32_t>(opt.first_moment.size()));
  for (std::size_t i = 0; i < opt.first_moment.size(); ++i) {
    const Matrix& m = opt.first_moment[i];
    const Matrix& v = opt.second_moment[i];
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
    write_u32(out, static_cast<std::uint32_t>(m.cols()));
    write_tensor(out, ConstParamView(m.data(), m.rows(), m.cols()));
    write_tensor(out, ConstParamView(v.data(), v.rows(), v.cols()));
  }
}

OptimizerState read_optimizer(std::istream& in) {
  OptimizerState opt;
  const std::uint32_t kind = read_u32(in);
  if (kind > 1) throw FormatError("unknown optimizer kind");
  opt.kind = static_cast<OptimizerKind>(kind);
  opt.beta1 = read_f64(in);
  opt.beta2 = read_f64(in);
  opt.epsilon = read_f64(in);
  opt.step = read_u64(in);
  const std::uint32_t count = read_u32(in);
  if (count > 4096) throw FormatError("implausible optimizer tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    if (static_cast<std::uint64_t>(rows) * cols > (1ull << 28)) {
      throw FormatError("implausible optimizer tensor shape");
    }
    Matrix m(rows, cols);
    Matrix v(rows, cols);
    read_tensor(in, ParamView(m.data(), rows, cols));
    read_tensor(in, ParamView(v.data(), rows, cols));
    opt.first_moment.push_back(std::move(m));
    opt.second_moment.push_back(std::move(v));
  }
  return opt;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kCheckpointVersion);
  write_network(out, ckpt.online);
  write_network(out, ckpt.target);
  write_optimizer(out, ckpt.optimizer);
  write_u64(out, ckpt.manifest.size());
  out.write(ckpt.manifest.data(), static_cast<std::streamsize>(ckpt.manifest.size()));
  std::string bytes = std::move(out).str();
  std::ostringstream tail(std::ios::binary);
  write_u64(tail, fnv1a64(bytes.data(), bytes.size()));
  return bytes + std::move(tail).str();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  constexpr std::size_t kHeader = sizeof kMagic + 4;
  if (bytes.size() < kHeader + 8) throw CheckpointCorruptError("checkpoint is truncated");
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw CheckpointCorruptError("not a checkpoint (bad magic)");
  }
  {
    std::istringstream head(bytes.substr(4, 4), std::ios::binary);
    const std::uint32_t version = read_u32(head);
    if (version != kCheckpointVersion) {
      throw CheckpointVersionError("checkpoint format version " + std::to_string(version) +
                                   " is not supported (expected " +
                                   std::to_string(kCheckpointVersion) + ")");
    }
  }
  const std::size_t body = bytes.size() - 8;
  std::istringstream tail(bytes.substr(body), std::ios::binary);
  if (read_u64(tail) != fnv1a64(bytes.data(), body)) {
    throw CheckpointCorruptError("checkpoint checksum mismatch");
  }
  std::istringstream in(bytes.substr(kHeader, body - kHeader), std::ios::binary);
  try {
    Rng noise_rng(0);
    Checkpoint ckpt;
    ckpt.online = read_network(in, noise_rng);
    ckpt.target = read_network(in, noise_rng);
    ckpt.optimizer = read_optimizer(in);
    const std::uint64_t len = read_u64(in);
    if (len > body) throw FormatError("manifest length exceeds file size");
    ckpt.manifest.resize(len);
    in.read(ckpt.manifest.data(), static_cast<std::streamsize>(len));
    if (!in || in.peek() != std::char_traits<char>::eof()) {
      throw FormatError("unexpected checkpoint layout");
    }
    return ckpt;
  } catch (const FormatError& e) {
    throw CheckpointCorruptError(std::string("checkpoint is corrupt: ") + e.what());
  }
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write to " + tmp + " failed");
  }
  std::filesystem::rename(tmp, p);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace ndqn
