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

// ndqn: train, evaluate and compare grid-navigation agents.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ndqn/config.hpp"
#include "ndqn/env.hpp"
#include "ndqn/gradcheck.hpp"
#include "ndqn/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Config flags shared by train, compare and show-config.
struct ConfigFlags {
  std::string config_path;
  std::string preset;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file")
        ->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "smoke (200 episodes) or paper (5000)");
    for (const auto& key : ndqn::config_keys()) {
      std::string name = "--" + key;
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (dashed != key) name += ",--" + dashed;
      app->add_option_function<std::string>(
          name, [this, key](const std::string& v) { overrides[key] = v; },
          "config key " + key);
    }
  }

  // defaults < preset < file < flags
  ndqn::TrainConfig resolve() const {
    ndqn::TrainConfig cfg;
    if (!preset.empty()) ndqn::apply_preset(cfg, preset);
    if (!config_path.empty()) ndqn::apply_config_text(cfg, ndqn::read_file(config_path));
    for (const auto& [key, value] : overrides) ndqn::set_config_value(cfg, key, value);
    return cfg;
  }
};

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NDQN_OUT_DIR"); env && *env) return env;
  return "ndqn_out";
}

void write_run(const std::string& dir, const ndqn::RunArtifacts& run) {
  ndqn::write_file(dir + "/metrics.csv", ndqn::metrics_csv(run.records));
  ndqn::write_file(dir + "/manifest.json", run.manifest);
  ndqn::save_checkpoint(run.final_state, dir + "/checkpoint.ndqn");
}

void print_progress(const std::vector<ndqn::EpisodeRecord>& records,
                    std::int64_t total, std::int64_t every) {
  const auto s = ndqn::trailing_stats(records, every, -1);
  const auto& last = records.back();
  std::printf(
      "episode %lld/%lld  mean_reward %.4f  success %.2f  median_steps %.1f  "
      "alpha %.4f  lr %.3g\n",
      static_cast<long long>(last.index + 1), static_cast<long long>(total),
      s.mean_reward, s.success_rate, s.median_steps, last.alpha_used, last.lr_used);
  std::fflush(stdout);
}

int cmd_train(const ConfigFlags& flags, const std::string& out_flag) {
  const ndqn::TrainConfig cfg = flags.resolve();
  cfg.validate();
  const std::string dir = output_dir(out_flag);
  std::vector<ndqn::EpisodeRecord> seen;
  ndqn::TrainObserver obs;
  obs.on_episode = [&](const ndqn::EpisodeRecord& r) {
    seen.push_back(r);
    if (cfg.progress_every > 0 && seen.size() % cfg.progress_every == 0) {
      print_progress(seen, cfg.episodes, cfg.progress_every);
    }
  };
  std::printf("training %s seed %llu for %lld episodes -> %s\n",
              std::string(ndqn::variant_name(cfg.variant)).c_str(),
              static_cast<unsigned long long>(*cfg.seed),
              static_cast<long long>(cfg.episodes), dir.c_str());
  const ndqn::RunArtifacts run = ndqn::train(cfg, obs);
  write_run(dir, run);
  const auto bfs = ndqn::bfs_shortest_path(ndqn::resolve_map(cfg)).value_or(-1);
  const auto t = ndqn::trailing_stats(run.records, cfg.trailing_window, bfs);
  std::printf(
      "done in %.1f s: trailing %lld episodes  success %.3f  median_steps %.1f  "
      "optimal %.3f  mean_reward %.4f\n",
      run.wall_seconds, static_cast<long long>(t.window), t.success_rate, t.median_steps,
      t.optimal_fraction, t.mean_reward);
  return kExitOk;
}

struct MapFlags {
  std::string source;  // empty: from checkpoint (evaluate) or default
  std::uint64_t seed = 7;
  double density = 0.05;
  std::string file;

  void attach(CLI::App* app) {
    app->add_option("--map", source, "default, generated or file");
    app->add_option("--map-seed,--map_seed", seed, "layout seed for generated maps");
    app->add_option("--map-density,--map_density", density, "obstacle density for generated maps");
    app->add_option("--map-file,--map_file", file, "map text file")->check(CLI::ExistingFile);
  }

  std::optional<ndqn::GridMap> load() const {
    std::string src = source;
    if (src.empty() && !file.empty()) src = "file";
    if (src.empty()) return std::nullopt;
    if (src == "default") return ndqn::build_default_map();
    if (src == "generated") return ndqn::generate_map(seed, density);
    if (src == "file") {
      if (file.empty()) throw ndqn::ConfigError("map_file", "--map file needs --map-file");
      return ndqn::parse_map(ndqn::read_file(file));
    }
    throw ndqn::ConfigError("map", "map must be default, generated or file");
  }
};

int cmd_evaluate(const std::string& checkpoint, std::int64_t episodes,
                 const MapFlags& map_flags) {
  const ndqn::Checkpoint ckpt = ndqn::load_checkpoint(checkpoint);
  ndqn::TrainConfig cfg = ndqn::config_from_manifest(ckpt.manifest);
  const ndqn::GridMap map = map_flags.load().value_or(ndqn::resolve_map(cfg));
  const auto s = ndqn::evaluate(ckpt.online, map, cfg.reward, cfg.env, episodes);
  std::printf("episodes %lld\nsuccess_rate %.17g\nmean_steps %.17g\nmedian_steps %.17g\n"
              "mean_total_reward %.17g\n",
              static_cast<long long>(s.episodes), s.success_rate, s.mean_steps,
              s.median_steps, s.mean_total_reward);
  return kExitOk;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ndqn::ConfigError("seeds", "cannot parse seed '" + item + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return seeds;
}

int cmd_compare(const ConfigFlags& flags, const std::string& seeds_text,
                const std::string& out_flag) {
  ndqn::TrainConfig base = flags.resolve();
  const auto seeds = parse_seeds(seeds_text);
  {
    ndqn::TrainConfig probe = base;
    probe.seed = seeds.front();
    probe.validate();
  }
  const std::string dir = output_dir(out_flag);
  const std::size_t total = seeds.size() * std::size(ndqn::kAllVariants);
  std::size_t done = 0;
  const auto c = ndqn::compare_variants(
      base, seeds, [&](const ndqn::TrainConfig& cfg, const ndqn::RunArtifacts& run) {
        const std::string run_dir = dir + "/" + std::string(ndqn::variant_name(cfg.variant)) +
                                    "/seed_" + std::to_string(*cfg.seed);
        write_run(run_dir, run);
        ++done;
        std::printf("[%zu/%zu] %s seed %llu finished in %.1f s\n", done, total,
                    std::string(ndqn::variant_name(cfg.variant)).c_str(),
                    static_cast<unsigned long long>(*cfg.seed), run.wall_seconds);
        std::fflush(stdout);
      });
  ndqn::write_file(dir + "/runs.csv", ndqn::comparison_runs_csv(c));
  const std::string summary = ndqn::comparison_summary_csv(c);
  ndqn::write_file(dir + "/summary.csv", summary);
  std::printf("%s", summary.c_str());
  if (!c.failures.empty()) {
    std::fprintf(stderr, "%zu run(s) failed:\n", c.failures.size());
    for (const auto& f : c.failures) {
      std::fprintf(stderr, "  %s seed %llu: %s\n",
                   std::string(ndqn::variant_name(f.variant)).c_str(),
                   static_cast<unsigned long long>(f.seed), f.message.c_str());
    }
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_render_map(const MapFlags& map_flags) {
  const ndqn::GridMap map = map_flags.load().value_or(ndqn::build_default_map());
  const int a = map.size();
  std::printf("# %dx%d map, origin (0,0) at the bottom-left; x grows right, y grows up\n", a, a);
  std::printf("# top line is y=%d, bottom line is y=0\n", a - 1);
  std::printf("%s", ndqn::render_ascii(map).c_str());
  std::printf("legend: S start (%d,%d)  G goal (%d,%d)  # obstacle  . free\n", map.start().x,
              map.start().y, map.goal().x, map.goal().y);
  return kExitOk;
}

int cmd_gradcheck(const ndqn::GradcheckOptions& opts) {
  const auto rows = ndqn::run_gradcheck(opts);
  std::printf("%-16s %9s %14s  %-6s %s\n", "component", "instances", "max_rel_error",
              "result", "worst tensor");
  const ndqn::GradcheckRow* failed = nullptr;
  for (const auto& r : rows) {
    std::printf("%-16s %9d %14.3e  %-6s %s\n", r.component.c_str(), r.instances,
                r.max_rel_error, r.passed ? "pass" : "FAIL", r.worst_tensor.c_str());
    if (!r.passed && !failed) failed = &r;
  }
  if (failed) {
    std::fprintf(stderr, "gradcheck failed: component %s, %s (relative error %.3e)\n",
                 failed->component.c_str(), failed->worst_tensor.c_str(),
                 failed->max_rel_error);
    return kExitRuntime;
  }
  std::printf("all components below %.0e\n", opts.tolerance);
  return kExitOk;
}

int cmd_show_config(const ConfigFlags& flags) {
  ndqn::TrainConfig cfg = flags.resolve();
  ndqn::TrainConfig probe = cfg;
  if (!probe.seed) probe.seed = 0;
  probe.validate();
  std::printf("%s", ndqn::format_config(cfg).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy DQN agents for grid UAV navigation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ndqn::kVersion));

  ConfigFlags train_flags;
  std::string train_out;
  auto* train = app.add_subcommand("train", "train one agent");
  train_flags.attach(train);
  train->add_option("--out", train_out, "output directory (else NDQN_OUT_DIR, else ndqn_out)");

  std::string checkpoint;
  std::int64_t eval_episodes = 100;
  MapFlags eval_map;
  auto* eval = app.add_subcommand("evaluate", "greedy evaluation of a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--episodes", eval_episodes, "evaluation episodes");
  eval_map.attach(eval);

  ConfigFlags compare_flags;
  std::string seeds_text;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "train every variant for each seed");
  compare_flags.attach(compare);
  compare->add_option("--seeds", seeds_text, "comma-separated seeds")->required();
  compare->add_option("--out", compare_out, "output directory (else NDQN_OUT_DIR, else ndqn_out)");

  MapFlags render_map;
  auto* render = app.add_subcommand("render-map", "print a map as ASCII");
  render_map.attach(render);

  ndqn::GradcheckOptions gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("--instances", gc.instances, "random instances per component");
  gradcheck->add_option("--corrupt", gc.corrupt, "test hook: perturb one component's gradient");

  ConfigFlags show_flags;
  auto* show = app.add_subcommand("show-config", "print the fully resolved configuration");
  show_flags.attach(show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_flags, train_out);
    if (*eval) return cmd_evaluate(checkpoint, eval_episodes, eval_map);
    if (*compare) return cmd_compare(compare_flags, seeds_text, compare_out);
    if (*render) return cmd_render_map(render_map);
    if (*gradcheck) return cmd_gradcheck(gc);
    if (*show) return cmd_show_config(show_flags);
  } catch (const ndqn::ConfigError& e) {
    std::fprintf(stderr, "config error [%s]: %s\n", e.key().c_str(), e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
