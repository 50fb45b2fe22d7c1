// fepl: data collection, training, evaluation, localization, navigation and
// benchmarks for the free-energy LiDAR localizer.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fepl/bench.hpp"
#include "fepl/config.hpp"
#include "fepl/dataset.hpp"
#include "fepl/error.hpp"
#include "fepl/fep.hpp"
#include "fepl/genmodel.hpp"
#include "fepl/io.hpp"
#include "fepl/train.hpp"
#include "fepl/world.hpp"

#ifndef FEPL_DEFAULT_MAP
#define FEPL_DEFAULT_MAP "maps/corridor.map"
#endif

namespace fs = std::filesystem;
using namespace fepl;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kBadValue = 3, kMissingFile = 4, kBadFormat = 5 };

// A flag that feeds one config key; applied after the config file.
struct FlagBinding {
  std::string key;
  std::string value;
  CLI::Option* option{nullptr};
};

struct Command {
  CLI::App* app{nullptr};
  std::deque<FlagBinding> flags;
  std::string config_file;
  std::vector<std::string> sets;
  std::string save_init;

  void bind(const std::string& flag, const std::string& key, const std::string& help) {
    FlagBinding& b = flags.emplace_back();
    b.key = key;
    b.option = app->add_option(flag, b.value, help + " [" + key + "]");
  }
};

std::string require_existing(const std::string& path, const std::string& what) {
  if (path.empty()) throw IoError(what + " path is empty");
  if (!fs::exists(path)) throw IoError(fmt::format("{} not found: '{}'", what, path));
  return path;
}

WorldMap load_config_map(const RunConfig& c) {
  return load_map(require_existing(c.map_path.empty() ? FEPL_DEFAULT_MAP : c.map_path, "map file"));
}

fs::path out_dir(const RunConfig& c) { return c.out.empty() ? fs::path("out") : fs::path(c.out); }

fs::path out_file(const RunConfig& c, const char* fallback) { return c.out.empty() ? fs::path(fallback) : fs::path(c.out); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
}

GenModel load_checked_model(const RunConfig& c, const SensorConfig& sensor) {
  GenModel model = load_model(require_existing(c.model_path.empty() ? "model.fepl" : c.model_path, "model file"));
  if (model.output_dim() != sensor.beam_count) {
    throw DimensionMismatch(fmt::format("model predicts {} beams but sensor.beams = {}", model.output_dim(),
                                        sensor.beam_count));
  }
  return model;
}

int run_collect(ConfigStore& store) {
  const RunConfig& c = store.config();
  const WorldMap map = load_config_map(c);
  const SensorConfig sensor = c.sensor();
  sensor.validate();
  if (c.collect_n < 1) throw ConfigError("invalid value for collect.n: must be >= 1");
  Rng rng(c.seed);
  const Dataset data = collect_dataset(map, sensor, c.collect_n, rng);
  const fs::path out = out_file(c, "data.ds");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_dataset(data, out);
  store.write_snapshot(out.string() + ".config");
  fmt::print("wrote {} records ({} beams) to {}\n", data.records.size(), data.beam_count(), out.string());
  return kOk;
}

int run_train(ConfigStore& store, const std::string& save_init) {
  RunConfig& c = store.config();
  const Dataset data = load_dataset(require_existing(c.dataset_path.empty() ? "data.ds" : c.dataset_path, "dataset"));
  if (data.beam_count() != c.beam_count) {
    throw DimensionMismatch(
        fmt::format("dataset has {} beams but sensor.beams = {}", data.beam_count(), c.beam_count));
  }
  const Architecture arch = c.architecture();
  Rng rng(c.seed);
  const GenModel initial = init_model(arch, rng);
  const fs::path out = out_file(c, "model.fepl");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  if (!save_init.empty()) save_model(initial, save_init);

  TrainConfig tc = c.train;
  tc.seed = c.seed;
  std::string history = "epoch,train_l1,validation_l1\n";
  const TrainResult result = train(initial, data, tc, [&](const EpochStats& e) {
    fmt::print("epoch {:4d}  train {:.6f}  val {:.6f}\n", e.epoch, e.train_l1, e.validation_l1);
    std::fflush(stdout);
    history += fmt::format("{},{:.9g},{:.9g}\n", e.epoch, e.train_l1, e.validation_l1);
  });
  save_model(result.model, out);
  write_text(out.string() + ".history.csv", history);
  store.write_snapshot(out.string() + ".config");
  fmt::print("best epoch {} ({} parameters) -> {}\n", result.best_epoch, result.model.parameters().size(),
             out.string());
  return kOk;
}

int run_eval(ConfigStore& store) {
  const RunConfig& c = store.config();
  const Dataset data = load_dataset(require_existing(c.dataset_path.empty() ? "data.ds" : c.dataset_path, "dataset"));
  const GenModel model = load_checked_model(c, data.sensor);
  const Split split = split_sizes(data.records.size(), c.train.validation_fraction);
  const double all = mean_l1(model, data, 0, data.records.size());
  const double held = split.validation > 0 ? mean_l1(model, data, split.train, split.validation) : all;
  const std::string report = fmt::format(
      "records,{}\nvalidation_records,{}\nmae_all,{:.9g}\nmae_validation,{:.9g}\n", data.records.size(),
      split.validation, all, held);
  const fs::path dir = out_dir(c);
  write_text(dir / "eval.csv", report);
  store.write_snapshot(dir / "config.txt");
  fmt::print("mean absolute error: all {:.6f}, held-out {:.6f} ({} records)\n", all, held, split.validation);
  return kOk;
}

std::string trace_csv(const std::vector<TraceEntry>& trace, int iter_base) {
  std::string out = "trial,iter,true_x,true_y,belief_x,belief_y,ax,ay,err,dist_goal,F\n";
  for (const TraceEntry& e : trace) {
    out += fmt::format("0,{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", e.iter + iter_base,
                       e.truth.x, e.truth.y, e.belief.x, e.belief.y, e.action.vx, e.action.vy, e.error, e.dist_goal,
                       e.free_energy);
  }
  return out;
}

int run_localize(ConfigStore& store) {
  const RunConfig& c = store.config();
  const WorldMap map = load_config_map(c);
  const SensorConfig sensor = c.sensor();
  sensor.validate();
  const GenModel model = load_checked_model(c, sensor);
  if (c.iterations < 1) throw ConfigError("invalid value for bench.iterations: must be >= 1");
  Rng rng(c.seed);
  Pose2 truth{c.true_x, c.true_y};
  if (std::isnan(truth.x) || std::isnan(truth.y)) truth = sample_free_pose(map, rng);
  if (!map.is_free(truth)) throw ValidationError("true pose is not in free space");
  Pose2 belief{c.belief_x, c.belief_y};
  if (std::isnan(belief.x) || std::isnan(belief.y)) belief = map.bounds().center();
  const std::vector<Pose2> path(static_cast<std::size_t>(c.iterations), truth);
  const WorldContext ctx{&map, sensor, &model};
  const std::vector<TraceEntry> trace = localize(ctx, path, belief, c.fep, rng);
  const fs::path dir = out_dir(c);
  write_text(dir / "localize_trace.csv", trace_csv(trace, 1));
  store.write_snapshot(dir / "config.txt");
  fmt::print("true ({:.3f}, {:.3f})  final belief ({:.3f}, {:.3f})  error {:.3f} m\n", truth.x, truth.y,
             trace.back().belief.x, trace.back().belief.y, trace.back().error);
  return kOk;
}

int run_navigate(ConfigStore& store) {
  const RunConfig& c = store.config();
  const WorldMap map = load_config_map(c);
  const SensorConfig sensor = c.sensor();
  sensor.validate();
  const GenModel model = load_checked_model(c, sensor);
  Rng rng(c.seed);
  Pose2 start{c.start_x, c.start_y}, goal{c.goal_x, c.goal_y};
  const bool have_start = !std::isnan(start.x) && !std::isnan(start.y);
  const bool have_goal = !std::isnan(goal.x) && !std::isnan(goal.y);
  if (!have_start || !have_goal) {
    const auto [s, g] = sample_start_goal(map, c.min_start_goal_distance, rng, 100000, c.clear_path);
    if (!have_start) start = s;
    if (!have_goal) goal = g;
  }
  if (!map.is_free(start)) throw ValidationError("start pose is not in free space");
  if (!map.is_free(goal)) throw ValidationError("goal pose is not in free space");
  FepParams params = c.fep;
  params.success_radius = c.success_radius;
  const WorldContext ctx{&map, sensor, &model};
  const NavigationResult result = navigate(ctx, start, goal, params, rng);
  const fs::path dir = out_dir(c);
  write_text(dir / "navigate_trace.csv", trace_csv(result.trace, 0));
  store.write_snapshot(dir / "config.txt");
  fmt::print("start ({:.3f}, {:.3f}) goal ({:.3f}, {:.3f}): {} after {} iterations, final distance {:.3f} m\n",
             start.x, start.y, goal.x, goal.y, result.success ? "reached" : "not reached", result.iterations,
             result.trace.back().dist_goal);
  return result.success ? kOk : kFailure;
}

int run_bench(ConfigStore& store) {
  const RunConfig& c = store.config();
  const WorldMap map = load_config_map(c);
  BenchSetup setup;
  setup.map = &map;
  setup.sensor = c.sensor();
  setup.sensor.validate();
  setup.fep = c.fep;
  setup.pf = c.pf;
  const ExperimentConfig ec = c.experiment_config();
  std::optional<GenModel> model;
  if (ec.kind == ExperimentKind::kNavigation || ec.methods != MethodSelect::kPf) {
    model.emplace(load_checked_model(c, setup.sensor));
    setup.model = &*model;
  }
  const fs::path dir = out_dir(c);
  std::vector<fs::path> written;
  if (ec.kind == ExperimentKind::kNavigation) {
    const NavigationReport r = run_navigation(setup, ec);
    written = write_navigation_outputs(r, dir);
    fmt::print("success rate {:.1f}% ({} trials); mean iterations to success {:.2f}; "
               "{} trials at 11-13.5 m: {:.2f} (reference 12.5)\n",
               100.0 * r.success_rate, r.trials.size(), r.mean_iterations_success, r.band_count,
               r.mean_iterations_band);
  } else {
    const LocalizationReport r =
        ec.kind == ExperimentKind::kStatic ? run_static_localization(setup, ec) : run_traversal(setup, ec);
    written = write_localization_outputs(r, dir);
    for (const MetricSeries& s : r.series) {
      fmt::print("{}: iteration 1 mean {:.3f} m, final mean {:.3f} m, final std {:.3f} m\n", s.method, s.mean.front(),
                 s.mean.back(), s.stddev.back());
    }
  }
  store.write_snapshot(dir / "config.txt");
  for (const fs::path& p : written) fmt::print("wrote {}\n", p.string());
  return kOk;
}

std::string map_svg(const WorldMap& map) {
  const Bounds& b = map.bounds();
  const double scale = 40.0, pad = 10.0;
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      b.width() * scale + 2 * pad, b.height() * scale + 2 * pad);
  auto sx = [&](double x) { return pad + (x - b.xmin) * scale; };
  auto sy = [&](double y) { return pad + (b.ymax - y) * scale; };
  for (const Segment& s : map.segments()) {
    out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\" stroke-width=\"3\"/>\n",
                       sx(s.x1), sy(s.y1), sx(s.x2), sy(s.y2));
  }
  out += "</svg>\n";
  return out;
}

int run_show_map(ConfigStore& store) {
  const RunConfig& c = store.config();
  const WorldMap map = load_config_map(c);
  const Bounds& b = map.bounds();
  fmt::print("bounds ({}, {}) - ({}, {}), {} x {} m\n", b.xmin, b.ymin, b.xmax, b.ymax, b.width(), b.height());
  fmt::print("clearance {} m, {} obstacle segments, identity {:016x}\n", map.clearance(), map.explicit_count(),
             map.identity_hash());
  for (const Segment& s : map.explicit_segments()) {
    fmt::print("  segment ({}, {}) - ({}, {})\n", s.x1, s.y1, s.x2, s.y2);
  }
  const fs::path dir = out_dir(c);
  write_text(dir / "map.svg", map_svg(map));
  store.write_snapshot(dir / "config.txt");
  return kOk;
}

void bind_common(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_file, "key = value config file");
  cmd.app->add_option("--set", cmd.sets, "override any config key, key=value (repeatable)");
  cmd.bind("--seed", "seed", "global seed");
  cmd.bind("--out", "out", "output path");
  cmd.bind("--map", "map", "map file");
}

void bind_sensor(Command& cmd) {
  cmd.bind("--beams", "sensor.beams", "beam count");
  cmd.bind("--noise", "sensor.noise", "range noise std, m");
}

void bind_fep(Command& cmd) {
  cmd.bind("--alpha", "fep.alpha", "perception step size");
  cmd.bind("--beta", "fep.beta", "goal attractor weight");
  cmd.bind("--sigma-o", "fep.sigma_o", "observation variance");
  cmd.bind("--sigma-x", "fep.sigma_x", "goal variance");
  cmd.bind("--gamma", "fep.gamma", "action step size");
  cmd.bind("--dt", "fep.dt", "control period, s");
  cmd.bind("--a-max", "fep.a_max", "velocity limit, m/s");
  cmd.bind("--max-iterations", "fep.max_iterations", "navigation iteration cap");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-energy LiDAR localization and navigation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  std::deque<Command> commands;
  auto add = [&](const char* name, const char* help) -> Command& {
    Command& c = commands.emplace_back();
    c.app = app.add_subcommand(name, help);
    bind_common(c);
    return c;
  };

  Command& collect = add("collect", "sample poses and scans into a dataset file");
  collect.bind("--n", "collect.n", "number of samples");
  bind_sensor(collect);

  Command& trainc = add("train", "train the generative model");
  trainc.bind("--dataset", "dataset", "dataset file");
  trainc.bind("--epochs", "train.epochs", "epochs");
  trainc.bind("--batch", "train.batch", "batch size");
  trainc.bind("--lr", "train.lr", "Adam learning rate");
  trainc.bind("--channels", "model.channels", "decoder channels");
  trainc.bind("--hidden", "model.hidden", "hidden units");
  trainc.bind("--beams", "sensor.beams", "beam count");
  trainc.app->add_option("--save-init", trainc.save_init, "also write the initial model here");

  Command& eval = add("eval-model", "held-out scan error of a model");
  eval.bind("--model", "model", "model file");
  eval.bind("--dataset", "dataset", "dataset file");

  Command& loc = add("localize", "single static localization run");
  loc.bind("--model", "model", "model file");
  loc.bind("--iterations", "bench.iterations", "iterations");
  loc.bind("--true-x", "localize.true_x", "true x, m");
  loc.bind("--true-y", "localize.true_y", "true y, m");
  loc.bind("--belief-x", "localize.belief_x", "initial belief x, m");
  loc.bind("--belief-y", "localize.belief_y", "initial belief y, m");
  bind_sensor(loc);
  bind_fep(loc);

  Command& nav = add("navigate", "single goal-directed run");
  nav.bind("--model", "model", "model file");
  nav.bind("--start-x", "navigate.start_x", "start x, m");
  nav.bind("--start-y", "navigate.start_y", "start y, m");
  nav.bind("--goal-x", "navigate.goal_x", "goal x, m");
  nav.bind("--goal-y", "navigate.goal_y", "goal y, m");
  nav.bind("--success-radius", "bench.success_radius", "success radius, m");
  bind_sensor(nav);
  bind_fep(nav);

  Command& bench = add("bench", "run a benchmark experiment");
  bench.bind("--model", "model", "model file");
  bench.bind("--experiment", "bench.experiment", "static | traversal | navigation");
  bench.bind("--trials", "bench.trials", "trials");
  bench.bind("--iterations", "bench.iterations", "iterations per trial");
  bench.bind("--method", "bench.method", "fep | pf | both");
  bench.bind("--jobs", "jobs", "concurrent trials");
  bench.bind("--success-radius", "bench.success_radius", "success radius, m");
  bench.bind("--min-distance", "bench.min_start_goal_distance", "minimum start-goal distance, m");
  bench.bind("--clear-path", "bench.clear_path", "require a straight wall-free start-goal line");
  bench.bind("--particles", "pf.n", "particle count");
  bind_sensor(bench);
  bind_fep(bench);

  add("show-map", "print a map summary and render it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    std::cerr << "fepl: unknown flag: " << e.what() << "\n";
    return kUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << "fepl: usage error: " << e.what() << "\n";
    return kUsage;
  }

  Command* cmd = nullptr;
  for (Command& c : commands) {
    if (c.app->parsed()) cmd = &c;
  }
  const std::string name = cmd->app->get_name();

  try {
    ConfigStore store;
    store.apply_env();
    if (!cmd->config_file.empty()) store.apply_file(require_existing(cmd->config_file, "config file"));
    for (const std::string& kv : cmd->sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("invalid value for --set: expected key=value, got '" + kv + "'");
      store.set(kv.substr(0, eq), kv.substr(eq + 1), ConfigSource::kFlag);
    }
    for (const FlagBinding& b : cmd->flags) {
      if (b.option->count() > 0) store.set(b.key, b.value, ConfigSource::kFlag);
    }
    if (store.config().jobs < 1) throw ConfigError("invalid value for jobs: must be >= 1");

    if (name == "collect") return run_collect(store);
    if (name == "train") return run_train(store, cmd->save_init);
    if (name == "eval-model") return run_eval(store);
    if (name == "localize") return run_localize(store);
    if (name == "navigate") return run_navigate(store);
    if (name == "bench") return run_bench(store);
    return run_show_map(store);
  } catch (const ConfigError& e) {
    std::cerr << "fepl " << name << ": invalid config value: " << e.what() << "\n";
    return kBadValue;
  } catch (const IoError& e) {
    std::cerr << "fepl " << name << ": missing file: " << e.what() << "\n";
    return kMissingFile;
  } catch (const FormatError& e) {
    std::cerr << "fepl " << name << ": bad file format: " << e.what() << "\n";
    return kBadFormat;
  } catch (const ParseError& e) {
    std::cerr << "fepl " << name << ": parse error: " << e.what() << "\n";
    return kBadValue;
  } catch (const fepl::ValidationError& e) {
    std::cerr << "fepl " << name << ": invalid config value: " << e.what() << "\n";
    return kBadValue;
  } catch (const std::exception& e) {
    std::cerr << "fepl " << name << ": error: " << e.what() << "\n";
    return kFailure;
  }
}
