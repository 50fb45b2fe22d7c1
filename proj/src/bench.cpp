#include "fepl/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "fepl/error.hpp"

namespace fepl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be
// written to slots indexed by i; the first exception is rethrown.
template <typename Fn>
void run_indexed(int n, int jobs, Fn&& fn) {
  const int workers = std::clamp(jobs, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

bool wants_fep(MethodSelect m) { return m != MethodSelect::kPf; }
bool wants_pf(MethodSelect m) { return m != MethodSelect::kFep; }

void check_setup(const BenchSetup& setup, const ExperimentConfig& cfg) {
  cfg.validate();
  if (setup.map == nullptr) throw ValidationError("bench: no map");
  setup.sensor.validate();
  if (wants_fep(cfg.methods) || cfg.kind == ExperimentKind::kNavigation) {
    if (setup.model == nullptr) throw ValidationError("bench: no model");
    if (setup.model->output_dim() != setup.sensor.beam_count) {
      throw DimensionMismatch("model predicts " + std::to_string(setup.model->output_dim()) +
                              " beams, sensor has " + std::to_string(setup.sensor.beam_count));
    }
    setup.fep.validate();
  }
  if (wants_pf(cfg.methods) && cfg.kind != ExperimentKind::kNavigation) {
    setup.pf.validate(setup.sensor.beam_count);
  }
}

std::vector<Pose2> traversal_path(const ExperimentConfig& cfg, double lateral) {
  std::vector<Pose2> path;
  path.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int k = 0; k < cfg.iterations; ++k) {
    const double s = std::min(k * cfg.traversal_increment, cfg.traversal_length);
    path.push_back({cfg.traversal_start.x + s, cfg.traversal_start.y + lateral});
  }
  return path;
}

struct LocTrial {
  TrialRecord fep;
  TrialRecord pf;
};

TraceEntry carried(const TraceEntry& last, int k, const Pose2& truth) {
  TraceEntry e = last;
  e.iter = k;
  e.truth = truth;
  return e;
}

// Both filters see the same scan sequence; the PF owns a separate stream for
// its own sampling.
LocTrial run_localization_trial(const BenchSetup& setup, const ExperimentConfig& cfg, int trial,
                                const std::vector<Pose2>& path, Rng& trial_rng) {
  const WorldMap& map = *setup.map;
  const Bounds& bounds = map.bounds();
  Rng scan_rng(trial_rng());
  Rng pf_rng(trial_rng());

  LocTrial out;
  out.fep.trial = out.pf.trial = trial;
  out.fep.method = "fep";
  out.pf.method = "pf";

  const bool use_fep = wants_fep(cfg.methods);
  const bool use_pf = wants_pf(cfg.methods);

  Belief belief;
  TraceEntry fep_last;
  if (use_fep) {
    belief.x = clamp_unit(normalize_pose(bounds, cfg.initial_belief.value_or(bounds.center())));
    belief.alpha = setup.fep.alpha;
    belief.sigma_o = {setup.fep.sigma_o};
    fep_last.belief = denormalize_pose(bounds, belief.x);
    fep_last.truth = path.front();
    fep_last.error = distance(fep_last.belief, fep_last.truth);
    fep_last.dist_goal = kNaN;
    fep_last.free_energy = kNaN;
  }
  ParticleSet ps;
  if (use_pf) ps = init_uniform(map, setup.pf, pf_rng);

  for (int k = 0; k < static_cast<int>(path.size()); ++k) {
    const Pose2& truth = path[static_cast<std::size_t>(k)];
    const Scan scan = simulate_scan(map, truth, setup.sensor, scan_rng);
    if (use_fep) {
      if (!out.fep.diverged) {
        try {
          const NormScan o = normalize_scan(scan, setup.sensor.max_range);
          belief = perceive_step(belief, o, *setup.model);
          TraceEntry e;
          e.iter = k;
          e.truth = truth;
          e.belief = denormalize_pose(bounds, belief.x);
          e.error = distance(e.belief, truth);
          e.dist_goal = kNaN;
          e.free_energy = free_energy(o, belief, *setup.model);
          fep_last = e;
        } catch (const DivergenceError&) {
          out.fep.diverged = true;
        }
      }
      out.fep.trace.push_back(carried(fep_last, k, truth));
    }
    if (use_pf) {
      ps = pf_step(ps, scan, map, setup.sensor, setup.pf, pf_rng);
      TraceEntry e;
      e.iter = k;
      e.truth = truth;
      e.belief = estimate(ps);
      e.error = distance(e.belief, truth);
      e.dist_goal = kNaN;
      e.free_energy = kNaN;
      out.pf.trace.push_back(e);
    }
  }
  return out;
}

LocalizationReport collect_report(ExperimentKind kind, const ExperimentConfig& cfg,
                                  std::vector<LocTrial>& trials) {
  LocalizationReport report;
  report.kind = kind;
  auto gather = [&](const std::string& method, TrialRecord LocTrial::*field) {
    std::vector<std::vector<double>> rows;
    rows.reserve(trials.size());
    for (LocTrial& t : trials) {
      std::vector<double> row;
      for (const TraceEntry& e : (t.*field).trace) row.push_back(e.error);
      rows.push_back(std::move(row));
    }
    report.series.push_back(aggregate(method, rows));
    for (LocTrial& t : trials) report.trials.push_back(std::move(t.*field));
  };
  if (wants_fep(cfg.methods)) gather("fep", &LocTrial::fep);
  if (wants_pf(cfg.methods)) gather("pf", &LocTrial::pf);
  return report;
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.9g}", v);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "static") return ExperimentKind::kStatic;
  if (s == "traversal") return ExperimentKind::kTraversal;
  if (s == "navigation") return ExperimentKind::kNavigation;
  throw ValidationError("unknown experiment '" + s + "' (static, traversal, navigation)");
}

MethodSelect parse_method_select(const std::string& s) {
  if (s == "fep") return MethodSelect::kFep;
  if (s == "pf") return MethodSelect::kPf;
  if (s == "both") return MethodSelect::kBoth;
  throw ValidationError("unknown method '" + s + "' (fep, pf, both)");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kStatic: return "static";
    case ExperimentKind::kTraversal: return "traversal";
    case ExperimentKind::kNavigation: return "navigation";
  }
  return "?";
}

std::string to_string(MethodSelect m) {
  switch (m) {
    case MethodSelect::kFep: return "fep";
    case MethodSelect::kPf: return "pf";
    case MethodSelect::kBoth: return "both";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ValidationError("bench.trials must be >= 1");
  if (iterations < 1) throw ValidationError("bench.iterations must be >= 1");
  if (!(success_radius > 0.0)) throw ValidationError("bench.success_radius must be > 0");
  if (!(min_start_goal_distance >= 0.0)) {
    throw ValidationError("bench.min_start_goal_distance must be >= 0");
  }
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  if (!(traversal_increment >= 0.0)) throw ValidationError("bench.traversal_increment must be >= 0");
  if (!(traversal_length >= 0.0)) throw ValidationError("bench.traversal_length must be >= 0");
  if (!(traversal_lateral_jitter >= 0.0)) throw ValidationError("bench.traversal_jitter must be >= 0");
}

MetricSeries aggregate(const std::string& method, const std::vector<std::vector<double>>& rows) {
  MetricSeries s;
  s.method = method;
  s.n_trials = static_cast<int>(rows.size());
  if (rows.empty()) return s;
  const std::size_t len = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != len) throw DimensionMismatch("aggregate: rows differ in length");
  }
  s.mean.assign(len, 0.0);
  s.stddev.assign(len, 0.0);
  const double n = static_cast<double>(rows.size());
  for (std::size_t k = 0; k < len; ++k) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r[k];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[k] - mean) * (r[k] - mean);
    s.mean[k] = mean;
    s.stddev[k] = rows.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return s;
}

const MetricSeries* LocalizationReport::find(const std::string& method) const {
  for (const MetricSeries& s : series) {
    if (s.method == method) return &s;
  }
  return nullptr;
}

LocalizationReport run_static_localization(const BenchSetup& setup, const ExperimentConfig& cfg) {
  check_setup(setup, cfg);
  if (cfg.fixed_true_pose && !setup.map->is_free(*cfg.fixed_true_pose)) {
    throw ValidationError("fixed true pose is not in free space");
  }
  std::vector<LocTrial> trials(static_cast<std::size_t>(cfg.trials));
  run_indexed(cfg.trials, cfg.jobs, [&](int t) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(t));
    const Pose2 truth = cfg.fixed_true_pose ? *cfg.fixed_true_pose : sample_free_pose(*setup.map, rng);
    const std::vector<Pose2> path(static_cast<std::size_t>(cfg.iterations), truth);
    trials[static_cast<std::size_t>(t)] = run_localization_trial(setup, cfg, t, path, rng);
  });
  return collect_report(ExperimentKind::kStatic, cfg, trials);
}

LocalizationReport run_traversal(const BenchSetup& setup, const ExperimentConfig& cfg) {
  check_setup(setup, cfg);
  // The path must stay free for every lateral offset a trial can draw.
  for (double lateral : {-cfg.traversal_lateral_jitter, 0.0, cfg.traversal_lateral_jitter}) {
    for (const Pose2& p : traversal_path(cfg, lateral)) {
      if (!setup.map->is_free(p)) {
        throw ValidationError(fmt::format("traversal path point ({:.3f}, {:.3f}) is not in free space", p.x, p.y));
      }
    }
  }
  std::vector<LocTrial> trials(static_cast<std::size_t>(cfg.trials));
  run_indexed(cfg.trials, cfg.jobs, [&](int t) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(t));
    std::uniform_real_distribution<double> jitter(-cfg.traversal_lateral_jitter, cfg.traversal_lateral_jitter);
    const double lateral = cfg.traversal_lateral_jitter > 0.0 ? jitter(rng) : 0.0;
    const std::vector<Pose2> path = traversal_path(cfg, lateral);
    for (const Pose2& p : path) {
      if (!setup.map->is_free(p)) throw ValidationError("traversal path leaves free space");
    }
    trials[static_cast<std::size_t>(t)] = run_localization_trial(setup, cfg, t, path, rng);
  });
  return collect_report(ExperimentKind::kTraversal, cfg, trials);
}

bool straight_path_clear(const WorldMap& map, const Pose2& a, const Pose2& b) {
  const Pose2 end = apply_action(map, a, {b.x - a.x, b.y - a.y}, 1.0);
  return distance(end, b) < 1e-9;
}

std::pair<Pose2, Pose2> sample_start_goal(const WorldMap& map, double min_distance, Rng& rng,
                                          int max_attempts, bool clear_path) {
  for (int i = 0; i < max_attempts; ++i) {
    const Pose2 start = sample_free_pose(map, rng);
    const Pose2 goal = sample_free_pose(map, rng);
    if (distance(start, goal) < min_distance) continue;
    if (clear_path && !straight_path_clear(map, start, goal)) continue;
    return {start, goal};
  }
  throw SamplingExhausted("no start/goal pair at least " + fmt_num(min_distance) + " m apart after " +
                          std::to_string(max_attempts) + " attempts");
}

NavigationReport run_navigation(const BenchSetup& setup, const ExperimentConfig& cfg) {
  check_setup(setup, cfg);
  FepParams params = setup.fep;
  params.success_radius = cfg.success_radius;
  const WorldContext ctx{setup.map, setup.sensor, setup.model};

  NavigationReport report;
  report.trials.resize(static_cast<std::size_t>(cfg.trials));
  run_indexed(cfg.trials, cfg.jobs, [&](int t) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(t));
    NavigationTrial& out = report.trials[static_cast<std::size_t>(t)];
    out.trial = t;
    std::tie(out.start, out.goal) = sample_start_goal(*setup.map, cfg.min_start_goal_distance, rng, 100000, cfg.require_clear_path);
    out.initial_distance = distance(out.start, out.goal);
    Rng nav_rng(rng());
    NavigationResult result;
    try {
      navigate_into(ctx, out.start, out.goal, params, nav_rng, result);
    } catch (const DivergenceError&) {
      out.diverged = true;
    }
    if (result.trace.empty()) {
      TraceEntry e;
      e.truth = out.start;
      e.belief = out.start;
      e.dist_goal = out.initial_distance;
      e.free_energy = kNaN;
      result.trace.push_back(e);
    }
    out.success = !out.diverged && result.success;
    out.iterations = out.diverged ? static_cast<int>(result.trace.size()) : result.iterations;
    out.trace = std::move(result.trace);
  });

  std::size_t len = 0;
  for (const NavigationTrial& t : report.trials) len = std::max(len, t.trace.size());
  std::vector<std::vector<double>> err_rows, dist_rows;
  for (const NavigationTrial& t : report.trials) {
    std::vector<double> er, dr;
    for (std::size_t k = 0; k < len; ++k) {
      const TraceEntry& e = t.trace[std::min(k, t.trace.size() - 1)];
      er.push_back(e.error);
      dr.push_back(e.dist_goal);
    }
    err_rows.push_back(std::move(er));
    dist_rows.push_back(std::move(dr));
  }
  report.belief_error = aggregate("fep", err_rows);
  report.mean_dist_goal = aggregate("dist", dist_rows).mean;

  int successes = 0;
  double iter_sum = 0.0, band_sum = 0.0;
  for (const NavigationTrial& t : report.trials) {
    if (!t.success) continue;
    ++successes;
    iter_sum += t.iterations;
    if (t.initial_distance >= 11.0 && t.initial_distance <= 13.5) {
      ++report.band_count;
      band_sum += t.iterations;
    }
  }
  report.success_rate = static_cast<double>(successes) / cfg.trials;
  report.mean_iterations_success = successes > 0 ? iter_sum / successes : kNaN;
  report.mean_iterations_band = report.band_count > 0 ? band_sum / report.band_count : kNaN;
  return report;
}

std::string summary_csv(const LocalizationReport& report) {
  std::string out = "iter,method,mean_err,std_err,n_trials\n";
  for (const MetricSeries& s : report.series) {
    for (std::size_t k = 0; k < s.mean.size(); ++k) {
      out += fmt::format("{},{},{},{},{}\n", k + 1, s.method, fmt_num(s.mean[k]), fmt_num(s.stddev[k]),
                         s.n_trials);
    }
  }
  return out;
}

std::string navigation_summary_csv(const NavigationReport& report) {
  std::string out = "iter,method,mean_err,std_err,n_trials,mean_dist_goal\n";
  const MetricSeries& s = report.belief_error;
  for (std::size_t k = 0; k < s.mean.size(); ++k) {
    out += fmt::format("{},{},{},{},{},{}\n", k, s.method, fmt_num(s.mean[k]), fmt_num(s.stddev[k]), s.n_trials,
                       fmt_num(report.mean_dist_goal[k]));
  }
  return out;
}

namespace {

void append_trace(std::string& out, int trial, const std::vector<TraceEntry>& trace, int iter_base) {
  for (const TraceEntry& e : trace) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", trial, e.iter + iter_base, fmt_num(e.truth.x),
                       fmt_num(e.truth.y), fmt_num(e.belief.x), fmt_num(e.belief.y), fmt_num(e.action.vx),
                       fmt_num(e.action.vy), fmt_num(e.error), fmt_num(e.dist_goal), fmt_num(e.free_energy));
  }
}

constexpr const char* kTraceHeader = "trial,iter,true_x,true_y,belief_x,belief_y,ax,ay,err,dist_goal,F\n";

}  // namespace

std::string trials_csv(const std::vector<TrialRecord>& trials, const std::string& method) {
  std::string out = kTraceHeader;
  for (const TrialRecord& t : trials) {
    if (t.method == method) append_trace(out, t.trial, t.trace, 1);
  }
  return out;
}

std::string navigation_trials_csv(const NavigationReport& report) {
  std::string out = kTraceHeader;
  for (const NavigationTrial& t : report.trials) append_trace(out, t.trial, t.trace, 0);
  return out;
}

std::string navigation_outcomes_csv(const NavigationReport& report) {
  std::string out = "trial,start_x,start_y,goal_x,goal_y,distance,success,diverged,iterations\n";
  for (const NavigationTrial& t : report.trials) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", t.trial, fmt_num(t.start.x), fmt_num(t.start.y),
                       fmt_num(t.goal.x), fmt_num(t.goal.y), fmt_num(t.initial_distance), t.success ? 1 : 0,
                       t.diverged ? 1 : 0, t.iterations);
  }
  return out;
}

std::string render_plot_svg(const std::vector<MetricSeries>& series, const std::string& title,
                            const std::vector<double>* dist_goal) {
  if (series.empty()) throw ValidationError("plot: no series selected");
  constexpr double kW = 800, kH = 480, kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;

  std::size_t len = 0;
  double ymax = 0.0;
  for (const MetricSeries& s : series) {
    len = std::max(len, s.mean.size());
    for (std::size_t k = 0; k < s.mean.size(); ++k) ymax = std::max(ymax, s.mean[k] + s.stddev[k]);
  }
  if (dist_goal != nullptr) {
    len = std::max(len, dist_goal->size());
    for (double d : *dist_goal) ymax = std::max(ymax, d);
  }
  if (len == 0) throw ValidationError("plot: series are empty");
  if (!(ymax > 0.0) || !std::isfinite(ymax)) ymax = 1.0;
  ymax *= 1.05;
  const double xspan = len > 1 ? static_cast<double>(len - 1) : 1.0;
  auto px = [&](std::size_t k) { return kLeft + pw * static_cast<double>(k) / xspan; };
  auto py = [&](double v) { return kTop + ph * (1.0 - std::clamp(v, 0.0, ymax) / ymax); };

  static const char* const kColors[] = {"#1f77b4", "#d62728", "#9467bd", "#8c564b"};
  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kW, kH);
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kW, kH);
  out += fmt::format("<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     kLeft + pw / 2, xml_escape(title));

  // axes and ticks
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, pw, ph);
  for (int i = 0; i <= 5; ++i) {
    const double v = ymax * i / 5.0;
    out += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>"
        "<text x=\"{3:.1f}\" y=\"{4:.1f}\" text-anchor=\"end\">{5:.2f}</text>\n",
        kLeft, py(v), kLeft + pw, kLeft - 6, py(v) + 4, v);
  }
  const std::size_t xstep = std::max<std::size_t>(1, (len + 9) / 10);
  for (std::size_t k = 0; k < len; k += xstep) {
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", px(k), kTop + ph + 18,
                       k);
  }
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">iterations</text>\n", kLeft + pw / 2,
                     kH - 16);
  out += fmt::format(
      "<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">meters</text>\n",
      kTop + ph / 2);

  auto polyline = [&](const std::vector<double>& v, const char* color, const char* dash) {
    std::string pts;
    for (std::size_t k = 0; k < v.size(); ++k) pts += fmt::format("{:.2f},{:.2f} ", px(k), py(v[k]));
    return fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n", pts, color,
                       dash);
  };

  for (std::size_t i = 0; i < series.size(); ++i) {
    const MetricSeries& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    std::string band;
    for (std::size_t k = 0; k < s.mean.size(); ++k) {
      band += fmt::format("{:.2f},{:.2f} ", px(k), py(s.mean[k] + s.stddev[k]));
    }
    for (std::size_t k = s.mean.size(); k-- > 0;) {
      band += fmt::format("{:.2f},{:.2f} ", px(k), py(s.mean[k] - s.stddev[k]));
    }
    out += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n", band, color);
    out += polyline(s.mean, color, "");
    const double ly = kTop + 16 + 20.0 * static_cast<double>(i);
    out += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4:.1f}\" y=\"{5:.1f}\">{6} error</text>\n",
        kLeft + pw + 12, ly, kLeft + pw + 36, color, kLeft + pw + 42, ly + 4, xml_escape(s.method));
  }
  if (dist_goal != nullptr) {
    out += polyline(*dist_goal, "#2ca02c", " stroke-dasharray=\"6 3\"");
    const double ly = kTop + 16 + 20.0 * static_cast<double>(series.size());
    out += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"#2ca02c\" stroke-width=\"2\" "
        "stroke-dasharray=\"6 3\"/><text x=\"{3:.1f}\" y=\"{4:.1f}\">distance to goal</text>\n",
        kLeft + pw + 12, ly, kLeft + pw + 36, kLeft + pw + 42, ly + 4);
  }
  out += "</svg>\n";
  return out;
}

std::vector<std::filesystem::path> write_localization_outputs(const LocalizationReport& report,
                                                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string prefix = to_string(report.kind);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    write_text(written.back(), text);
  };
  put(prefix + "_summary.csv", summary_csv(report));
  for (const MetricSeries& s : report.series) {
    put(prefix + "_trials_" + s.method + ".csv", trials_csv(report.trials, s.method));
  }
  put(prefix + "_plot.svg", render_plot_svg(report.series, prefix + " localization: absolute position error"));
  return written;
}

std::vector<std::filesystem::path> write_navigation_outputs(const NavigationReport& report,
                                                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    write_text(written.back(), text);
  };
  put("navigation_summary.csv", navigation_summary_csv(report));
  put("navigation_trials.csv", navigation_trials_csv(report));
  put("navigation_outcomes.csv", navigation_outcomes_csv(report));
  put("navigation_plot.svg",
      render_plot_svg({report.belief_error}, "navigation: belief error and distance to goal", &report.mean_dist_goal));
  return written;
}

}  // namespace fepl
