// Benchmark harness: static localization, teleport traversal and goal
// navigation, with CSV and SVG output.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fepl/fep.hpp"
#include "fepl/pf.hpp"

namespace fepl {

enum class ExperimentKind { kStatic, kTraversal, kNavigation };
enum class MethodSelect { kFep, kPf, kBoth };

ExperimentKind parse_experiment_kind(const std::string& s);
MethodSelect parse_method_select(const std::string& s);
std::string to_string(ExperimentKind k);
std::string to_string(MethodSelect m);

struct ExperimentConfig {
  ExperimentKind kind{ExperimentKind::kStatic};
  int trials{100};
  int iterations{50};
  std::uint64_t seed{1};
  double min_start_goal_distance{12.0};
  /// Navigation: only accept start/goal pairs joined by a collision-free
  /// straight line.
  bool require_clear_path{true};
  double success_radius{0.8};
  MethodSelect methods{MethodSelect::kBoth};
  int jobs{1};

  /// Static: use this true pose in every trial instead of sampling one.
  std::optional<Pose2> fixed_true_pose;
  /// Static/traversal: initial FEP belief; the map center when unset.
  std::optional<Pose2> initial_belief;

  // Traversal path: start + min(k * increment, length) * (1, 0), shifted
  // per trial by a uniform lateral offset in [-jitter, jitter].
  Pose2 traversal_start{4.0, 4.0};
  double traversal_length{16.0};
  double traversal_increment{0.4};
  double traversal_lateral_jitter{1.0};

  void validate() const;
};

struct BenchSetup {
  const WorldMap* map{nullptr};
  SensorConfig sensor;
  const GenModel* model{nullptr};
  FepParams fep;
  PfConfig pf;
};

struct MetricSeries {
  std::string method;
  std::vector<double> mean;
  std::vector<double> stddev;  // unbiased; 0 for a single trial
  int n_trials{0};
};

/// Per-iteration mean and unbiased std across rows (one row per trial, all
/// of equal length).
MetricSeries aggregate(const std::string& method, const std::vector<std::vector<double>>& rows);

struct TrialRecord {
  int trial{0};
  std::string method;
  std::vector<TraceEntry> trace;
  bool diverged{false};
};

struct LocalizationReport {
  ExperimentKind kind{ExperimentKind::kStatic};
  std::vector<MetricSeries> series;  // "fep" and/or "pf"
  std::vector<TrialRecord> trials;   // ordered by (method, trial)

  const MetricSeries* find(const std::string& method) const;
};

struct NavigationTrial {
  int trial{0};
  Pose2 start;
  Pose2 goal;
  double initial_distance{0.0};
  bool success{false};
  bool diverged{false};
  int iterations{0};
  std::vector<TraceEntry> trace;
};

struct NavigationReport {
  std::vector<NavigationTrial> trials;
  MetricSeries belief_error;           // method "fep"
  std::vector<double> mean_dist_goal;  // trial-averaged distance-to-goal curve
  double success_rate{0.0};
  double mean_iterations_success{0.0};  // NaN when nothing succeeded
  /// Successful trials whose start-goal distance lies in [11, 13.5] m.
  double mean_iterations_band{0.0};
  int band_count{0};
};

LocalizationReport run_static_localization(const BenchSetup& setup, const ExperimentConfig& cfg);
LocalizationReport run_traversal(const BenchSetup& setup, const ExperimentConfig& cfg);
NavigationReport run_navigation(const BenchSetup& setup, const ExperimentConfig& cfg);

/// Random free start/goal at least `min_distance` apart, optionally with a
/// collision-free straight line between them.
std::pair<Pose2, Pose2> sample_start_goal(const WorldMap& map, double min_distance, Rng& rng,
                                          int max_attempts = 100000, bool clear_path = false);

/// True if moving straight from a to b is not stopped by any wall.
bool straight_path_clear(const WorldMap& map, const Pose2& a, const Pose2& b);

// CSV text. Headers:
//   summary:            iter,method,mean_err,std_err,n_trials
//   navigation summary: iter,method,mean_err,std_err,n_trials,mean_dist_goal
//   trials:             trial,iter,true_x,true_y,belief_x,belief_y,ax,ay,err,dist_goal,F
std::string summary_csv(const LocalizationReport& report);
std::string navigation_summary_csv(const NavigationReport& report);
std::string trials_csv(const std::vector<TrialRecord>& trials, const std::string& method);
std::string navigation_trials_csv(const NavigationReport& report);
std::string navigation_outcomes_csv(const NavigationReport& report);

/// SVG plot of mean error lines with +-1 std bands, one per series, plus an
/// optional distance-to-goal line. Throws ValidationError when `series` is
/// empty.
std::string render_plot_svg(const std::vector<MetricSeries>& series, const std::string& title,
                            const std::vector<double>* dist_goal = nullptr);

/// Writes every CSV and the plot for a report into `dir`; returns paths.
std::vector<std::filesystem::path> write_localization_outputs(const LocalizationReport& report,
                                                              const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_navigation_outputs(const NavigationReport& report,
                                                            const std::filesystem::path& dir);

}  // namespace fepl
