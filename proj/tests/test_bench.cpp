#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fepl/bench.hpp"
#include "fepl/error.hpp"
#include "test_util.hpp"

using namespace fepl;

namespace {

struct BenchFixture {
  WorldMap map = load_map(FEPL_TEST_MAP);
  GenModel model = test::random_model(test::small_arch(), 17);
  BenchSetup setup;
  ExperimentConfig cfg;

  BenchFixture() {
    setup.map = &map;
    setup.sensor.beam_count = 32;
    setup.model = &model;
    setup.pf.n_particles = 60;
    setup.pf.beam_stride = 2;
    setup.fep.max_iterations = 15;
    cfg.trials = 4;
    cfg.iterations = 12;
    cfg.seed = 3;
  }
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("aggregate uses the unbiased estimator") {
  const MetricSeries s = aggregate("x", {{1.0, 2.0}, {3.0, 2.0}, {5.0, 2.0}});
  CHECK(s.n_trials == 3);
  CHECK(s.mean == std::vector<double>{3.0, 2.0});
  CHECK(s.stddev[0] == doctest::Approx(2.0));
  CHECK(s.stddev[1] == 0.0);
  const MetricSeries one = aggregate("x", {{4.0, 1.0}});
  CHECK(one.stddev == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(aggregate("x", {{1.0}, {1.0, 2.0}}), DimensionMismatch);
}

TEST_CASE("experiment config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.success_radius = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(parse_experiment_kind("traversal") == ExperimentKind::kTraversal);
  CHECK(parse_method_select("pf") == MethodSelect::kPf);
  CHECK_THROWS_AS(parse_method_select("kalman"), ValidationError);
}

TEST_CASE_FIXTURE(BenchFixture, "static localization series and CSV shape") {
  const LocalizationReport r = run_static_localization(setup, cfg);
  REQUIRE(r.series.size() == 2);
  for (const MetricSeries& s : r.series) {
    CHECK(s.mean.size() == 12);
    CHECK(s.n_trials == 4);
    for (std::size_t k = 0; k < 12; ++k) {
      CHECK(s.mean[k] >= 0.0);
      CHECK(s.stddev[k] >= 0.0);
    }
  }
  CHECK(r.trials.size() == 8);
  CHECK(count_lines(summary_csv(r)) == 1 + 24);
  CHECK(summary_csv(r).rfind("iter,method,mean_err,std_err,n_trials\n", 0) == 0);
  const std::string t = trials_csv(r.trials, "pf");
  CHECK(t.rfind("trial,iter,true_x,true_y,belief_x,belief_y,ax,ay,err,dist_goal,F\n", 0) == 0);
  CHECK(count_lines(t) == 1 + 4 * 12);

  cfg.methods = MethodSelect::kFep;
  cfg.iterations = 50;
  cfg.trials = 1;
  CHECK(count_lines(summary_csv(run_static_localization(setup, cfg))) == 51);
}

TEST_CASE_FIXTURE(BenchFixture, "static localization feeds FEP the same scans as localize") {
  cfg.methods = MethodSelect::kFep;
  cfg.trials = 2;
  const LocalizationReport r = run_static_localization(setup, cfg);
  for (int t = 0; t < 2; ++t) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(t));
    const Pose2 truth = sample_free_pose(map, rng);
    Rng scan_rng(rng());
    const std::vector<Pose2> path(12, truth);
    const WorldContext ctx{&map, setup.sensor, &model};
    const auto trace = localize(ctx, path, map.bounds().center(), setup.fep, scan_rng);
    const TrialRecord& rec = r.trials[static_cast<std::size_t>(t)];
    REQUIRE(rec.trace.size() == 12);
    for (std::size_t k = 0; k < 12; ++k) CHECK(rec.trace[k].belief == trace[k].belief);
  }
}

TEST_CASE_FIXTURE(BenchFixture, "results do not depend on the number of jobs") {
  const LocalizationReport seq = run_static_localization(setup, cfg);
  cfg.jobs = 3;
  const LocalizationReport par = run_static_localization(setup, cfg);
  CHECK(summary_csv(seq) == summary_csv(par));
  CHECK(trials_csv(seq.trials, "fep") == trials_csv(par.trials, "fep"));
  CHECK(trials_csv(seq.trials, "pf") == trials_csv(par.trials, "pf"));

  cfg.kind = ExperimentKind::kNavigation;
  cfg.jobs = 1;
  const NavigationReport n1 = run_navigation(setup, cfg);
  cfg.jobs = 4;
  const NavigationReport n4 = run_navigation(setup, cfg);
  CHECK(navigation_summary_csv(n1) == navigation_summary_csv(n4));
  CHECK(navigation_trials_csv(n1) == navigation_trials_csv(n4));
}

TEST_CASE_FIXTURE(BenchFixture, "traversal with zero increment is static localization") {
  cfg.traversal_increment = 0.0;
  cfg.traversal_lateral_jitter = 0.0;
  const LocalizationReport trav = run_traversal(setup, cfg);
  cfg.fixed_true_pose = cfg.traversal_start;
  const LocalizationReport stat = run_static_localization(setup, cfg);
  CHECK(summary_csv(trav) == summary_csv(stat));
}

TEST_CASE_FIXTURE(BenchFixture, "traversal path moves and is validated") {
  const LocalizationReport r = run_traversal(setup, cfg);
  const TrialRecord& t = r.trials.front();
  CHECK(t.trace[1].truth.x - t.trace[0].truth.x == doctest::Approx(0.4));
  cfg.traversal_start = {5.0, 7.0};  // on the north partition
  CHECK_THROWS_AS(run_traversal(setup, cfg), ValidationError);
}

TEST_CASE_FIXTURE(BenchFixture, "diverged trials keep their last valid error") {
  GenModel broken = model;
  for (double& p : broken.mutable_parameters()) p = std::numeric_limits<double>::quiet_NaN();
  setup.model = &broken;
  cfg.methods = MethodSelect::kFep;
  const LocalizationReport r = run_static_localization(setup, cfg);
  for (const TrialRecord& t : r.trials) {
    CHECK(t.diverged);
    for (const TraceEntry& e : t.trace) CHECK(e.error == doctest::Approx(distance(map.bounds().center(), e.truth)));
  }
  CHECK(r.series[0].n_trials == 4);
}

TEST_CASE_FIXTURE(BenchFixture, "navigation report") {
  cfg.kind = ExperimentKind::kNavigation;
  const NavigationReport r = run_navigation(setup, cfg);
  REQUIRE(r.trials.size() == 4);
  std::size_t longest = 0;
  for (const NavigationTrial& t : r.trials) {
    CHECK(t.initial_distance >= 12.0);
    CHECK(t.success == (t.trace.back().dist_goal < cfg.success_radius));
    longest = std::max(longest, t.trace.size());
  }
  CHECK(r.mean_dist_goal.size() == longest);
  CHECK(r.belief_error.mean.size() == longest);
  CHECK(count_lines(navigation_summary_csv(r)) == 1 + longest);
  CHECK(count_lines(navigation_outcomes_csv(r)) == 5);
  CHECK(navigation_summary_csv(r).rfind("iter,method,mean_err,std_err,n_trials,mean_dist_goal\n", 0) == 0);
}

TEST_CASE("start and goal sampling respects the minimum distance") {
  const WorldMap map = load_map(FEPL_TEST_MAP);
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto [s, g] = sample_start_goal(map, 12.0, rng);
    CHECK(distance(s, g) >= 12.0);
    CHECK(map.is_free(s));
    CHECK(map.is_free(g));
  }
  CHECK_THROWS_AS(sample_start_goal(map, 30.0, rng, 200), SamplingExhausted);

  CHECK(straight_path_clear(map, {2, 4}, {22, 4}));
  CHECK_FALSE(straight_path_clear(map, {2, 7}, {8, 7}));  // north partition at x = 5
  for (int i = 0; i < 200; ++i) {
    const auto [s, g] = sample_start_goal(map, 12.0, rng, 100000, true);
    CHECK(straight_path_clear(map, s, g));
  }
}

TEST_CASE("plots") {
  CHECK_THROWS_AS(render_plot_svg({}, "empty"), ValidationError);
  const MetricSeries s = aggregate("fep", {{3.0, 2.0, 1.0}, {2.0, 1.5, 0.5}});
  const std::vector<double> dist{10.0, 6.0, 1.0};
  const std::string svg = render_plot_svg({s}, "a <title>", &dist);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polygon") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("a &lt;title&gt;") != std::string::npos);
  CHECK(svg.find("iterations") != std::string::npos);
  CHECK(svg.find("meters") != std::string::npos);
}
