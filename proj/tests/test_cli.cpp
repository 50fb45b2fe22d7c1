// End-to-end checks of the command-line tool.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fepl/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "fepl_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Run run_cli(const std::string& args, const std::string& env = "") {
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = "cd '" + work_dir().string() + "' && " + env + " '" + FEPL_CLI_PATH + "' " + args +
                          " > stdout.txt 2> '" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(err)};
}

const std::string kMap = std::string(" --map '") + FEPL_TEST_MAP + "'";
const std::string kSmall = " --beams 32";

void ensure_model() {
  if (fs::exists(work_dir() / "small.fepl")) return;
  REQUIRE(run_cli("collect --n 120 --seed 7 --out small.ds" + kMap + kSmall).status == 0);
  REQUIRE(run_cli("train --dataset small.ds --epochs 2 --batch 20 --channels 4 --hidden 16 --out small.fepl" + kSmall)
              .status == 0);
}

}  // namespace

TEST_CASE("show-map writes a rendering and a config snapshot") {
  const Run r = run_cli("show-map --out map_out" + kMap);
  CHECK(r.status == 0);
  CHECK(fs::exists(work_dir() / "map_out" / "map.svg"));
  CHECK(fs::exists(work_dir() / "map_out" / "config.txt"));
}

TEST_CASE("diagnostics name the failure") {
  const Run unknown = run_cli("bench --bogus-flag 3");
  CHECK(unknown.status == 2);
  CHECK(unknown.err.find("unknown flag") != std::string::npos);
  CHECK(unknown.err.find("--bogus-flag") != std::string::npos);

  const Run bad = run_cli("bench --trials many" + kMap);
  CHECK(bad.status == 3);
  CHECK(bad.err.find("invalid config value") != std::string::npos);
  CHECK(bad.err.find("bench.trials") != std::string::npos);

  const Run missing = run_cli("bench --model nowhere.fepl" + kMap);
  CHECK(missing.status == 4);
  CHECK(missing.err.find("missing file") != std::string::npos);
  CHECK(missing.err.find("nowhere.fepl") != std::string::npos);

  const Run nomap = run_cli("show-map --map nowhere.map");
  CHECK(nomap.status == 4);

  const Run no_sub = run_cli("");
  CHECK(no_sub.status != 0);

  for (const Run* r : {&unknown, &bad, &missing}) CHECK(std::count(r->err.begin(), r->err.end(), '\n') == 1);
}

TEST_CASE("collect writes the requested number of records") {
  REQUIRE(run_cli("collect --n 40 --seed 7 --out c40.ds" + kMap + kSmall).status == 0);
  CHECK(fepl::load_dataset(work_dir() / "c40.ds").records.size() == 40);
  CHECK(fs::exists(work_dir() / "c40.ds.config"));
  REQUIRE(run_cli("collect --n 40 --seed 7 --out c40b.ds" + kMap + kSmall).status == 0);
  CHECK(slurp(work_dir() / "c40.ds") == slurp(work_dir() / "c40b.ds"));
}

TEST_CASE("training with learning rate 0 reproduces the initial model") {
  REQUIRE(run_cli("collect --n 60 --seed 3 --out lr0.ds" + kMap + kSmall).status == 0);
  const Run r = run_cli(
      "train --dataset lr0.ds --lr 0 --epochs 2 --batch 10 --channels 4 --hidden 16 --save-init init.fepl "
      "--out lr0.fepl" + kSmall);
  REQUIRE(r.status == 0);
  CHECK(slurp(work_dir() / "init.fepl") == slurp(work_dir() / "lr0.fepl"));
}

TEST_CASE("flag over config file over default, end to end") {
  {
    std::ofstream f(work_dir() / "run.cfg");
    f << "fep.alpha = 0.02\nfep.gamma = 0.5\n";
  }
  REQUIRE(run_cli("show-map --config run.cfg --set fep.alpha=0.03 --out prec" + kMap).status == 0);
  const std::string snap = slurp(work_dir() / "prec" / "config.txt");
  CHECK(snap.find("fep.alpha = 0.03  # flag") != std::string::npos);
  CHECK(snap.find("fep.gamma = 0.5  # file") != std::string::npos);
  CHECK(snap.find("fep.beta = 1  # default") != std::string::npos);

  REQUIRE(run_cli("show-map --out envseed" + kMap, "FEP_LIDAR_SEED=42").status == 0);
  CHECK(slurp(work_dir() / "envseed" / "config.txt").find("seed = 42  # env") != std::string::npos);
  REQUIRE(run_cli("show-map --seed 8 --out envseed2" + kMap, "FEP_LIDAR_SEED=42").status == 0);
  CHECK(slurp(work_dir() / "envseed2" / "config.txt").find("seed = 8  # flag") != std::string::npos);
}

TEST_CASE("benchmark output is identical across job counts") {
  ensure_model();
  const std::string common = "bench --model small.fepl --trials 4 --iterations 6 --particles 50 --seed 5" + kMap + kSmall;
  REQUIRE(run_cli(common + " --jobs 1 --out b1").status == 0);
  REQUIRE(run_cli(common + " --jobs 3 --out b3").status == 0);
  for (const char* f : {"static_summary.csv", "static_trials_fep.csv", "static_trials_pf.csv", "static_plot.svg"}) {
    CHECK(fs::exists(work_dir() / "b1" / f));
    CHECK(slurp(work_dir() / "b1" / f) == slurp(work_dir() / "b3" / f));
  }
  CHECK(fs::exists(work_dir() / "b1" / "config.txt"));
}

TEST_CASE("navigation benchmark writes CSVs and a plot") {
  ensure_model();
  const Run r = run_cli(
      "bench --experiment navigation --model small.fepl --trials 3 --max-iterations 8 --seed 1 --out nav" + kMap +
      kSmall);
  REQUIRE(r.status == 0);
  for (const char* f : {"navigation_summary.csv", "navigation_trials.csv", "navigation_outcomes.csv",
                        "navigation_plot.svg", "config.txt"}) {
    CHECK(fs::exists(work_dir() / "nav" / f));
  }
}

TEST_CASE("localize and eval-model run") {
  ensure_model();
  CHECK(run_cli("localize --model small.fepl --iterations 5 --true-x 6 --true-y 4 --out loc" + kMap + kSmall).status == 0);
  CHECK(fs::exists(work_dir() / "loc" / "localize_trace.csv"));
  CHECK(run_cli("eval-model --model small.fepl --dataset small.ds --out ev").status == 0);
  CHECK(fs::exists(work_dir() / "ev" / "eval.csv"));
}
