#include <doctest.h>

#include <cstdlib>

#include "fepl/config.hpp"
#include "fepl/error.hpp"

using namespace fepl;

namespace {

// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
  ~EnvGuard() { ::unsetenv(name_); }
  EnvGuard(const EnvGuard&) = delete;
  EnvGuard& operator=(const EnvGuard&) = delete;

 private:
  const char* name_;
};

}  // namespace

TEST_CASE("defaults") {
  const ConfigStore store;
  const RunConfig& c = store.config();
  CHECK(c.fep.alpha == 0.02);
  CHECK(c.fep.gamma == 0.2);
  CHECK(c.fep.a_max == 1.0);
  CHECK(c.fep.max_iterations == 500);
  CHECK(c.success_radius == 0.8);
  CHECK(c.trials == 100);
  CHECK(c.iterations == 50);
  CHECK(c.train.batch_size == 500);
  CHECK(c.collect_n == 13000);
  CHECK(c.sensor().beam_count == 622);
  CHECK(c.sensor().aperture == doctest::Approx(1.5 * 3.14159265358979));
  CHECK(store.source("fep.alpha") == ConfigSource::kDefault);
}

TEST_CASE("file parsing") {
  ConfigStore store;
  store.apply_text("# comment\n\nfep.alpha = 0.01\n  pf.n=200  # trailing\nbench.experiment = navigation\n", "t.cfg");
  CHECK(store.config().fep.alpha == 0.01);
  CHECK(store.config().pf.n_particles == 200);
  CHECK(store.config().experiment_config().kind == ExperimentKind::kNavigation);
  CHECK(store.source("pf.n") == ConfigSource::kFile);

  CHECK_THROWS_AS(store.apply_text("fep.alpha 0.1\n", "t.cfg"), ParseError);
  CHECK_THROWS_WITH_AS(store.apply_text("fep.alfa = 0.1\n", "t.cfg"), doctest::Contains("fep.alfa"), ConfigError);
  CHECK_THROWS_WITH_AS(store.apply_text("pf.n = many\n", "t.cfg"), doctest::Contains("t.cfg:1"), ConfigError);
  CHECK_THROWS_AS(store.apply_text("fep.accumulate_action = maybe\n", "t.cfg"), ConfigError);
  CHECK_THROWS_AS(store.apply_file("/nonexistent/run.cfg"), IoError);
}

TEST_CASE("three-way precedence: flag over file over default") {
  ConfigStore store;
  store.apply_text("fep.alpha = 0.02\nfep.gamma = 0.5\n", "t.cfg");
  store.set("fep.alpha", "0.03", ConfigSource::kFlag);
  const RunConfig& c = store.config();
  CHECK(c.fep.alpha == 0.03);  // flag
  CHECK(c.fep.gamma == 0.5);   // file
  CHECK(c.fep.beta == 1.0);    // default
  CHECK(store.source("fep.alpha") == ConfigSource::kFlag);
  CHECK(store.source("fep.gamma") == ConfigSource::kFile);
  CHECK(store.source("fep.beta") == ConfigSource::kDefault);
}

TEST_CASE("seed environment variable has the lowest explicit precedence") {
  const EnvGuard env(kSeedEnvVar, "77");
  ConfigStore a;
  a.apply_env();
  CHECK(a.config().seed == 77);
  CHECK(a.source("seed") == ConfigSource::kEnv);

  ConfigStore b;
  b.apply_env();
  b.apply_text("seed = 5\n", "t.cfg");
  CHECK(b.config().seed == 5);

  ConfigStore c;
  c.apply_env();
  c.apply_text("seed = 5\n", "t.cfg");
  c.set("seed", "9", ConfigSource::kFlag);
  CHECK(c.config().seed == 9);
}

TEST_CASE("malformed seed in the environment is reported") {
  const EnvGuard env(kSeedEnvVar, "abc");
  ConfigStore s;
  CHECK_THROWS_WITH_AS(s.apply_env(), doctest::Contains(kSeedEnvVar), ConfigError);
}

TEST_CASE("snapshot round trip") {
  ConfigStore store;
  store.set("fep.alpha", "0.0123456789", ConfigSource::kFlag);
  store.set("map", "maps/other.map", ConfigSource::kFile);
  store.set("localize.true_x", "3.5", ConfigSource::kFlag);
  const std::string snap = store.snapshot();
  CHECK(snap.find("fep.alpha = 0.0123456789  # flag") != std::string::npos);
  CHECK(snap.find("localize.true_y = nan  # default") != std::string::npos);

  ConfigStore back;
  back.apply_text(snap, "snapshot");
  CHECK(back.snapshot().size() > 0);
  for (const std::string& k : ConfigStore::keys()) CHECK(back.get(k) == store.get(k));
}
