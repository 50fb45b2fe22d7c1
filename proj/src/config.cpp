#include "fepl/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "fepl/error.hpp"

namespace fepl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError(fmt::format("invalid value '{}' for {}: expected {}", value, key, expected));
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    bad_value(key, value, std::is_signed_v<T> ? "an integer" : "a non-negative integer");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  if (value == "nan" || value == "none") return kNaN;
  // strtod instead of from_chars: accepts the same forms as the flag parser.
  const std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || std::isinf(v)) bad_value(key, value, "a number");
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);  // shortest round-trip form
}

struct KeySpec {
  std::string key;
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
KeySpec real(std::string key, Access access) {
  return {std::move(key),
          [access](RunConfig& c, std::string_view k, std::string_view v) { access(c) = parse_double(k, v); },
          [access](const RunConfig& c) { return format_double(access(c)); }};
}

template <typename Access>
KeySpec integer(std::string key, Access access) {
  return {std::move(key),
          [access](RunConfig& c, std::string_view k, std::string_view v) {
            using T = std::remove_reference_t<decltype(access(c))>;
            access(c) = parse_integer<T>(k, v);
          },
          [access](const RunConfig& c) { return std::to_string(access(c)); }};
}

template <typename Access>
KeySpec text(std::string key, Access access) {
  return {std::move(key), [access](RunConfig& c, std::string_view, std::string_view v) { access(c) = std::string(v); },
          [access](const RunConfig& c) { return access(c); }};
}

template <typename Access>
KeySpec boolean(std::string key, Access access) {
  return {std::move(key),
          [access](RunConfig& c, std::string_view k, std::string_view v) { access(c) = parse_bool(k, v); },
          [access](const RunConfig& c) { return std::string(access(c) ? "true" : "false"); }};
}

#define FEPL_FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> specs = [] {
    std::vector<KeySpec> v;
    v.push_back(text("map", FEPL_FIELD(map_path)));
    v.push_back(text("model", FEPL_FIELD(model_path)));
    v.push_back(text("dataset", FEPL_FIELD(dataset_path)));
    v.push_back(text("out", FEPL_FIELD(out)));
    v.push_back(integer("seed", FEPL_FIELD(seed)));
    v.push_back(integer("jobs", FEPL_FIELD(jobs)));

    v.push_back(integer("sensor.beams", FEPL_FIELD(beam_count)));
    v.push_back(real("sensor.aperture_deg", FEPL_FIELD(aperture_deg)));
    v.push_back(real("sensor.max_range", FEPL_FIELD(max_range)));
    v.push_back(real("sensor.noise", FEPL_FIELD(noise_sigma)));

    v.push_back(integer("model.channels", FEPL_FIELD(channels)));
    v.push_back(integer("model.hidden", FEPL_FIELD(hidden)));

    v.push_back(integer("collect.n", FEPL_FIELD(collect_n)));

    v.push_back(integer("train.epochs", FEPL_FIELD(train.epochs)));
    v.push_back(integer("train.batch", FEPL_FIELD(train.batch_size)));
    v.push_back(real("train.lr", FEPL_FIELD(train.learning_rate)));
    v.push_back(real("train.beta1", FEPL_FIELD(train.adam_beta1)));
    v.push_back(real("train.beta2", FEPL_FIELD(train.adam_beta2)));
    v.push_back(real("train.eps", FEPL_FIELD(train.adam_eps)));
    v.push_back(real("train.validation_fraction", FEPL_FIELD(train.validation_fraction)));

    v.push_back(real("fep.alpha", FEPL_FIELD(fep.alpha)));
    v.push_back(real("fep.beta", FEPL_FIELD(fep.beta)));
    v.push_back(real("fep.sigma_o", FEPL_FIELD(fep.sigma_o)));
    v.push_back(real("fep.sigma_x", FEPL_FIELD(fep.sigma_x)));
    v.push_back(real("fep.gamma", FEPL_FIELD(fep.gamma)));
    v.push_back(real("fep.dt", FEPL_FIELD(fep.dt)));
    v.push_back(real("fep.a_max", FEPL_FIELD(fep.a_max)));
    v.push_back(integer("fep.max_iterations", FEPL_FIELD(fep.max_iterations)));
    v.push_back(boolean("fep.accumulate_action", FEPL_FIELD(fep.accumulate_action)));

    v.push_back(integer("pf.n", FEPL_FIELD(pf.n_particles)));
    v.push_back(real("pf.diffusion", FEPL_FIELD(pf.diffusion_sigma)));
    v.push_back(real("pf.likelihood_sigma", FEPL_FIELD(pf.likelihood_sigma)));
    v.push_back(integer("pf.stride", FEPL_FIELD(pf.beam_stride)));
    v.push_back(real("pf.ess_threshold", FEPL_FIELD(pf.ess_threshold)));

    v.push_back(text("bench.experiment", FEPL_FIELD(experiment)));
    v.push_back(text("bench.method", FEPL_FIELD(methods)));
    v.push_back(integer("bench.trials", FEPL_FIELD(trials)));
    v.push_back(integer("bench.iterations", FEPL_FIELD(iterations)));
    v.push_back(real("bench.min_start_goal_distance", FEPL_FIELD(min_start_goal_distance)));
    v.push_back(boolean("bench.clear_path", FEPL_FIELD(clear_path)));
    v.push_back(real("bench.success_radius", FEPL_FIELD(success_radius)));
    v.push_back(real("bench.traversal_start_x", FEPL_FIELD(traversal_start_x)));
    v.push_back(real("bench.traversal_start_y", FEPL_FIELD(traversal_start_y)));
    v.push_back(real("bench.traversal_length", FEPL_FIELD(traversal_length)));
    v.push_back(real("bench.traversal_increment", FEPL_FIELD(traversal_increment)));
    v.push_back(real("bench.traversal_jitter", FEPL_FIELD(traversal_jitter)));

    v.push_back(real("localize.true_x", FEPL_FIELD(true_x)));
    v.push_back(real("localize.true_y", FEPL_FIELD(true_y)));
    v.push_back(real("localize.belief_x", FEPL_FIELD(belief_x)));
    v.push_back(real("localize.belief_y", FEPL_FIELD(belief_y)));
    v.push_back(real("navigate.start_x", FEPL_FIELD(start_x)));
    v.push_back(real("navigate.start_y", FEPL_FIELD(start_y)));
    v.push_back(real("navigate.goal_x", FEPL_FIELD(goal_x)));
    v.push_back(real("navigate.goal_y", FEPL_FIELD(goal_y)));
    return v;
  }();
  return specs;
}

#undef FEPL_FIELD

const KeySpec* find_spec(std::string_view key) {
  for (const KeySpec& s : registry()) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

const KeySpec& require_spec(std::string_view key) {
  const KeySpec* s = find_spec(key);
  if (s == nullptr) throw ConfigError(fmt::format("unknown config key '{}'", key));
  return *s;
}

}  // namespace

std::string to_string(ConfigSource s) {
  switch (s) {
    case ConfigSource::kDefault: return "default";
    case ConfigSource::kEnv: return "env";
    case ConfigSource::kFile: return "file";
    case ConfigSource::kFlag: return "flag";
  }
  return "?";
}

RunConfig::RunConfig()
    : true_x(kNaN), true_y(kNaN), belief_x(kNaN), belief_y(kNaN), start_x(kNaN), start_y(kNaN), goal_x(kNaN),
      goal_y(kNaN) {}

SensorConfig RunConfig::sensor() const {
  SensorConfig s;
  s.beam_count = beam_count;
  s.aperture = aperture_deg * std::numbers::pi / 180.0;
  s.max_range = max_range;
  s.noise_sigma = noise_sigma;
  return s;
}

Architecture RunConfig::architecture() const { return default_architecture(beam_count, channels, hidden); }

ExperimentConfig RunConfig::experiment_config() const {
  ExperimentConfig e;
  e.kind = parse_experiment_kind(experiment);
  e.methods = parse_method_select(methods);
  e.trials = trials;
  e.iterations = iterations;
  e.seed = seed;
  e.jobs = jobs;
  e.min_start_goal_distance = min_start_goal_distance;
  e.success_radius = success_radius;
  e.require_clear_path = clear_path;
  e.traversal_start = {traversal_start_x, traversal_start_y};
  e.traversal_length = traversal_length;
  e.traversal_increment = traversal_increment;
  e.traversal_lateral_jitter = traversal_jitter;
  if (!std::isnan(true_x) && !std::isnan(true_y)) e.fixed_true_pose = Pose2{true_x, true_y};
  if (!std::isnan(belief_x) && !std::isnan(belief_y)) e.initial_belief = Pose2{belief_x, belief_y};
  return e;
}

ConfigStore::ConfigStore() {
  for (const KeySpec& s : registry()) sources_[s.key] = ConfigSource::kDefault;
}

const std::vector<std::string>& ConfigStore::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const KeySpec& s : registry()) out.push_back(s.key);
    return out;
  }();
  return k;
}

bool ConfigStore::known(std::string_view key) { return find_spec(key) != nullptr; }

void ConfigStore::set(std::string_view key, std::string_view value, ConfigSource source) {
  const KeySpec& spec = require_spec(key);
  spec.set(cfg_, key, trim(value));
  sources_.find(key)->second = source;
}

std::string ConfigStore::get(std::string_view key) const { return require_spec(key).get(cfg_); }

ConfigSource ConfigStore::source(std::string_view key) const {
  require_spec(key);
  return sources_.find(key)->second;
}

void ConfigStore::apply_env() {
  const char* v = std::getenv(kSeedEnvVar);
  if (v == nullptr) return;
  try {
    set("seed", v, ConfigSource::kEnv);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{} (from environment variable {})", e.what(), kSeedEnvVar));
  }
}

void ConfigStore::apply_text(std::string_view text, const std::string& origin) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(fmt::format("{}:{}: missing key", origin, line_no));
    try {
      set(key, value, ConfigSource::kFile);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
    }
  }
}

void ConfigStore::apply_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  apply_text(ss.str(), path.string());
}

std::string ConfigStore::snapshot() const {
  std::string out = "# effective configuration\n";
  for (const KeySpec& s : registry()) {
    out += fmt::format("{} = {}  # {}\n", s.key, s.get(cfg_), to_string(sources_.find(s.key)->second));
  }
  return out;
}

void ConfigStore::write_snapshot(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write config snapshot '" + path.string() + "'");
  f << snapshot();
  if (!f) throw IoError("failed writing config snapshot '" + path.string() + "'");
}

}  // namespace fepl
