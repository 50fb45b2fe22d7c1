// Run configuration: a flat `key = value` file with dotted keys, layered as
// built-in defaults < FEP_LIDAR_SEED (seed only) < config file < flags.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fepl/bench.hpp"
#include "fepl/fep.hpp"
#include "fepl/genmodel.hpp"
#include "fepl/pf.hpp"
#include "fepl/train.hpp"
#include "fepl/world.hpp"

namespace fepl {

inline constexpr const char* kSeedEnvVar = "FEP_LIDAR_SEED";

enum class ConfigSource { kDefault, kEnv, kFile, kFlag };
std::string to_string(ConfigSource s);

struct RunConfig {
  std::string map_path;
  std::string model_path;
  std::string dataset_path;
  std::string out;
  std::uint64_t seed{1};
  int jobs{1};

  int beam_count{622};
  double aperture_deg{270.0};
  double max_range{25.0};
  double noise_sigma{0.02};

  int channels{32};
  int hidden{128};
  int collect_n{13000};
  TrainConfig train;

  FepParams fep;
  PfConfig pf;

  std::string experiment{"static"};
  std::string methods{"both"};
  int trials{100};
  int iterations{50};
  double min_start_goal_distance{12.0};
  bool clear_path{true};
  double success_radius{0.8};
  double traversal_start_x{4.0};
  double traversal_start_y{4.0};
  double traversal_length{16.0};
  double traversal_increment{0.4};
  double traversal_jitter{1.0};

  // NaN means "sample" (true pose, start, goal) or "map center" (belief).
  double true_x;
  double true_y;
  double belief_x;
  double belief_y;
  double start_x;
  double start_y;
  double goal_x;
  double goal_y;

  RunConfig();

  SensorConfig sensor() const;
  Architecture architecture() const;
  ExperimentConfig experiment_config() const;
};

/// RunConfig plus the origin of every value.
class ConfigStore {
 public:
  ConfigStore();

  /// Every registered key, in snapshot order.
  static const std::vector<std::string>& keys();
  static bool known(std::string_view key);

  /// Parses and assigns one value. Throws ConfigError naming the key on an
  /// unknown key or an unparsable value.
  void set(std::string_view key, std::string_view value, ConfigSource source);
  std::string get(std::string_view key) const;
  ConfigSource source(std::string_view key) const;

  /// Reads the seed from FEP_LIDAR_SEED when it is set.
  void apply_env();
  /// Applies every `key = value` line. ParseError on malformed lines.
  void apply_text(std::string_view text, const std::string& origin);
  /// IoError if the file cannot be read.
  void apply_file(const std::filesystem::path& path);

  /// `key = value` lines, one per key, with the source as a trailing
  /// comment; loadable by apply_text.
  std::string snapshot() const;
  void write_snapshot(const std::filesystem::path& path) const;

  const RunConfig& config() const noexcept { return cfg_; }
  RunConfig& config() noexcept { return cfg_; }

 private:
  RunConfig cfg_;
  std::map<std::string, ConfigSource, std::less<>> sources_;
};

}  // namespace fepl
