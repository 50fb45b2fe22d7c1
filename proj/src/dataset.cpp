#include "fepl/dataset.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "fepl/error.hpp"

namespace fepl {

void Dataset::validate() const {
  sensor.validate();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    if (static_cast<int>(r.scan.size()) != sensor.beam_count) {
      throw ValidationError("record " + std::to_string(i) + " has " + std::to_string(r.scan.size()) +
                            " beams, expected " + std::to_string(sensor.beam_count));
    }
    if (!(std::abs(r.pose.u) <= 1.0) || !(std::abs(r.pose.v) <= 1.0)) {
      throw ValidationError("record " + std::to_string(i) + " pose is outside [-1, 1]^2");
    }
    for (float v : r.scan) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw ValidationError("record " + std::to_string(i) + " has a range outside [0, 1]");
      }
    }
  }
}

std::uint64_t Dataset::content_hash() const noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const Record& r : records) {
    mix(&r.pose.u, sizeof(double));
    mix(&r.pose.v, sizeof(double));
    mix(r.scan.data(), r.scan.size() * sizeof(float));
  }
  return h;
}

Dataset collect_dataset(const WorldMap& map, const SensorConfig& cfg, int n, Rng& rng) {
  if (n < 1) throw ValidationError("dataset size must be >= 1");
  cfg.validate();
  Dataset ds;
  ds.map_hash = map.identity_hash();
  ds.bounds = map.bounds();
  ds.sensor = cfg;
  ds.records.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Pose2 p = sample_free_pose(map, rng);
    const Scan s = simulate_scan(map, p, cfg, rng);
    Record r;
    r.pose = normalize_pose(map.bounds(), p);
    r.scan.reserve(s.ranges.size());
    for (double range : s.ranges) r.scan.push_back(static_cast<float>(range / cfg.max_range));
    ds.records.push_back(std::move(r));
  }
  return ds;
}

}  // namespace fepl
