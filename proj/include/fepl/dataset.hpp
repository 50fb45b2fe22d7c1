// (pose, scan) training samples for the generative model.
#pragma once

#include <cstdint>
#include <vector>

#include "fepl/normalize.hpp"
#include "fepl/world.hpp"

namespace fepl {

struct Record {
  NormPose pose;
  std::vector<float> scan;  // normalized ranges, stored at the on-disk precision

  friend bool operator==(const Record&, const Record&) = default;
};

struct Dataset {
  std::vector<Record> records;
  std::uint64_t map_hash{0};
  Bounds bounds;
  SensorConfig sensor;

  int beam_count() const noexcept { return sensor.beam_count; }
  /// Throws ValidationError if a record breaks the length/range invariants.
  void validate() const;
  /// FNV-1a over every record; used to compare datasets cheaply.
  std::uint64_t content_hash() const noexcept;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// n uniform free poses with their (noisy) normalized scans.
Dataset collect_dataset(const WorldMap& map, const SensorConfig& cfg, int n, Rng& rng);

}  // namespace fepl
