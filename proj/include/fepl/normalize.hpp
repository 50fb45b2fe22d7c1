// Mapping between metric quantities and the network's normalized space.
#pragma once

#include <vector>

#include "fepl/world.hpp"

namespace fepl {

/// Position scaled so the map bounds span [-1, 1] on each axis.
struct NormPose {
  double u{0.0};
  double v{0.0};

  friend bool operator==(const NormPose&, const NormPose&) = default;
};

/// Ranges divided by the sensor max range.
struct NormScan {
  std::vector<double> values;
};

NormPose normalize_pose(const Bounds& b, const Pose2& p) noexcept;
Pose2 denormalize_pose(const Bounds& b, const NormPose& n) noexcept;
NormScan normalize_scan(const Scan& s, double max_range);
Scan denormalize_scan(const NormScan& s, double max_range);

/// Clamp to the normalized box [-1, 1]^2.
NormPose clamp_unit(const NormPose& n) noexcept;

/// Meters per normalized unit along each axis (half the map extent).
inline double meters_per_unit_x(const Bounds& b) noexcept { return 0.5 * b.width(); }
inline double meters_per_unit_y(const Bounds& b) noexcept { return 0.5 * b.height(); }

}  // namespace fepl
