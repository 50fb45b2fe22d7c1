#include "fepl/normalize.hpp"

#include <algorithm>

namespace fepl {

NormPose normalize_pose(const Bounds& b, const Pose2& p) noexcept {
  return {2.0 * (p.x - b.xmin) / b.width() - 1.0, 2.0 * (p.y - b.ymin) / b.height() - 1.0};
}

Pose2 denormalize_pose(const Bounds& b, const NormPose& n) noexcept {
  return {b.xmin + 0.5 * (n.u + 1.0) * b.width(), b.ymin + 0.5 * (n.v + 1.0) * b.height()};
}

NormScan normalize_scan(const Scan& s, double max_range) {
  NormScan out;
  out.values.reserve(s.ranges.size());
  for (double r : s.ranges) out.values.push_back(r / max_range);
  return out;
}

Scan denormalize_scan(const NormScan& s, double max_range) {
  Scan out;
  out.ranges.reserve(s.values.size());
  for (double v : s.values) out.ranges.push_back(v * max_range);
  return out;
}

NormPose clamp_unit(const NormPose& n) noexcept {
  return {std::clamp(n.u, -1.0, 1.0), std::clamp(n.v, -1.0, 1.0)};
}

}  // namespace fepl
