// Deterministic 2D world: line-segment maps, raycast LiDAR simulation and
// velocity kinematics with stop-at-contact collision handling.
//
// The robot heading is fixed, so a pose is just a planar position.
#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace fepl {

using Rng = std::mt19937_64;

struct Pose2 {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

double distance(const Pose2& a, const Pose2& b) noexcept;

struct Segment {
  double x1{0.0};
  double y1{0.0};
  double x2{0.0};
  double y2{0.0};

  double length() const noexcept;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Euclidean distance from p to the closed segment s.
double point_segment_distance(const Pose2& p, const Segment& s) noexcept;

struct Bounds {
  double xmin{0.0};
  double ymin{0.0};
  double xmax{0.0};
  double ymax{0.0};

  double width() const noexcept { return xmax - xmin; }
  double height() const noexcept { return ymax - ymin; }
  Pose2 center() const noexcept { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  bool contains(const Pose2& p) const noexcept {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

inline constexpr double kDefaultClearance = 0.25;

/// Immutable obstacle map. The four boundary walls are always part of
/// `segments()`, appended after the explicit ones.
class WorldMap {
 public:
  /// Validates and builds a map; throws ValidationError.
  WorldMap(std::vector<Segment> explicit_segments, Bounds bounds,
           double clearance = kDefaultClearance);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::span<const Segment> explicit_segments() const noexcept {
    return {segments_.data(), explicit_count_};
  }
  std::size_t explicit_count() const noexcept { return explicit_count_; }
  const Bounds& bounds() const noexcept { return bounds_; }
  double clearance() const noexcept { return clearance_; }

  /// Distance to the nearest segment (boundary walls included).
  double nearest_distance(const Pose2& p) const noexcept;
  /// Inside bounds and at least `clearance` away from every segment.
  bool is_free(const Pose2& p) const noexcept;

  /// Stable 64-bit identity of geometry + clearance (FNV-1a over the raw
  /// IEEE-754 bytes).
  std::uint64_t identity_hash() const noexcept;

 private:
  std::vector<Segment> segments_;
  std::size_t explicit_count_{0};
  Bounds bounds_;
  double clearance_{kDefaultClearance};
};

/// Parses the text map format:
///   bounds xmin ymin xmax ymax
///   clearance c          (optional)
///   seg x1 y1 x2 y2      (any number; the `seg` keyword is optional)
/// with `#` comments. Throws ParseError or ValidationError.
WorldMap parse_map(std::string_view text);
WorldMap load_map(const std::filesystem::path& path);

/// Distance along the ray to the nearest segment hit, capped at max_range.
double ray_cast(const WorldMap& map, const Pose2& origin, double angle, double max_range) noexcept;

struct SensorConfig {
  int beam_count{622};
  double aperture{1.5 * std::numbers::pi};
  double max_range{25.0};
  double noise_sigma{0.02};
  double heading{0.0};

  /// Throws ValidationError.
  void validate() const;
  /// Angle of beam i; beams spread uniformly across the aperture.
  double beam_angle(int i) const noexcept;
  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

struct Scan {
  std::vector<double> ranges;
};

/// Noisy scan: exact raycast per beam plus N(0, noise_sigma), clamped to
/// [0, max_range]. Draws exactly one normal variate per beam when
/// noise_sigma > 0 and none otherwise.
Scan simulate_scan(const WorldMap& map, const Pose2& pose, const SensorConfig& cfg, Rng& rng);
/// Noise-free scan.
Scan simulate_scan_exact(const WorldMap& map, const Pose2& pose, const SensorConfig& cfg);
/// Noise-free ranges for beams 0, stride, 2*stride, ...
std::vector<double> expected_ranges_strided(const WorldMap& map, const Pose2& pose,
                                            const SensorConfig& cfg, int stride);

struct ActionCmd {
  double vx{0.0};
  double vy{0.0};

  friend bool operator==(const ActionCmd&, const ActionCmd&) = default;
};

/// Integrates pose + a*dt along a straight line and stops at the last point
/// that keeps `clearance` from every segment.
Pose2 apply_action(const WorldMap& map, const Pose2& pose, const ActionCmd& a, double dt);

/// Uniform free pose by rejection sampling. Throws SamplingExhausted.
Pose2 sample_free_pose(const WorldMap& map, Rng& rng, int max_attempts = 100000);

/// Nearest free pose to p (pushes out of bounds and segment clearance
/// zones). Returns `fallback` if no free pose is found nearby.
Pose2 project_to_free(const WorldMap& map, const Pose2& p, const Pose2& fallback);

}  // namespace fepl
