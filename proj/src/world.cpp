#include "fepl/world.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "fepl/error.hpp"

namespace fepl {

namespace {

double cross(double ax, double ay, double bx, double by) noexcept { return ax * by - ay * bx; }

bool finite_all(std::initializer_list<double> vs) {
  return std::all_of(vs.begin(), vs.end(), [](double v) { return std::isfinite(v); });
}

void fnv_mix(std::uint64_t& h, double v) noexcept {
  unsigned char bytes[sizeof(double)];
  std::memcpy(bytes, &v, sizeof(double));
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
}

}  // namespace

double distance(const Pose2& a, const Pose2& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

double Segment::length() const noexcept { return std::hypot(x2 - x1, y2 - y1); }

double point_segment_distance(const Pose2& p, const Segment& s) noexcept {
  const double ex = s.x2 - s.x1;
  const double ey = s.y2 - s.y1;
  const double len2 = ex * ex + ey * ey;
  double t = len2 > 0.0 ? ((p.x - s.x1) * ex + (p.y - s.y1) * ey) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (s.x1 + t * ex), p.y - (s.y1 + t * ey));
}

WorldMap::WorldMap(std::vector<Segment> explicit_segments, Bounds bounds, double clearance)
    : bounds_(bounds), clearance_(clearance) {
  if (!finite_all({bounds.xmin, bounds.ymin, bounds.xmax, bounds.ymax}) ||
      !(bounds.xmax > bounds.xmin) || !(bounds.ymax > bounds.ymin)) {
    throw ValidationError("map bounds must form a nonempty rectangle");
  }
  if (!std::isfinite(clearance) || clearance < 0.0) {
    throw ValidationError("map clearance must be a finite non-negative distance");
  }
  for (std::size_t i = 0; i < explicit_segments.size(); ++i) {
    const Segment& s = explicit_segments[i];
    if (!finite_all({s.x1, s.y1, s.x2, s.y2})) {
      throw ValidationError("segment " + std::to_string(i) + " has non-finite coordinates");
    }
    if (!bounds.contains({s.x1, s.y1}) || !bounds.contains({s.x2, s.y2})) {
      throw ValidationError("segment " + std::to_string(i) + " lies outside the map bounds");
    }
    if (s.length() == 0.0) {
      throw ValidationError("segment " + std::to_string(i) + " has zero length");
    }
  }
  explicit_count_ = explicit_segments.size();
  segments_ = std::move(explicit_segments);
  const auto [x0, y0, x1, y1] = bounds;
  segments_.push_back({x0, y0, x1, y0});
  segments_.push_back({x1, y0, x1, y1});
  segments_.push_back({x1, y1, x0, y1});
  segments_.push_back({x0, y1, x0, y0});
}

double WorldMap::nearest_distance(const Pose2& p) const noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : segments_) best = std::min(best, point_segment_distance(p, s));
  return best;
}

bool WorldMap::is_free(const Pose2& p) const noexcept {
  return std::isfinite(p.x) && std::isfinite(p.y) && bounds_.contains(p) &&
         nearest_distance(p) >= clearance_;
}

std::uint64_t WorldMap::identity_hash() const noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  fnv_mix(h, bounds_.xmin);
  fnv_mix(h, bounds_.ymin);
  fnv_mix(h, bounds_.xmax);
  fnv_mix(h, bounds_.ymax);
  fnv_mix(h, clearance_);
  for (const Segment& s : explicit_segments()) {
    fnv_mix(h, s.x1);
    fnv_mix(h, s.y1);
    fnv_mix(h, s.x2);
    fnv_mix(h, s.y2);
  }
  return h;
}

WorldMap parse_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool have_bounds = false;
  Bounds bounds;
  double clearance = kDefaultClearance;
  std::vector<Segment> segs;

  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("map line " + std::to_string(lineno) + ": " + msg);
  };
  auto read_numbers = [&](std::istringstream& ls, std::span<double> out) {
    for (double& v : out) {
      if (!(ls >> v)) fail("expected " + std::to_string(out.size()) + " numbers");
    }
    std::string extra;
    if (ls >> extra) fail("unexpected trailing token '" + extra + "'");
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;
    if (keyword == "bounds") {
      if (have_bounds) fail("duplicate 'bounds'");
      std::array<double, 4> v{};
      read_numbers(ls, v);
      bounds = {v[0], v[1], v[2], v[3]};
      have_bounds = true;
    } else if (!have_bounds) {
      fail("first entry must be 'bounds'");
    } else if (keyword == "clearance") {
      std::array<double, 1> v{};
      read_numbers(ls, v);
      clearance = v[0];
    } else if (keyword == "seg") {
      std::array<double, 4> v{};
      read_numbers(ls, v);
      segs.push_back({v[0], v[1], v[2], v[3]});
    } else if (std::isdigit(static_cast<unsigned char>(keyword[0])) || keyword[0] == '-' ||
               keyword[0] == '.' || keyword[0] == '+') {
      // bare "x1 y1 x2 y2" segment line
      std::istringstream whole(line);
      std::array<double, 4> v{};
      read_numbers(whole, v);
      segs.push_back({v[0], v[1], v[2], v[3]});
    } else {
      fail("unknown keyword '" + keyword + "'");
    }
  }
  if (!have_bounds) throw ParseError("map has no 'bounds' line");
  return WorldMap(std::move(segs), bounds, clearance);
}

WorldMap load_map(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open map file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_map(ss.str());
}

double ray_cast(const WorldMap& map, const Pose2& origin, double angle, double max_range) noexcept {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  double best = max_range;
  for (const Segment& s : map.segments()) {
    const double ex = s.x2 - s.x1;
    const double ey = s.y2 - s.y1;
    const double px = s.x1 - origin.x;
    const double py = s.y1 - origin.y;
    const double denom = cross(dx, dy, ex, ey);
    if (denom == 0.0) {
      // Parallel. Only a collinear segment can be hit; take its nearest
      // endpoint in front of the origin.
      if (cross(px, py, dx, dy) != 0.0) continue;
      const double t1 = px * dx + py * dy;
      const double t2 = (s.x2 - origin.x) * dx + (s.y2 - origin.y) * dy;
      if (t1 <= 0.0 && t2 >= 0.0) return 0.0;
      if (t2 <= 0.0 && t1 >= 0.0) return 0.0;
      const double t = std::min(t1, t2);
      if (t >= 0.0) best = std::min(best, t);
      continue;
    }
    const double t = cross(px, py, ex, ey) / denom;
    const double u = cross(px, py, dx, dy) / denom;
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) best = std::min(best, t);
  }
  return std::clamp(best, 0.0, max_range);
}

void SensorConfig::validate() const {
  if (beam_count < 2) throw ValidationError("sensor beam_count must be >= 2");
  if (!(aperture > 0.0) || aperture > 2.0 * std::numbers::pi) {
    throw ValidationError("sensor aperture must be in (0, 2*pi]");
  }
  if (!(max_range > 0.0) || !std::isfinite(max_range)) {
    throw ValidationError("sensor max_range must be positive");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("sensor noise_sigma must be >= 0");
  }
  if (!std::isfinite(heading)) throw ValidationError("sensor heading must be finite");
}

double SensorConfig::beam_angle(int i) const noexcept {
  return heading - 0.5 * aperture + static_cast<double>(i) * aperture / (beam_count - 1);
}

Scan simulate_scan_exact(const WorldMap& map, const Pose2& pose, const SensorConfig& cfg) {
  Scan scan;
  scan.ranges.resize(static_cast<std::size_t>(cfg.beam_count));
  for (int i = 0; i < cfg.beam_count; ++i) {
    scan.ranges[static_cast<std::size_t>(i)] = ray_cast(map, pose, cfg.beam_angle(i), cfg.max_range);
  }
  return scan;
}

Scan simulate_scan(const WorldMap& map, const Pose2& pose, const SensorConfig& cfg, Rng& rng) {
  Scan scan = simulate_scan_exact(map, pose, cfg);
  if (cfg.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (double& r : scan.ranges) r = std::clamp(r + noise(rng), 0.0, cfg.max_range);
  }
  return scan;
}

std::vector<double> expected_ranges_strided(const WorldMap& map, const Pose2& pose,
                                            const SensorConfig& cfg, int stride) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>((cfg.beam_count + stride - 1) / stride));
  for (int i = 0; i < cfg.beam_count; i += stride) {
    out.push_back(ray_cast(map, pose, cfg.beam_angle(i), cfg.max_range));
  }
  return out;
}

Pose2 apply_action(const WorldMap& map, const Pose2& pose, const ActionCmd& a, double dt) {
  const double mx = a.vx * dt;
  const double my = a.vy * dt;
  if (mx == 0.0 && my == 0.0) return pose;
  const double c = map.clearance();
  auto at = [&](double t) { return Pose2{pose.x + t * mx, pose.y + t * my}; };

  double stop = 1.0;
  for (const Segment& s : map.segments()) {
    auto f = [&](double t) { return point_segment_distance(at(t), s); };
    if (f(0.0) < c) return pose;  // start already in contact: refuse to move
    // Distance from a linearly moving point to a segment is convex in t, so
    // locate its minimiser on [0, stop] by golden-section search.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = stop;
    double m1 = hi - invphi * (hi - lo), m2 = lo + invphi * (hi - lo);
    double f1 = f(m1), f2 = f(m2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        hi = m2;
        m2 = m1;
        f2 = f1;
        m1 = hi - invphi * (hi - lo);
        f1 = f(m1);
      } else {
        lo = m1;
        m1 = m2;
        f1 = f2;
        m2 = lo + invphi * (hi - lo);
        f2 = f(m2);
      }
    }
    double tmin = 0.5 * (lo + hi);
    if (f(stop) < f(tmin)) tmin = stop;
    if (f(tmin) >= c) continue;
    // f is decreasing on [0, tmin]: bisect for the last point with f >= c.
    double good = 0.0, bad = tmin;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (good + bad);
      if (f(mid) >= c) good = mid; else bad = mid;
    }
    stop = std::min(stop, good);
  }
  return at(stop);
}

Pose2 sample_free_pose(const WorldMap& map, Rng& rng, int max_attempts) {
  const Bounds& b = map.bounds();
  std::uniform_real_distribution<double> ux(b.xmin, b.xmax);
  std::uniform_real_distribution<double> uy(b.ymin, b.ymax);
  for (int i = 0; i < max_attempts; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    if (map.is_free({x, y})) return {x, y};
  }
  throw SamplingExhausted("no free pose found after " + std::to_string(max_attempts) +
                          " attempts; map has no usable free space");
}

Pose2 project_to_free(const WorldMap& map, const Pose2& p, const Pose2& fallback) {
  if (map.is_free(p)) return p;
  const Bounds& b = map.bounds();
  const double c = map.clearance();
  // Slightly more than the clearance so rounding cannot leave us inside.
  const double target = c * (1.0 + 1e-9) + 1e-12;
  Pose2 q{std::clamp(p.x, b.xmin + target, b.xmax - target),
          std::clamp(p.y, b.ymin + target, b.ymax - target)};
  for (int it = 0; it < 16 && !map.is_free(q); ++it) {
    const Segment* worst = nullptr;
    double worst_d = std::numeric_limits<double>::infinity();
    for (const Segment& s : map.segments()) {
      const double d = point_segment_distance(q, s);
      if (d < worst_d) {
        worst_d = d;
        worst = &s;
      }
    }
    const double ex = worst->x2 - worst->x1;
    const double ey = worst->y2 - worst->y1;
    const double len2 = ex * ex + ey * ey;
    const double t = std::clamp(((q.x - worst->x1) * ex + (q.y - worst->y1) * ey) / len2, 0.0, 1.0);
    const double cx = worst->x1 + t * ex;
    const double cy = worst->y1 + t * ey;
    double nx = q.x - cx;
    double ny = q.y - cy;
    double n = std::hypot(nx, ny);
    if (n == 0.0) {
      nx = -ey;
      ny = ex;
      n = std::sqrt(len2);
    }
    q = {cx + nx / n * target, cy + ny / n * target};
  }
  return map.is_free(q) ? q : fallback;
}

}  // namespace fepl
