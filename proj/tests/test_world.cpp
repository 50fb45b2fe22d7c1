#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fepl/error.hpp"
#include "fepl/world.hpp"
#include "test_util.hpp"

using namespace fepl;

TEST_CASE("load_map counts explicit and boundary segments") {
  const WorldMap one = parse_map("bounds 0 0 10 10\n0 0 4 0\n");
  CHECK(one.explicit_count() == 1);
  CHECK(one.segments().size() == 5);

  const WorldMap empty = parse_map("# nothing but walls\nbounds 0 0 24 8\n");
  CHECK(empty.explicit_count() == 0);
  CHECK(empty.segments().size() == 4);
  CHECK(empty.bounds().width() == 24.0);
}

TEST_CASE("load_map rejects bad input") {
  CHECK_THROWS_AS(parse_map("bounds 0 0 10 10\n0 0 0 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_map("bounds 0 0 10 10\n0 0 11 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_map("bounds 0 0 0 10\n"), ValidationError);
  CHECK_THROWS_AS(parse_map("bounds 0 0 10 10\n1 2 3\n"), ParseError);
  CHECK_THROWS_AS(parse_map("1 1 2 2\n"), ParseError);
  CHECK_THROWS_AS(load_map("/nonexistent/file.map"), IoError);
}

TEST_CASE("shipped corridor map loads") {
  const WorldMap map = load_map(FEPL_TEST_MAP);
  CHECK(map.bounds().width() == 24.0);
  CHECK(map.bounds().height() == 8.0);
  CHECK(map.explicit_count() >= 1);
  CHECK(map.clearance() == doctest::Approx(0.25));
}

TEST_CASE("ray_cast in an empty box") {
  const WorldMap box = parse_map("bounds 0 0 10 10\n");
  CHECK(ray_cast(box, {5, 5}, 0.0, 25.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(ray_cast(box, {5, 5}, std::numbers::pi / 4, 25.0) == doctest::Approx(7.071067811865475).epsilon(1e-12));

  const WorldMap big = parse_map("bounds 0 0 100 100\n");
  for (double a = -3.0; a <= 3.0; a += 0.37) CHECK(ray_cast(big, {50, 50}, a, 25.0) == 25.0);
}

TEST_CASE("ray_cast hits an interior segment from either side") {
  const WorldMap map = parse_map("bounds 0 0 10 10\n5 2 5 8\n");
  CHECK(ray_cast(map, {2, 5}, 0.0, 25.0) == doctest::Approx(3.0));
  CHECK(ray_cast(map, {8, 5}, std::numbers::pi, 25.0) == doctest::Approx(3.0));
  // passes below the segment end and reaches the wall
  CHECK(ray_cast(map, {2, 1}, 0.0, 25.0) == doctest::Approx(8.0));
}

TEST_CASE("simulate_scan matches the closed-form box distance") {
  const WorldMap box = parse_map("bounds 0 0 10 10\n");
  SensorConfig cfg;
  cfg.beam_count = 5;
  cfg.noise_sigma = 0.0;
  Rng rng(3);
  const Scan s = simulate_scan(box, {5, 5}, cfg, rng);
  // tests/oracles/frozen.txt
  const double expected[] = {7.071067811865475, 5.411961001461970, 5.0, 5.411961001461970, 7.071067811865475};
  REQUIRE(s.ranges.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(s.ranges[i] - expected[i]) < 1e-9);
}

TEST_CASE("simulate_scan length, range and determinism") {
  const WorldMap map = load_map(FEPL_TEST_MAP);
  SensorConfig cfg;
  Rng a(11), b(11);
  const Scan s1 = simulate_scan(map, {3, 4}, cfg, a);
  const Scan s2 = simulate_scan(map, {3, 4}, cfg, b);
  CHECK(s1.ranges.size() == 622);
  CHECK(s1.ranges == s2.ranges);
  for (double r : s1.ranges) {
    CHECK(r >= 0.0);
    CHECK(r <= cfg.max_range);
  }
}

TEST_CASE("sensor config validation") {
  SensorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.beam_count = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.aperture = 7.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.noise_sigma = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  CHECK(cfg.beam_angle(0) == doctest::Approx(-0.75 * std::numbers::pi));
  CHECK(cfg.beam_angle(621) == doctest::Approx(0.75 * std::numbers::pi));
}

TEST_CASE("apply_action free motion") {
  const WorldMap box = parse_map("bounds 0 0 10 10\n");
  CHECK(apply_action(box, {5, 5}, {0, 0}, 0.5) == Pose2{5, 5});
  const Pose2 p = apply_action(box, {5, 5}, {1, 0}, 0.5);
  CHECK(p.x == doctest::Approx(5.5));
  CHECK(p.y == doctest::Approx(5.0));
}

TEST_CASE("apply_action stops at the clearance distance") {
  const WorldMap box = parse_map("bounds 0 0 10 10\n");
  const Pose2 start{9.7, 5.0};  // 0.3 m from the east wall
  const Pose2 p = apply_action(box, start, {1.0, 0.3}, 10.0);

  // fine-step oracle: march along the ray until the clearance would be broken
  Pose2 q = start;
  const double step = 1e-6;
  const double norm = std::hypot(1.0, 0.3);
  for (;;) {
    const Pose2 next{q.x + step / norm, q.y + step * 0.3 / norm};
    if (box.nearest_distance(next) < box.clearance()) break;
    q = next;
  }
  CHECK(distance(p, q) < 1e-5);
  CHECK(box.nearest_distance(p) >= box.clearance() - 1e-9);
  CHECK(10.0 - p.x == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("apply_action does not tunnel through a thin wall") {
  const WorldMap map = parse_map("bounds 0 0 10 10\n5 1 5 9\n");
  const Pose2 p = apply_action(map, {4.0, 5.0}, {1.0, 0.0}, 20.0);
  CHECK(p.x < 5.0);
  CHECK(5.0 - p.x == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("sample_free_pose respects clearance and is uniform") {
  const WorldMap box = parse_map("bounds 0 0 10 10\n");
  Rng rng(5);
  int quadrant[4] = {0, 0, 0, 0};
  for (int i = 0; i < 10000; ++i) {
    const Pose2 p = sample_free_pose(box, rng);
    REQUIRE(p.x >= 0.25);
    REQUIRE(p.x <= 9.75);
    REQUIRE(p.y >= 0.25);
    REQUIRE(p.y <= 9.75);
    ++quadrant[(p.x >= 5.0 ? 1 : 0) + (p.y >= 5.0 ? 2 : 0)];
  }
  for (int q : quadrant) CHECK(std::abs(q - 2500) <= 216.506351);  // 5 sigma, tests/oracles/frozen.txt
}

TEST_CASE("sample_free_pose gives up on a blocked map") {
  WorldMap blocked({}, Bounds{0, 0, 0.4, 0.4}, 0.25);
  Rng rng(1);
  CHECK_THROWS_AS(sample_free_pose(blocked, rng, 1000), SamplingExhausted);
}

TEST_CASE("project_to_free returns a free pose") {
  const WorldMap map = parse_map("bounds 0 0 10 10\n5 1 5 9\n");
  const Pose2 p = project_to_free(map, {5.05, 5.0}, {4.0, 5.0});
  CHECK(map.is_free(p));
  const Pose2 q = project_to_free(map, {-3.0, 12.0}, {4.0, 5.0});
  CHECK(map.is_free(q));
}

TEST_CASE("map identity hash distinguishes maps") {
  const WorldMap a = parse_map("bounds 0 0 10 10\n5 1 5 9\n");
  const WorldMap b = parse_map("bounds 0 0 10 10\n5 1 5 8\n");
  const WorldMap c = parse_map("bounds 0 0 10 10\n5 1 5 9\n");
  CHECK(a.identity_hash() != b.identity_hash());
  CHECK(a.identity_hash() == c.identity_hash());
}
