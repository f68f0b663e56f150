#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "amie/floorplan.hpp"
#include "amie/scenarios.hpp"

namespace {

using namespace amie;
using namespace amie::plan;
constexpr double kPi = std::numbers::pi;

FloorPlan fixture() { return load_floorplan_file(reference_floorplan_path()); }

nlohmann::json fixture_json() { return floorplan_to_json(fixture()); }

ErrorCode load_error(const std::string& doc, std::string* what = nullptr) {
  try {
    load_floorplan(doc);
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  return ErrorCode::internal_error;
}

TEST(LoadFloorplan, ReferenceFixture) {
  const auto p = fixture();
  EXPECT_EQ(p.beacons.size(), 6u);
  EXPECT_GE(p.pois.size(), 3u);
  ASSERT_NE(p.find_poi("digital_lab"), nullptr);
  ASSERT_NE(p.find_poi("exit"), nullptr);
  EXPECT_EQ(p.exit_poi, "exit");
  EXPECT_EQ(p.bounds.w, 2.5);
  EXPECT_EQ(p.bounds.h, 10.0);
  EXPECT_EQ(p.beacons.position_of(4), (Point{2.5, 5}));
  EXPECT_EQ(p.find_poi("digital_lab")->name_ar, "المختبر الرقمي");
}

TEST(LoadFloorplan, DanglingExit) {
  auto j = fixture_json();
  j["exit_poi"] = "nowhere";
  std::string what;
  EXPECT_EQ(load_error(j.dump(), &what), ErrorCode::validation_error);
  EXPECT_NE(what.find("exit_poi"), std::string::npos);
}

TEST(LoadFloorplan, EmptyAndMalformed) {
  EXPECT_EQ(load_error(""), ErrorCode::parse_error);
  EXPECT_EQ(load_error("{\"bounds\":"), ErrorCode::parse_error);
}

TEST(LoadFloorplan, ValidationNamesField) {
  std::string what;
  auto j = fixture_json();
  j["pois"][1]["x"] = 30.0;
  EXPECT_EQ(load_error(j.dump(), &what), ErrorCode::validation_error);
  EXPECT_NE(what.find("pois[1]"), std::string::npos);

  j = fixture_json();
  j["routes"]["digital_lab"] = {{1, 7}, {2, 2}};
  EXPECT_EQ(load_error(j.dump(), &what), ErrorCode::validation_error);
  EXPECT_NE(what.find("routes.digital_lab"), std::string::npos);

  j = fixture_json();
  j["beacons"][1]["id"] = 1;
  EXPECT_EQ(load_error(j.dump(), &what), ErrorCode::validation_error);
  EXPECT_NE(what.find("beacons"), std::string::npos);

  j = fixture_json();
  j["pois"][0]["key"] = "Class Room";
  EXPECT_EQ(load_error(j.dump(), &what), ErrorCode::validation_error);
  EXPECT_NE(what.find("pois[0].key"), std::string::npos);
}

TEST(NearestPoi, FixtureAnchors) {
  const auto p = fixture();
  EXPECT_EQ(nearest_poi({0.5, 2.0}, p).key, "classroom");
  EXPECT_EQ(nearest_poi({0.2, 7.5}, p).key, "digital_lab");
  EXPECT_EQ(nearest_poi({2.5, 10}, p).key, "exit");
}

TEST(NearestPoi, EmptyPlan) {
  FloorPlan p;
  EXPECT_THROW(nearest_poi({0, 0}, p), Error);
}

TEST(NearestPoi, TieBreakIgnoresOrder) {
  FloorPlan a;
  a.pois = {{"zeta", "", "", {0, 0}}, {"alpha", "", "", {2, 0}}};
  FloorPlan b;
  b.pois = {{"alpha", "", "", {2, 0}}, {"zeta", "", "", {0, 0}}};
  EXPECT_EQ(nearest_poi({1, 0}, a).key, "alpha");
  EXPECT_EQ(nearest_poi({1, 0}, b).key, "alpha");
}

TEST(PlanRoute, FixtureRoute) {
  const auto p = fixture();
  const auto r = plan_route(p, {1, 1}, "digital_lab");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], (Point{1, 7}));
  EXPECT_EQ(r[1], (Point{0.2, 7.5}));
}

TEST(PlanRoute, AlreadyThereAndUnknown) {
  const auto p = fixture();
  const auto r = plan_route(p, {0.25, 7.45}, "digital_lab");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], (Point{0.2, 7.5}));
  try {
    plan_route(p, {1, 1}, "cafeteria");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_destination);
  }
  // a poi without a stored route degenerates to its anchor
  EXPECT_EQ(plan_route(p, {1, 8}, "classroom"), (Route{{0, 2.5}}));
  // leading waypoints already reached are dropped
  EXPECT_EQ(plan_route(p, {1.1, 7.1}, "digital_lab"), (Route{{0.2, 7.5}}));
}

TEST(NextDirection, Examples) {
  const Point lab{0.2, 7.5};
  EXPECT_EQ(next_direction({{1, 1}, kPi / 2}, {{1, 7}, lab}, lab), Direction::Forward);
  // bearing atan2(0.5, -0.8) ~ 148 deg, delta ~ 58 deg
  EXPECT_EQ(next_direction({{1, 7}, kPi / 2}, {lab}, lab), Direction::TurnLeft);
  EXPECT_EQ(next_direction({{0.3, 7.4}, 0.0}, {}, lab), Direction::Arrived);
  EXPECT_EQ(next_direction({{0.3, 7.4}, 0.0}, {{5, 5}}, lab), Direction::Arrived);
  EXPECT_EQ(next_direction({{1, 5}, kPi / 2}, {{3, 5}}, lab), Direction::TurnRight);
  EXPECT_EQ(next_direction({{1, 5}, kPi / 2}, {{1, 3}}, lab), Direction::TurnAround);
  EXPECT_THROW(next_direction({{1, 1}, 0.0}, {}, lab), Error);
}

TEST(NextDirection, QuantizationIsTotalAndExclusive) {
  // Boundaries: |d| <= 45 forward, (45, 135] left, [-135, -45) right.
  EXPECT_EQ(quantize_turn(kPi / 4), Direction::Forward);
  EXPECT_EQ(quantize_turn(-kPi / 4), Direction::Forward);
  EXPECT_EQ(quantize_turn(3 * kPi / 4), Direction::TurnLeft);
  EXPECT_EQ(quantize_turn(-3 * kPi / 4), Direction::TurnRight);
  EXPECT_EQ(quantize_turn(kPi), Direction::TurnAround);
  int counts[5] = {};
  for (int i = -179999; i <= 180000; ++i) {
    const double delta = i * kPi / 180000.0;
    const Direction d = quantize_turn(delta);
    ASSERT_NE(d, Direction::Arrived);
    ++counts[static_cast<int>(d)];
  }
  for (int k = 0; k < 4; ++k) EXPECT_GT(counts[k], 0);
  EXPECT_EQ(counts[0] + counts[1] + counts[2] + counts[3], 360000);
}

TEST(CheckArrival, InclusiveBoundary) {
  EXPECT_TRUE(check_arrival({1, 1}, {1, 1}, 1.0));
  EXPECT_TRUE(check_arrival({0, 0}, {1, 0}, 1.0));
  EXPECT_FALSE(check_arrival({0, 0}, {2, 0}, 1.0));
  EXPECT_THROW(check_arrival({0, 0}, {0, 0}, 0.0), Error);
}

TEST(EmergencyRoute, FromStartAndAtExit) {
  const auto p = fixture();
  const auto r = emergency_route(p, {1, 1});
  EXPECT_EQ(r.origin, (Point{1, 1}));
  ASSERT_FALSE(r.waypoints.empty());
  EXPECT_EQ(r.waypoints.back(), (Point{2.5, 10}));

  const auto at = emergency_route(p, {2.5, 10});
  ASSERT_EQ(at.waypoints.size(), 1u);
  EXPECT_EQ(next_direction({{2.5, 10}, 0.0}, at.waypoints, p.find_poi("exit")->anchor), Direction::Arrived);
}

TEST(Navigator, CanonicalWalkEmitsTableSequence) {
  const auto p = fixture();
  Navigator nav(p, "digital_lab", {1, 1});
  UserPose pose{{1, 1}, kPi / 2};
  std::vector<Direction> seq;
  for (int tick = 0; tick < 20; ++tick) {
    const Direction d = nav.step(pose);
    seq.push_back(d);
    if (d == Direction::Arrived) break;
    const Point next = nav.remaining().front();
    const double gap = distance(pose.position, next);
    pose.position = pose.position + (std::min(2.0, gap) / gap) * (next - pose.position);
  }
  EXPECT_EQ(seq, (std::vector<Direction>{Direction::Forward, Direction::Forward, Direction::Forward,
                                         Direction::TurnLeft, Direction::Arrived}));
}

}  // namespace
