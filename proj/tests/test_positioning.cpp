#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "amie/positioning.hpp"
#include "amie/simkit.hpp"

namespace {

using namespace amie;
using namespace amie::pos;

RssiVector noiseless(const NodeLayout& layout, Point p, const rf::LogDistanceModel& radio = rf::kDefaultRadio) {
  Rng rng(0);
  return sim::synthesize_rssi_vector(layout, p, radio, 0.0, rng);
}

bool clamp_engaged(const NodeLayout& layout, Point p) {
  for (const auto& n : layout.nodes())
    if (distance(n.position, p) < rf::kMinForwardDistance) return true;
  return false;
}

TEST(Layout, ReferenceGrid) {
  const auto l = build_equidistant_layout(3, 2, 2.5, 5.0);
  const std::vector<Point> want{{0, 0}, {2.5, 0}, {0, 5}, {2.5, 5}, {0, 10}, {2.5, 10}};
  ASSERT_EQ(l.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(l.nodes()[i].id, static_cast<int>(i) + 1);
    EXPECT_EQ(l.nodes()[i].position, want[i]);
  }
}

TEST(Layout, SingleRowAndTooSmall) {
  const auto l = build_equidistant_layout(1, 3, 1.0, 1.0);
  EXPECT_EQ(l.nodes()[2].position, (Point{2, 0}));
  EXPECT_THROW(build_equidistant_layout(1, 2, 1.0, 1.0), Error);
  EXPECT_THROW(build_equidistant_layout(2, 2, 0.0, 1.0), Error);
}

TEST(Layout, RejectsDuplicates) {
  EXPECT_THROW(NodeLayout({{1, {0, 0}}, {1, {1, 0}}}), Error);
  EXPECT_THROW(NodeLayout({{1, {0, 0}}, {2, {0, 0}}}), Error);
}

TEST(SelectStrongest, OrdersBySignal) {
  const auto l = reference_layout();
  const auto ids = select_strongest_nodes({{1, -55}, {2, -60}, {3, -70}, {4, -80}, {5, -85}, {6, -88}}, l);
  EXPECT_EQ(ids, (std::array<NodeId, 3>{1, 2, 3}));
}

TEST(SelectStrongest, TiesGoToLowerId) {
  const auto l = reference_layout();
  const auto ids = select_strongest_nodes({{1, -55}, {2, -55}, {3, -70}, {4, -70}, {5, -85}, {6, -88}}, l);
  EXPECT_EQ(ids, (std::array<NodeId, 3>{1, 2, 3}));
}

TEST(SelectStrongest, CollinearWithoutUsableFourth) {
  const auto l = reference_layout();
  try {
    select_strongest_nodes({{1, -55}, {3, -60}, {5, -65}, {2, -95}, {4, -96}, {6, -97}}, l);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_signal);
  }
}

TEST(SelectStrongest, CollinearRepairedByFourth) {
  const auto l = reference_layout();
  // 1, 3, 5 share x = 0; node 2 replaces the weakest (5).
  const auto ids = select_strongest_nodes({{1, -55}, {3, -60}, {5, -65}, {2, -70}, {4, -96}, {6, -97}}, l);
  EXPECT_EQ(ids, (std::array<NodeId, 3>{1, 3, 2}));
}

TEST(SelectStrongest, InsufficientAndOrderIndependent) {
  const auto l = reference_layout();
  EXPECT_THROW(select_strongest_nodes({{1, -55}, {2, -60}, {3, -91}}, l), Error);
  // readings for beacons outside the layout are ignored
  EXPECT_THROW(select_strongest_nodes({{1, -55}, {2, -60}, {9, -40}}, l), Error);

  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<NodeId, double>> entries;
    for (int id = 1; id <= 6; ++id) entries.push_back({id, std::round(rng.uniform(-89, -40))});
    RssiVector a(entries.begin(), entries.end());
    std::reverse(entries.begin(), entries.end());
    RssiVector b;
    for (const auto& e : entries) b.insert(e);
    try {
      EXPECT_EQ(select_strongest_nodes(a, l), select_strongest_nodes(b, l));
    } catch (const Error&) {
      EXPECT_THROW(select_strongest_nodes(b, l), Error);
    }
  }
}

TEST(IntersectCircles, Tangent) {
  const auto r = intersect_circles({0, 0}, 1, {2, 0}, 1);
  ASSERT_EQ(r.count, 1);
  EXPECT_FALSE(r.fallback);
  EXPECT_NEAR(r.points[0].x, 1.0, 1e-12);
  EXPECT_NEAR(r.points[0].y, 0.0, 1e-12);
}

TEST(IntersectCircles, TwoPoints) {
  const auto r = intersect_circles({0, 0}, 5, {6, 0}, 5);
  ASSERT_EQ(r.count, 2);
  std::vector<Point> pts{r.points[0], r.points[1]};
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.y > b.y; });
  EXPECT_NEAR(pts[0].x, 3.0, 1e-12);
  EXPECT_NEAR(pts[0].y, 4.0, 1e-12);
  EXPECT_NEAR(pts[1].x, 3.0, 1e-12);
  EXPECT_NEAR(pts[1].y, -4.0, 1e-12);
}

TEST(IntersectCircles, DisjointFallback) {
  const auto r = intersect_circles({0, 0}, 1, {10, 0}, 1);
  ASSERT_EQ(r.count, 1);
  EXPECT_TRUE(r.fallback);
  EXPECT_NEAR(r.points[0].x, 5.0, 1e-12);
  EXPECT_NEAR(r.points[0].y, 0.0, 1e-12);
}

TEST(IntersectCircles, ContainedFallbackClamped) {
  // r1 = 10 swallows the second circle: t = (10 + (2 - 11)/2)/2 = 2.75 -> 1
  const auto r = intersect_circles({0, 0}, 10, {2, 0}, 1);
  EXPECT_TRUE(r.fallback);
  EXPECT_NEAR(r.points[0].x, 2.0, 1e-12);
}

TEST(IntersectCircles, CoincidentCentres) {
  try {
    intersect_circles({1, 1}, 1, {1, 1}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_geometry);
  }
}

TEST(Trilaterate, NoiselessKnownPoint) {
  const auto l = reference_layout();
  const auto est = trilaterate(l, noiseless(l, {1, 1}), rf::kDefaultRadio);
  EXPECT_EQ(est.used_nodes, (std::array<NodeId, 3>{1, 2, 3}));
  EXPECT_NEAR(est.radii[0], std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(est.radii[1], std::sqrt(3.25), 1e-9);
  EXPECT_NEAR(est.radii[2], std::sqrt(17.0), 1e-9);
  EXPECT_NEAR(est.position.x, 1.0, 1e-6);
  EXPECT_NEAR(est.position.y, 1.0, 1e-6);
  EXPECT_EQ(est.fallback_count, 0);
}

TEST(Trilaterate, AtBeaconWithClamp) {
  const auto l = reference_layout();
  const auto est = trilaterate(l, noiseless(l, {0, 0}), rf::kDefaultRadio);
  EXPECT_LT(norm(est.position), 0.05);
}

TEST(Trilaterate, TwoUsableReadings) {
  const auto l = reference_layout();
  try {
    trilaterate(l, {{1, -60}, {2, -62}, {3, -95}}, rf::kDefaultRadio);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_signal);
  }
}

TEST(Trilaterate, NoiselessRoundTripProperty) {
  const auto l = reference_layout();
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const Point p{rng.uniform(0, 2.5), rng.uniform(0, 10)};
    const auto est = trilaterate(l, noiseless(l, p), rf::kDefaultRadio);
    const double err = distance(est.position, p);
    if (clamp_engaged(l, p) || est.fallback_count > 0)
      EXPECT_LT(err, 0.05) << p.x << "," << p.y;
    else
      EXPECT_LT(err, 1e-6) << p.x << "," << p.y;
  }
}

TEST(Trilaterate, OtherRadioConstantsRoundTrip) {
  const auto l = reference_layout();
  const rf::LogDistanceModel radio{-65.0, 1.0, 3.1};
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Point p{rng.uniform(0.2, 2.3), rng.uniform(0.2, 9.8)};
    EXPECT_LT(distance(trilaterate(l, noiseless(l, p, radio), radio).position, p), 1e-6);
  }
}

TEST(Trilaterate, TranslationEquivariance) {
  const auto l = reference_layout();
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const Point p{rng.uniform(0.2, 2.3), rng.uniform(0.2, 9.8)};
    const Point t{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const auto base = trilaterate(l, noiseless(l, p), rf::kDefaultRadio).position;
    const auto lt = l.translated(t);
    const auto moved = trilaterate(lt, noiseless(lt, p + t), rf::kDefaultRadio).position;
    EXPECT_NEAR(moved.x, base.x + t.x, 1e-9);
    EXPECT_NEAR(moved.y, base.y + t.y, 1e-9);
  }
}

TEST(Trilaterate, PositionIsMeanOfIntersections) {
  const auto l = reference_layout();
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const Point p{rng.uniform(0, 2.5), rng.uniform(0, 10)};
    const auto v = sim::synthesize_rssi_vector(l, p, rf::kDefaultRadio, 3.0, rng);
    try {
      const auto est = trilaterate(l, v, rf::kDefaultRadio);
      const auto& q = est.intersection_points;
      EXPECT_NEAR(est.position.x, (q[0].x + q[1].x + q[2].x) / 3.0, 1e-12);
      EXPECT_NEAR(est.position.y, (q[0].y + q[1].y + q[2].y) / 3.0, 1e-12);
      EXPECT_GE(est.fallback_count, 0);
      EXPECT_LE(est.fallback_count, 3);
    } catch (const Error&) {
    }
  }
}

}  // namespace
