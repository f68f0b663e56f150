#pragma once

// Beacon layouts and the strongest-three circle-intersection locator.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amie/error.hpp"
#include "amie/geometry.hpp"
#include "amie/rfmodel.hpp"

namespace amie::pos {

using NodeId = int;

struct BeaconNode {
  NodeId id = 0;
  Point position;
};

class NodeLayout {
public:
  NodeLayout() = default;

  explicit NodeLayout(std::vector<BeaconNode> nodes) : nodes_(std::move(nodes)) {
    std::set<NodeId> ids;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      if (n.id <= 0) throw Error(ErrorCode::layout_error, "beacon id must be positive");
      if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y))
        throw Error(ErrorCode::layout_error, "beacon " + std::to_string(n.id) + " has non-finite position");
      if (!ids.insert(n.id).second)
        throw Error(ErrorCode::layout_error, "duplicate beacon id " + std::to_string(n.id));
      for (std::size_t j = 0; j < i; ++j)
        if (nodes_[j].position == n.position)
          throw Error(ErrorCode::layout_error, "beacons " + std::to_string(nodes_[j].id) + " and " +
                                                   std::to_string(n.id) + " share a position");
    }
  }

  const std::vector<BeaconNode>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  const BeaconNode* find(NodeId id) const {
    for (const auto& n : nodes_)
      if (n.id == id) return &n;
    return nullptr;
  }

  Point position_of(NodeId id) const {
    if (const auto* n = find(id)) return n->position;
    throw Error(ErrorCode::lookup_error, "unknown beacon " + std::to_string(id));
  }

  NodeLayout translated(Point t) const {
    auto copy = nodes_;
    for (auto& n : copy) n.position = n.position + t;
    return NodeLayout(std::move(copy));
  }

private:
  std::vector<BeaconNode> nodes_;
};

/// Per-beacon readings in dBm, keyed by node id. May be partial.
using RssiVector = std::map<NodeId, double>;

struct PositionEstimate {
  Point position;
  std::array<NodeId, 3> used_nodes{};
  // One chosen point per node pair: (0,1), (0,2), (1,2) of used_nodes.
  std::array<Point, 3> intersection_points{};
  int fallback_count = 0;
  std::array<double, 3> radii{};
};

/// Row-major grid, node 1 at the origin.
inline NodeLayout build_equidistant_layout(int rows, int cols, double dx, double dy) {
  if (rows <= 0 || cols <= 0 || rows * cols < 3)
    throw Error(ErrorCode::layout_error, "layout needs at least 3 nodes");
  if (!(dx > 0.0) || !(dy > 0.0))
    throw Error(ErrorCode::layout_error, "grid spacing must be positive");
  std::vector<BeaconNode> nodes;
  for (int k = 0; k < rows * cols; ++k)
    nodes.push_back({k + 1, {(k % cols) * dx, (k / cols) * dy}});
  return NodeLayout(std::move(nodes));
}

// 3 rows x 2 columns, 2.5 m across and 5 m along the corridor.
inline NodeLayout reference_layout() { return build_equidistant_layout(3, 2, 2.5, 5.0); }

inline constexpr double kCollinearArea = 1e-6;  // m^2

/// The three usable readings with the strongest signal (ties: lower id).
/// A collinear triple is repaired by swapping in the next-strongest node
/// in place of the weakest member that restores a proper triangle.
inline std::array<NodeId, 3> select_strongest_nodes(const RssiVector& v, const NodeLayout& layout) {
  struct Cand {
    NodeId id;
    double rssi;
    Point pos;
  };
  std::vector<Cand> usable;
  for (const auto& [id, rssi] : v) {
    const auto* node = layout.find(id);
    if (node != nullptr && rf::is_usable(rssi)) usable.push_back({id, rssi, node->position});
  }
  if (usable.size() < 3)
    throw Error(ErrorCode::insufficient_signal,
                "need 3 usable readings, have " + std::to_string(usable.size()));
  std::sort(usable.begin(), usable.end(), [](const Cand& a, const Cand& b) {
    return a.rssi != b.rssi ? a.rssi > b.rssi : a.id < b.id;
  });

  std::array<Cand, 3> pick{usable[0], usable[1], usable[2]};
  auto collinear = [](const std::array<Cand, 3>& p) {
    return triangle_area(p[0].pos, p[1].pos, p[2].pos) < kCollinearArea;
  };
  if (collinear(pick)) {
    bool repaired = false;
    for (std::size_t extra = 3; extra < usable.size() && !repaired; ++extra) {
      for (int slot = 2; slot >= 0; --slot) {
        auto trial = pick;
        trial[static_cast<std::size_t>(slot)] = usable[extra];
        if (!collinear(trial)) {
          pick = trial;
          repaired = true;
          break;
        }
      }
    }
    if (!repaired)
      throw Error(ErrorCode::insufficient_signal, "strongest usable nodes are collinear");
  }
  // Keep strongest-first order for stable diagnostics.
  std::sort(pick.begin(), pick.end(), [](const Cand& a, const Cand& b) {
    return a.rssi != b.rssi ? a.rssi > b.rssi : a.id < b.id;
  });
  return {pick[0].id, pick[1].id, pick[2].id};
}

struct CircleIntersection {
  std::array<Point, 2> points{};
  int count = 0;
  bool fallback = false;
};

inline CircleIntersection intersect_circles(Point c1, double r1, Point c2, double r2) {
  const double d = distance(c1, c2);
  if (!(d > 0.0)) throw Error(ErrorCode::degenerate_geometry, "circle centres coincide");
  const Point u = (1.0 / d) * (c2 - c1);

  CircleIntersection out;
  if (d > r1 + r2 || d < std::abs(r1 - r2)) {
    // Disjoint or nested: midpoint of the gap along the centre line.
    const double t = std::clamp((r1 + (d - r1 - r2) / 2.0) / d, 0.0, 1.0);
    out.points[0] = c1 + (t * d) * u;
    out.count = 1;
    out.fallback = true;
    return out;
  }
  const double a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  const double h2 = r1 * r1 - a * a;
  const Point base = c1 + a * u;
  if (h2 <= 0.0) {
    out.points[0] = base;
    out.count = 1;
    return out;
  }
  const double h = std::sqrt(h2);
  const Point perp{-u.y, u.x};
  out.points[0] = base + h * perp;
  out.points[1] = base - h * perp;
  out.count = 2;
  return out;
}

inline constexpr double kMinRadius = 0.01;
inline constexpr double kMaxRadius = 50.0;

inline PositionEstimate trilaterate(const NodeLayout& layout, const RssiVector& v,
                                    const rf::DistanceModel& model) {
  const auto ids = select_strongest_nodes(v, layout);

  PositionEstimate est;
  est.used_nodes = ids;
  std::array<Point, 3> centres{};
  for (std::size_t i = 0; i < 3; ++i) {
    centres[i] = layout.position_of(ids[i]);
    const double r = rf::to_distance(model, v.at(ids[i]));
    if (!std::isfinite(r))
      throw Error(ErrorCode::estimation_error, "distance model returned a non-finite radius");
    est.radii[i] = std::clamp(r, kMinRadius, kMaxRadius);
  }

  constexpr std::array<std::array<std::size_t, 3>, 3> pairs{{{0, 1, 2}, {0, 2, 1}, {1, 2, 0}}};
  Point sum{};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto [i, j, third] = pairs[k];
    const auto hit = intersect_circles(centres[i], est.radii[i], centres[j], est.radii[j]);
    Point chosen = hit.points[0];
    if (hit.count == 2) {
      const double e0 = std::abs(distance(hit.points[0], centres[third]) - est.radii[third]);
      const double e1 = std::abs(distance(hit.points[1], centres[third]) - est.radii[third]);
      if (e1 < e0) chosen = hit.points[1];
    }
    if (hit.fallback) ++est.fallback_count;
    est.intersection_points[k] = chosen;
    sum = sum + chosen;
  }
  est.position = (1.0 / 3.0) * sum;
  if (!std::isfinite(est.position.x) || !std::isfinite(est.position.y))
    throw Error(ErrorCode::estimation_error, "estimate is not finite");
  return est;
}

}  // namespace amie::pos
