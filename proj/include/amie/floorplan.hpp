#pragma once

// Floor plans, points of interest, predefined routes and turn-by-turn
// direction generation.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "amie/error.hpp"
#include "amie/geometry.hpp"
#include "amie/positioning.hpp"

namespace amie::plan {

// Inclusive radius within which a waypoint or destination counts as reached.
inline constexpr double kArrivalThreshold = 0.5;

struct Poi {
  std::string key;
  std::string name_en;
  std::string name_ar;
  Point anchor;
};

using Route = std::vector<Point>;

struct FloorPlan {
  Rect bounds;
  pos::NodeLayout beacons;
  std::vector<Poi> pois;
  std::map<std::string, Route> routes;
  std::string exit_poi;

  const Poi* find_poi(std::string_view key) const {
    for (const auto& p : pois)
      if (p.key == key) return &p;
    return nullptr;
  }
};

struct UserPose {
  Point position;
  double heading = std::numbers::pi / 2.0;  // radians CCW from +x
};

enum class Direction { Forward, TurnLeft, TurnRight, TurnAround, Arrived };

inline constexpr std::array<Direction, 5> kAllDirections{Direction::Forward, Direction::TurnLeft,
                                                         Direction::TurnRight, Direction::TurnAround,
                                                         Direction::Arrived};

constexpr std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::Forward: return "forward";
    case Direction::TurnLeft: return "turn_left";
    case Direction::TurnRight: return "turn_right";
    case Direction::TurnAround: return "turn_around";
    case Direction::Arrived: return "arrived";
  }
  return "arrived";
}

inline bool check_arrival(Point position, Point target, double threshold = kArrivalThreshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::validation_error, "arrival threshold must be positive");
  return distance(position, target) <= threshold;
}

namespace detail {

inline bool is_poi_key(std::string_view key) {
  return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

inline double number_at(const nlohmann::json& j, const char* field, const std::string& path) {
  if (!j.contains(field)) throw Error(ErrorCode::validation_error, path + "." + field + " is missing");
  const auto& v = j.at(field);
  if (!v.is_number() || !std::isfinite(v.get<double>()))
    throw Error(ErrorCode::validation_error, path + "." + field + " must be a finite number");
  return v.get<double>();
}

inline std::string string_at(const nlohmann::json& j, const char* field, const std::string& path) {
  if (!j.contains(field) || !j.at(field).is_string())
    throw Error(ErrorCode::validation_error, path + "." + field + " must be a string");
  return j.at(field).get<std::string>();
}

inline Point point_of(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorCode::validation_error, path + " must be an [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Validates a parsed floor-plan document. Errors name the offending field.
inline FloorPlan floorplan_from_json(const nlohmann::json& doc) {
  using detail::number_at;
  using detail::string_at;
  if (!doc.is_object()) throw Error(ErrorCode::validation_error, "floor plan must be an object");

  FloorPlan plan;
  if (!doc.contains("bounds") || !doc.at("bounds").is_object())
    throw Error(ErrorCode::validation_error, "bounds is missing");
  plan.bounds.w = number_at(doc.at("bounds"), "w", "bounds");
  plan.bounds.h = number_at(doc.at("bounds"), "h", "bounds");
  if (!(plan.bounds.w > 0.0) || !(plan.bounds.h > 0.0))
    throw Error(ErrorCode::validation_error, "bounds must have positive w and h");

  if (!doc.contains("beacons") || !doc.at("beacons").is_array())
    throw Error(ErrorCode::validation_error, "beacons must be an array");
  std::vector<pos::BeaconNode> nodes;
  for (std::size_t i = 0; i < doc.at("beacons").size(); ++i) {
    const auto& b = doc.at("beacons")[i];
    const std::string path = "beacons[" + std::to_string(i) + "]";
    if (!b.is_object() || !b.contains("id") || !b.at("id").is_number_integer())
      throw Error(ErrorCode::validation_error, path + ".id must be an integer");
    nodes.push_back({b.at("id").get<int>(), {number_at(b, "x", path), number_at(b, "y", path)}});
  }
  try {
    plan.beacons = pos::NodeLayout(std::move(nodes));
  } catch (const Error& e) {
    throw Error(ErrorCode::validation_error, std::string("beacons: ") + e.what());
  }
  if (plan.beacons.size() < 3)
    throw Error(ErrorCode::validation_error, "beacons: at least 3 are required for localization");

  if (!doc.contains("pois") || !doc.at("pois").is_array())
    throw Error(ErrorCode::validation_error, "pois must be an array");
  for (std::size_t i = 0; i < doc.at("pois").size(); ++i) {
    const auto& p = doc.at("pois")[i];
    const std::string path = "pois[" + std::to_string(i) + "]";
    if (!p.is_object()) throw Error(ErrorCode::validation_error, path + " must be an object");
    Poi poi{string_at(p, "key", path), string_at(p, "name_en", path), string_at(p, "name_ar", path),
            {number_at(p, "x", path), number_at(p, "y", path)}};
    if (!detail::is_poi_key(poi.key))
      throw Error(ErrorCode::validation_error, path + ".key must be a lowercase identifier");
    if (plan.find_poi(poi.key) != nullptr)
      throw Error(ErrorCode::validation_error, path + ".key '" + poi.key + "' is duplicated");
    if (!plan.bounds.contains(poi.anchor))
      throw Error(ErrorCode::validation_error, path + " anchor lies outside bounds");
    plan.pois.push_back(std::move(poi));
  }

  if (!doc.contains("routes") || !doc.at("routes").is_object())
    throw Error(ErrorCode::validation_error, "routes must be an object");
  for (const auto& [key, pts] : doc.at("routes").items()) {
    const std::string path = "routes." + key;
    const Poi* poi = plan.find_poi(key);
    if (poi == nullptr) throw Error(ErrorCode::validation_error, path + " refers to an unknown poi");
    if (!pts.is_array() || pts.empty())
      throw Error(ErrorCode::validation_error, path + " must be a non-empty waypoint list");
    Route route;
    for (std::size_t i = 0; i < pts.size(); ++i)
      route.push_back(detail::point_of(pts[i], path + "[" + std::to_string(i) + "]"));
    if (!check_arrival(route.back(), poi->anchor))
      throw Error(ErrorCode::validation_error, path + " does not end at its poi anchor");
    plan.routes.emplace(key, std::move(route));
  }

  plan.exit_poi = string_at(doc, "exit_poi", "document");
  if (plan.find_poi(plan.exit_poi) == nullptr)
    throw Error(ErrorCode::validation_error, "exit_poi '" + plan.exit_poi + "' is not a known poi");
  return plan;
}

inline FloorPlan load_floorplan(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse_error, std::string("floor plan is not valid JSON: ") + e.what());
  }
  return floorplan_from_json(doc);
}

inline FloorPlan load_floorplan_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open floor plan " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_floorplan(ss.str());
}

inline nlohmann::json floorplan_to_json(const FloorPlan& plan) {
  nlohmann::json doc;
  doc["bounds"] = {{"w", plan.bounds.w}, {"h", plan.bounds.h}};
  doc["beacons"] = nlohmann::json::array();
  for (const auto& b : plan.beacons.nodes())
    doc["beacons"].push_back({{"id", b.id}, {"x", b.position.x}, {"y", b.position.y}});
  doc["pois"] = nlohmann::json::array();
  for (const auto& p : plan.pois)
    doc["pois"].push_back({{"key", p.key}, {"name_en", p.name_en}, {"name_ar", p.name_ar},
                           {"x", p.anchor.x}, {"y", p.anchor.y}});
  doc["routes"] = nlohmann::json::object();
  for (const auto& [key, route] : plan.routes) {
    auto& r = doc["routes"][key];
    r = nlohmann::json::array();
    for (const auto& w : route) r.push_back({w.x, w.y});
  }
  doc["exit_poi"] = plan.exit_poi;
  return doc;
}

inline const Poi& nearest_poi(Point position, const FloorPlan& plan) {
  if (plan.pois.empty()) throw Error(ErrorCode::lookup_error, "floor plan has no points of interest");
  const Poi* best = nullptr;
  double best_d = 0.0;
  for (const auto& p : plan.pois) {
    const double d = distance(position, p.anchor);
    if (best == nullptr || d < best_d || (d == best_d && p.key < best->key)) {
      best = &p;
      best_d = d;
    }
  }
  return *best;
}

inline Route plan_route(const FloorPlan& plan, Point start, std::string_view dest_key) {
  const Poi* poi = plan.find_poi(dest_key);
  if (poi == nullptr)
    throw Error(ErrorCode::unknown_destination, "no such destination '" + std::string(dest_key) + "'");
  if (check_arrival(start, poi->anchor)) return {poi->anchor};
  Route route;
  if (auto it = plan.routes.find(std::string(dest_key)); it != plan.routes.end()) route = it->second;
  auto first = std::find_if(route.begin(), route.end(), [&](Point w) { return !check_arrival(start, w); });
  route.erase(route.begin(), first);
  if (route.empty()) route.push_back(poi->anchor);
  return route;
}

// Removes leading waypoints already reached from `position`.
inline void drop_reached(Route& waypoints, Point position) {
  auto first = std::find_if(waypoints.begin(), waypoints.end(),
                            [&](Point w) { return !check_arrival(position, w); });
  waypoints.erase(waypoints.begin(), first);
}

inline Direction quantize_turn(double delta) {
  constexpr double quarter = std::numbers::pi / 4.0;
  delta = normalize_angle(delta);
  if (std::abs(delta) <= quarter) return Direction::Forward;
  if (delta > quarter && delta <= 3.0 * quarter) return Direction::TurnLeft;
  if (delta >= -3.0 * quarter && delta < -quarter) return Direction::TurnRight;
  return Direction::TurnAround;
}

inline Direction next_direction(const UserPose& pose, const Route& waypoints, Point dest_anchor) {
  if (check_arrival(pose.position, dest_anchor)) return Direction::Arrived;
  if (waypoints.empty())
    throw Error(ErrorCode::navigation_state, "no waypoints left but destination not reached");
  return quantize_turn(bearing(pose.position, waypoints.front()) - pose.heading);
}

struct EmergencyRoute {
  Route waypoints;
  Point origin;
};

inline EmergencyRoute emergency_route(const FloorPlan& plan, Point position) {
  return {plan_route(plan, position, plan.exit_poi), position};
}

/// Stateful follower of one route: drops reached waypoints as the user
/// moves and turns the stored heading when a turn is issued.
class Navigator {
public:
  Navigator(const FloorPlan& plan, std::string dest_key, Point start)
      : dest_key_(std::move(dest_key)),
        anchor_(plan.find_poi(dest_key_) ? plan.find_poi(dest_key_)->anchor : Point{}),
        remaining_(plan_route(plan, start, dest_key_)) {}

  const std::string& destination() const noexcept { return dest_key_; }
  Point anchor() const noexcept { return anchor_; }
  const Route& remaining() const noexcept { return remaining_; }

  // Direction for the user at `pose`; turn directives rotate `pose.heading`
  // onto the next waypoint.
  Direction step(UserPose& pose) {
    drop_reached(remaining_, pose.position);
    const Direction d = next_direction(pose, remaining_, anchor_);
    if (d == Direction::TurnLeft || d == Direction::TurnRight || d == Direction::TurnAround)
      pose.heading = bearing(pose.position, remaining_.front());
    return d;
  }

private:
  std::string dest_key_;
  Point anchor_;
  Route remaining_;
};

}  // namespace amie::plan
