#pragma once

#include <cmath>
#include <numbers>

namespace amie {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point, Point) = default;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

// Bearing of b as seen from a, counter-clockwise from +x.
inline double bearing(Point a, Point b) { return std::atan2(b.y - a.y, b.x - a.x); }

// Maps any angle into (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::remainder(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

// Twice the signed area is the cross product; callers compare |area|.
inline double triangle_area(Point a, Point b, Point c) {
  return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

struct Rect {
  double w = 0.0;
  double h = 0.0;

  bool contains(Point p) const { return p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h; }
  Point clamp(Point p) const {
    return {p.x < 0.0 ? 0.0 : (p.x > w ? w : p.x), p.y < 0.0 ? 0.0 : (p.y > h ? h : p.y)};
  }
};

}  // namespace amie
