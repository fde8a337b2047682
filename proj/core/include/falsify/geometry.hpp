#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace falsify {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Closest point of a polyline to a query point, expressed in route coordinates.
struct RouteProjection {
  double arc_length = 0.0;
  // Signed; positive to the left of the direction of travel.
  double lateral = 0.0;
};

// Piecewise-linear route parameterized by arc length.
class Polyline {
 public:
  Polyline() = default;
  // Requires >= 2 waypoints with distinct consecutive entries; throws InvalidTemplate otherwise.
  explicit Polyline(std::vector<Vec2> waypoints);

  std::span<const Vec2> waypoints() const { return waypoints_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  // s is clamped to [0, length()].
  Vec2 point_at(double s) const;
  // Heading of the segment that contains s, in (-pi, pi]. At an interior vertex the
  // outgoing segment wins; at the end the last segment is used.
  double heading_at(double s) const;

  RouteProjection project(Vec2 p) const;

 private:
  std::size_t segment_index(double s) const;

  std::vector<Vec2> waypoints_;
  std::vector<double> cumulative_;
};

}  // namespace falsify
