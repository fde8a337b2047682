#include "falsify/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include "falsify/error.hpp"

namespace falsify {

Polyline::Polyline(std::vector<Vec2> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) {
    throw Error(ErrorCode::InvalidTemplate, "route needs at least 2 waypoints");
  }
  cumulative_.reserve(waypoints_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    const double len = distance(waypoints_[i - 1], waypoints_[i]);
    if (!(len > 0.0)) {
      throw Error(ErrorCode::InvalidTemplate, "consecutive route waypoints coincide");
    }
    cumulative_.push_back(cumulative_.back() + len);
  }
}

std::size_t Polyline::segment_index(double s) const {
  // Index i of the segment [cumulative_[i], cumulative_[i+1]) containing s.
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  const std::size_t last_segment = waypoints_.size() - 2;
  if (idx == 0) return 0;
  return std::min(idx - 1, last_segment);
}

Vec2 Polyline::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_index(s);
  const Vec2 a = waypoints_[i];
  const Vec2 b = waypoints_[i + 1];
  const double seg = cumulative_[i + 1] - cumulative_[i];
  const double t = (s - cumulative_[i]) / seg;
  if (t >= 1.0) return b;
  return a + t * (b - a);
}

double Polyline::heading_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_index(s);
  const Vec2 d = waypoints_[i + 1] - waypoints_[i];
  double h = std::atan2(d.y, d.x);
  if (h <= -std::numbers::pi) h = std::numbers::pi;
  return h;
}

RouteProjection Polyline::project(Vec2 p) const {
  RouteProjection best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    const Vec2 a = waypoints_[i];
    const Vec2 d = waypoints_[i + 1] - a;
    const double seg = cumulative_[i + 1] - cumulative_[i];
    const double t = std::clamp(dot(p - a, d) / (seg * seg), 0.0, 1.0);
    const Vec2 q = a + t * d;
    const double dist = distance(p, q);
    if (dist < best_dist) {
      best_dist = dist;
      best.arc_length = cumulative_[i] + t * seg;
      const double side = cross(d, p - a);
      best.lateral = side >= 0.0 ? dist : -dist;
    }
  }
  return best;
}

}  // namespace falsify
